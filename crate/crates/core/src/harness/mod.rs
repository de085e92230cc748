//! Problem generation, metrics, experiment sweeps and file IO.

pub mod config;
pub mod image;
pub mod io;
pub mod metrics;
pub mod problem;
pub mod seeds;
pub mod sweep;
pub mod variant;

pub use config::ExperimentConfig;
pub use image::{run_image_recovery, Dct2, GrayImage, ImageRecord, SparsifyingBasis};
pub use metrics::{psnr_db, relative_error, snr_db, success, SNR_CAP_DB, SUCCESS_TOL};
pub use seeds::cell_seed;
pub use problem::{
    generate_iid_matrix, generate_matrix, generate_problem, generate_signal, measure, measurement_snr_db, Problem, SignalFamily,
};
pub use sweep::{run_ptc_sweep, run_snr_sweep, PtcRecord, SnrRecord};
pub use variant::{solve, true_channels, Variant};
