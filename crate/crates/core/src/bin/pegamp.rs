use clap::{Args, Parser, Subcommand};
use pegamp::gamp::{default_input_params, default_noise_params, run_pe_gamp, run_pe_lasso, PriorFamily};
use pegamp::harness::config::measurements_for;
use pegamp::harness::io::{read_matrix, read_vector, write_csv, write_sidecar, write_vector};
use pegamp::harness::sweep::trial_seeds;
use pegamp::harness::{run_image_recovery, run_ptc_sweep, run_snr_sweep, ExperimentConfig, GrayImage, Variant};
use pegamp::state_evolution::{se_run, write_trajectory_csv};
use pegamp::Error;
use serde_json::json;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "pegamp", version, about = "Sparse recovery with parameter-estimating GAMP")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML file of experiment keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// base seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// run only this variant (pe_bgm, pe_bem, pe_lasso, oracle)
    #[arg(long, global = true)]
    variant: Option<Variant>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Recover one signal from a matrix file and a measurement file
    Recover {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        measurements: Option<PathBuf>,
    },
    /// Phase-transition sweep over the sigma/rho grid
    Ptc,
    /// Recovery SNR over m_grid at fixed sparsity
    SnrSweep,
    /// Image recovery in the DCT basis
    Image {
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// State-evolution trajectory
    SePredict,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn load_config(common: &Common) -> pegamp::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(v) = common.variant {
        cfg.variants = vec![v];
    }
    Ok(cfg)
}

fn out_file(dir: &Path, name: &str) -> pegamp::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn run(cli: Cli) -> pegamp::Result<()> {
    let cfg = load_config(&cli.common)?;
    let out = &cli.common.out;
    let started = Instant::now();
    match cli.cmd {
        Cmd::Recover { matrix, measurements } => {
            let mpath = matrix.or(cfg.matrix.clone()).ok_or_else(|| Error::Config("no matrix file given".into()))?;
            let ypath = measurements
                .or(cfg.measurements.clone())
                .ok_or_else(|| Error::Config("no measurement file given".into()))?;
            let a = read_matrix(&mpath)?;
            let y = read_vector(&ypath)?;
            let opts = cfg.solver_options()?;
            let variant = cli.common.variant.unwrap_or(Variant::PeBgm);
            let res = match variant {
                Variant::PeBgm | Variant::PeBem => {
                    let fam = if variant == Variant::PeBgm { PriorFamily::Bgm } else { PriorFamily::Bem };
                    let input = default_input_params(fam, &y, &a, cfg.components)?;
                    run_pe_gamp(&a, &y, &input, &default_noise_params(&y)?, &opts)?
                }
                Variant::PeLasso => run_pe_lasso(&a, &y, &opts)?,
                Variant::Oracle => return Err(Error::Config("recover needs an estimating variant".into())),
            };
            write_vector(&out_file(out, "x_hat.txt")?, &res.x_hat)?;
            let summary = json!({
                "command": "recover",
                "variant": variant,
                "matrix": mpath,
                "measurements": ypath,
                "iterations": res.iterations_used,
                "converged": res.converged,
                "input_params": res.final_params_input,
                "noise_params": res.final_params_output,
                "config": cfg,
            });
            write_sidecar(&out_file(out, "recover.json")?, &summary)?;
            println!("{} iterations, converged: {}", res.iterations_used, res.converged);
        }
        Cmd::Ptc => {
            let records = run_ptc_sweep(&cfg)?;
            write_csv(&records, File::create(out_file(out, "ptc.csv")?)?)?;
            let mut cells = Vec::new();
            for &sigma in &cfg.sigma_grid {
                for &rho in &cfg.rho_grid {
                    cells.push(json!({
                        "sigma": sigma,
                        "rho": rho,
                        "m": measurements_for(cfg.n, sigma),
                        "seeds": trial_seeds(cfg.seed, sigma, rho, cfg.trials),
                    }));
                }
            }
            let side = json!({
                "command": "ptc",
                "config": cfg,
                "seed_rule": "hash_words([seed, sigma bits, rho bits, trial])",
                "cells": cells,
                "wall_time_s": started.elapsed().as_secs_f64(),
            });
            write_sidecar(&out_file(out, "ptc.json")?, &side)?;
            println!("{} records written to {}", records.len(), out.join("ptc.csv").display());
        }
        Cmd::SnrSweep => {
            let records = run_snr_sweep(&cfg)?;
            write_csv(&records, File::create(out_file(out, "snr.csv")?)?)?;
            let cells: Vec<_> = cfg
                .m_grid
                .iter()
                .map(|&m| json!({ "M": m, "seeds": trial_seeds(cfg.seed, m as f64, cfg.s as f64, cfg.trials) }))
                .collect();
            let side = json!({
                "command": "snr-sweep",
                "config": cfg,
                "seed_rule": "hash_words([seed, M as f64 bits, S as f64 bits, trial])",
                "cells": cells,
                "wall_time_s": started.elapsed().as_secs_f64(),
            });
            write_sidecar(&out_file(out, "snr.json")?, &side)?;
            println!("{} records written to {}", records.len(), out.join("snr.csv").display());
        }
        Cmd::Image { image } => {
            let path = image.or(cfg.image.clone()).ok_or_else(|| Error::Config("no image file given".into()))?;
            let img = GrayImage::load(&path)?;
            let opts = cfg.solver_options()?;
            let records = run_image_recovery(&img, &cfg.sigma_grid, cfg.image_snr_db, cfg.components, &opts, cfg.seed)?;
            write_csv(&records, File::create(out_file(out, "image.csv")?)?)?;
            let side = json!({
                "command": "image",
                "image": path,
                "config": cfg,
                "wall_time_s": started.elapsed().as_secs_f64(),
            });
            write_sidecar(&out_file(out, "image.json")?, &side)?;
            for r in &records {
                println!("sigma {:.2} {:<8} PSNR {:.2} dB", r.sigma, r.variant, r.psnr_db);
            }
        }
        Cmd::SePredict => {
            let se = cfg.se_config()?;
            let traj = se_run(&se)?;
            write_trajectory_csv(&traj, File::create(out_file(out, "se.csv")?)?)?;
            let side = json!({
                "command": "se-predict",
                "config": cfg,
                "state_evolution": se,
                "wall_time_s": started.elapsed().as_secs_f64(),
            });
            write_sidecar(&out_file(out, "se.json")?, &side)?;
            let last = traj.last().expect("trajectory starts with the initial state");
            println!("{} iterations, predicted MSE {:.4e}", last.t, last.mse);
        }
    }
    Ok(())
}
