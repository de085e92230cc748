use pegamp::channels::*;
use pegamp::gamp::*;
use pegamp::harness::{generate_problem, relative_error, success, true_channels, SignalFamily};
use pegamp::Error;
use proptest::prelude::*;

fn identity(n: usize) -> SensingOperator {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        d[i * n + i] = 1.0;
    }
    SensingOperator::new(n, n, d).unwrap()
}

fn bg_prior(sparsity: f64) -> InputChannel {
    InputChannel::Bgm(BgmParams { sparsity, weights: vec![1.0], means: vec![0.0], variances: vec![1.0] })
}

#[test]
fn operator_rejects_bad_shapes() {
    assert!(SensingOperator::new(0, 3, vec![]).is_err());
    assert!(SensingOperator::new(2, 2, vec![1.0; 3]).is_err());
    assert!(SensingOperator::new(1, 2, vec![1.0, f64::NAN]).is_err());
    let a = SensingOperator::new(2, 3, vec![1.0, 2.0, 0.0, 0.0, 1.0, -1.0]).unwrap();
    assert_eq!(a.apply(&[1.0, 1.0, 1.0]), vec![3.0, 0.0]);
    assert_eq!(a.apply_adjoint(&[1.0, 2.0]), vec![1.0, 4.0, -2.0]);
    assert_eq!(a.column_sq_norms(), &[1.0, 5.0, 1.0]);
    assert_eq!(a.row_sq_norms(), &[5.0, 2.0]);
    assert_eq!(a.frobenius_sq(), 7.0);
}

#[test]
fn identity_operator_recovers_noiseless_data() {
    let n = 200;
    let prior = bg_prior(0.2);
    let x = prior.sample_prior(n, 3).unwrap();
    let a = identity(n);
    let opts = SolverOptions { max_iters: 30, ..SolverOptions::default() };
    let res = run_oracle_gamp(&a, &x, &prior, &AwgnParams { variance: 1e-10 }, &opts).unwrap();
    assert!(res.iterations_used <= 30);
    assert!(relative_error(&x, &res.x_hat).unwrap() < 1e-6);
}

#[test]
fn zero_data_stays_at_zero() {
    let p = generate_problem(100, 50, 5, SignalFamily::Bg, 0.0, 1).unwrap();
    let y = vec![0.0; 50];
    let input = default_input_params(PriorFamily::Bgm, &y, &p.a, 3).unwrap();
    let res = run_pe_gamp(&p.a, &y, &input, &default_noise_params(&y).unwrap(), &SolverOptions::default()).unwrap();
    assert!(res.converged);
    assert!(res.iterations_used <= 5);
    assert!(res.x_hat.iter().all(|v| *v == 0.0));
}

#[test]
fn oracle_success_phase_at_n1000() {
    let (n, m, s) = (1000, 500, 100);
    let wins = (0..100)
        .filter(|&t| {
            let p = generate_problem(n, m, s, SignalFamily::Bg, 0.0, 1000 + t).unwrap();
            let (input, noise) = true_channels(SignalFamily::Bg, n, s, 0.0);
            let res = run_oracle_gamp(&p.a, &p.y, &input, &noise, &SolverOptions::default()).unwrap();
            let ok = success(&p.x, &res.x_hat).unwrap();
            if ok {
                // noiseless residual check on accepted trials
                let r: f64 = p.a.apply(&res.x_hat).iter().zip(&p.y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
                let y: f64 = p.y.iter().map(|v| v * v).sum();
                assert!(r.sqrt() < 1e-3 * y.sqrt());
            }
            ok
        })
        .count();
    assert!(wins >= 95, "{wins}/100");
}

#[test]
fn oracle_flag_matches_oracle_entry_point() {
    let p = generate_problem(200, 100, 20, SignalFamily::Bg, 0.01, 5).unwrap();
    let (input, noise) = true_channels(SignalFamily::Bg, 200, 20, 0.01);
    let opts = SolverOptions { oracle: true, ..SolverOptions::default() };
    let a = run_pe_gamp(&p.a, &p.y, &input, &noise, &opts).unwrap();
    let b = run_oracle_gamp(&p.a, &p.y, &input, &noise, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn runs_are_deterministic() {
    let p = generate_problem(200, 100, 20, SignalFamily::Bg, 0.0, 8).unwrap();
    let input = default_input_params(PriorFamily::Bgm, &p.y, &p.a, 3).unwrap();
    let noise = default_noise_params(&p.y).unwrap();
    let a = run_pe_gamp(&p.a, &p.y, &input, &noise, &SolverOptions::default()).unwrap();
    let b = run_pe_gamp(&p.a, &p.y, &input, &noise, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.residual_history.len(), a.iterations_used);
    assert_eq!(a.tau_x_history.len(), a.iterations_used);
}

#[test]
fn fixed_point_consistency_with_identity() {
    let n = 100;
    let prior = bg_prior(0.3);
    let x = prior.sample_prior(n, 4).unwrap();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + 0.01 * ((i as f64) * 0.7).sin()).collect();
    let a = identity(n);
    let mut last = None;
    let res = run_gamp_observed(
        &a,
        &y,
        &prior,
        &AwgnParams { variance: 1e-4 },
        MessagePassing::SumProduct,
        false,
        &SolverOptions { tol: 1e-5, max_iters: 500, ..SolverOptions::default() },
        |st, _, _| last = Some(st.clone()),
    )
    .unwrap();
    assert!(res.converged);
    let st = last.unwrap();
    // x = g_in(x + tau_r A^T s) up to the stopping tolerance
    let back = a.apply_adjoint(&st.s);
    let scale = st.x_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
    let gap: f64 = st
        .x_hat
        .iter()
        .zip(&back)
        .map(|(xh, b)| {
            let g = prior.gin_sum_product(xh + st.tau_r * b, st.tau_r).unwrap();
            (xh - g.mean).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    assert!(gap < 1e-4 * scale, "{gap}");
    assert!(relative_error(&x, &st.x_hat).unwrap() < 0.05);
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = generate_problem(50, 20, 5, SignalFamily::Bg, 0.0, 1).unwrap();
    let prior = bg_prior(0.1);
    let noise = AwgnParams { variance: 1e-4 };
    let opts = SolverOptions::default();
    assert!(matches!(run_oracle_gamp(&p.a, &p.y[..10], &prior, &noise, &opts), Err(Error::DimensionMismatch(_))));
    let mut y = p.y.clone();
    y[0] = f64::NAN;
    assert!(run_oracle_gamp(&p.a, &y, &prior, &noise, &opts).is_err());
    let bad = SolverOptions { max_iters: 0, ..opts };
    assert!(matches!(run_oracle_gamp(&p.a, &p.y, &prior, &noise, &bad), Err(Error::Config(_))));
    let r = run_gamp_observed(&p.a, &p.y, &prior, &noise, MessagePassing::MaxSum, false, &opts, |_, _, _| {});
    assert!(matches!(r, Err(Error::UnsupportedMaxSum)));
}

#[test]
fn huge_lasso_rate_gives_zero() {
    let p = generate_problem(100, 50, 10, SignalFamily::Bg, 0.0, 2).unwrap();
    let res = run_max_sum_lasso(
        &p.a,
        &p.y,
        &LaplaceParams { rate: 1e12 },
        &AwgnParams { variance: 1.0 },
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(res.x_hat.iter().all(|v| *v == 0.0));
}

/// `max_{n in S} |A^T(y - A x)_n - rate theta sign(x_n)| / (rate theta)`.
pub fn lasso_kkt_residual(a: &SensingOperator, y: &[f64], x: &[f64], rate: f64, theta: f64) -> f64 {
    let resid: Vec<f64> = a.apply(x).iter().zip(y).map(|(u, v)| v - u).collect();
    let g = a.apply_adjoint(&resid);
    let k = rate * theta;
    x.iter().zip(&g).filter(|(xi, _)| **xi != 0.0).map(|(xi, gi)| (gi - k * xi.signum()).abs() / k).fold(0.0, f64::max)
}

#[test]
fn max_sum_lasso_fixed_point_is_stationary() {
    let p = generate_problem(300, 150, 20, SignalFamily::Bg, 0.0, 6).unwrap();
    let (rate, theta) = (2.0, 1e-2);
    let opts = SolverOptions { tol: 1e-10, max_iters: 2000, ..SolverOptions::default() };
    let res =
        run_max_sum_lasso(&p.a, &p.y, &LaplaceParams { rate }, &AwgnParams { variance: theta }, &opts).unwrap();
    assert!(res.converged);
    assert!(lasso_kkt_residual(&p.a, &p.y, &res.x_hat, rate, theta) < 1e-3);
}

#[test]
fn pe_lasso_trails_pe_bgm_at_moderate_sparsity() {
    let (n, m, s) = (500, 300, 45);
    let mut bgm = 0;
    let mut lasso = 0;
    for t in 0..20 {
        let p = generate_problem(n, m, s, SignalFamily::Bg, 0.0, 77 + t).unwrap();
        let input = default_input_params(PriorFamily::Bgm, &p.y, &p.a, 3).unwrap();
        let noise = default_noise_params(&p.y).unwrap();
        let opts = SolverOptions::default();
        if let Ok(r) = run_pe_gamp(&p.a, &p.y, &input, &noise, &opts) {
            bgm += success(&p.x, &r.x_hat).unwrap() as usize;
        }
        if let Ok(r) = run_pe_lasso(&p.a, &p.y, &opts) {
            lasso += success(&p.x, &r.x_hat).unwrap() as usize;
        }
    }
    assert!(lasso < bgm, "lasso {lasso}, bgm {bgm}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn state_stays_finite_and_variances_positive(
        n in 20usize..60,
        ratio in 0.3f64..0.9,
        rho in 0.05f64..0.5,
        noise in prop_oneof![Just(0.0), 1e-3f64..0.3],
        be in any::<bool>(),
        estimate in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let m = ((n as f64 * ratio).round() as usize).max(2);
        let s = ((rho * m as f64).round() as usize).max(1);
        let fam = if be { SignalFamily::Be } else { SignalFamily::Bg };
        let p = generate_problem(n, m, s, fam, noise, seed).unwrap();
        let pf = if be { PriorFamily::Bem } else { PriorFamily::Bgm };
        let input = default_input_params(pf, &p.y, &p.a, 2).unwrap();
        let out = default_noise_params(&p.y).unwrap();
        let opts = SolverOptions { max_iters: 40, ..SolverOptions::default() };
        let mut ok = true;
        let res = run_gamp_observed(&p.a, &p.y, &input, &out, MessagePassing::SumProduct, estimate, &opts, |st, _, _| {
            ok &= st.tau_q > 0.0 && st.tau_r > 0.0 && st.tau_x >= 0.0 && st.tau_s >= 0.0;
            ok &= [&st.q, &st.s, &st.r, &st.x_hat].iter().all(|v| v.iter().all(|e| e.is_finite()));
        });
        match res {
            Ok(r) => {
                prop_assert!(ok);
                prop_assert!(r.x_hat.iter().all(|v| v.is_finite()));
                prop_assert_eq!(r.residual_history.len(), r.iterations_used);
            }
            Err(e) => prop_assert!(matches!(e, Error::Divergence { .. }), "{e:?}"),
        }
    }
}
