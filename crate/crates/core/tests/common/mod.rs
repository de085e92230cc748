//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use pegamp::channels::{BemParams, BgmParams, InputChannel, LaplaceParams};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod 7/15 quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 30)
}

/// Integral over a list of breakpoints, each panel adaptive.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> f64 {
    points.windows(2).map(|w| adapt(&f, w[0], w[1], tol, 30)).sum()
}

/// Centered finite difference.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn ln_gauss(x: f64, m: f64, v: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
}

/// Posterior mean and variance of `x` under `prior(x) N(x; r, tau)` by direct
/// quadrature of the defining integrals. The continuous part is integrated
/// numerically; a spike at zero enters as a point mass.
pub fn gin_oracle(prior: &InputChannel, r: f64, tau: f64) -> (f64, f64) {
    let (ln_cont, spike_ln_mass, lo_support, centers): (Box<dyn Fn(f64) -> f64>, Option<f64>, f64, Vec<(f64, f64)>) =
        match prior {
            InputChannel::Bgm(BgmParams { sparsity, weights, means, variances }) => {
                let (s, w, m, v) = (*sparsity, weights.clone(), means.clone(), variances.clone());
                let centers = (0..w.len())
                    .map(|c| ((m[c] * tau + r * v[c]) / (v[c] + tau), (v[c] * tau / (v[c] + tau)).sqrt()))
                    .collect();
                let f = move |x: f64| {
                    let mut acc = 0.0f64;
                    let mut terms = Vec::new();
                    for c in 0..w.len() {
                        terms.push(s.ln() + w[c].ln() + ln_gauss(x, m[c], v[c]) + ln_gauss(x, r, tau));
                    }
                    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    for t in &terms {
                        acc += (t - mx).exp();
                    }
                    mx + acc.ln()
                };
                (Box::new(f), Some((1.0 - s).ln() + ln_gauss(0.0, r, tau)), f64::NEG_INFINITY, centers)
            }
            InputChannel::Bem(BemParams { sparsity, weights, rates }) => {
                let (s, w, a) = (*sparsity, weights.clone(), rates.clone());
                let centers = a.iter().map(|ac| ((r - ac * tau).max(0.0), tau.sqrt())).collect();
                let f = move |x: f64| {
                    if x < 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    let mut terms = Vec::new();
                    for c in 0..w.len() {
                        terms.push(s.ln() + w[c].ln() + a[c].ln() - a[c] * x + ln_gauss(x, r, tau));
                    }
                    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
                };
                (Box::new(f), Some((1.0 - s).ln() + ln_gauss(0.0, r, tau)), 0.0, centers)
            }
            InputChannel::Laplace(LaplaceParams { rate }) => {
                let l = *rate;
                let centers = vec![(r - l * tau, tau.sqrt()), (r + l * tau, tau.sqrt()), (0.0, tau.sqrt())];
                let f = move |x: f64| (l / 2.0).ln() - l * x.abs() + ln_gauss(x, r, tau);
                (Box::new(f), None, f64::NEG_INFINITY, centers)
            }
        };

    // integration window covering every component's mass plus the origin
    let mut pts = vec![0.0];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(c, sd) in &centers {
        lo = lo.min(c - 40.0 * sd);
        hi = hi.max(c + 40.0 * sd);
        pts.push(c);
        // geometric breakpoints so narrow peaks cannot fall between nodes
        for k in -6..=1 {
            let d = sd * 10f64.powi(k);
            pts.push(c - d);
            pts.push(c + d);
        }
    }
    for k in -10..=0 {
        pts.push(10f64.powi(k));
        pts.push(-(10f64.powi(k)));
    }
    lo = lo.min(-1e-3).max(lo_support);
    hi = hi.max(1e-3);
    pts.push(lo);
    pts.push(hi);
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    // shift so the largest log term is zero
    let mut shift = spike_ln_mass.unwrap_or(f64::NEG_INFINITY);
    for p in &pts {
        shift = shift.max(ln_cont(*p));
    }
    for i in 0..=2000 {
        let x = lo + (hi - lo) * i as f64 / 2000.0;
        shift = shift.max(ln_cont(x));
    }
    let dens = |x: f64| (ln_cont(x) - shift).exp();
    let tol = 1e-13;
    let z_cont = integrate_pieces(&dens, &pts, tol);
    let z_spike = spike_ln_mass.map(|l| (l - shift).exp()).unwrap_or(0.0);
    let z = z_cont + z_spike;
    let m1 = integrate_pieces(|x| x * dens(x), &pts, tol) / z;
    let var = (integrate_pieces(|x| (x - m1) * (x - m1) * dens(x), &pts, tol) + z_spike * m1 * m1) / z;
    (m1, var)
}
