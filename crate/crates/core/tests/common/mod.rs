#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided one-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

pub fn exp1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

/// `E[exp(-s I)]` with `I = sum P kappa^2 x^-a G` over a PPP of the tier on
/// the annulus `[d, R]` and unit exponential `G`.
pub fn laplace_by_sampling(
    tier: &jsdm_hetnet::config::TierParams,
    power: f64,
    kappa_sq: f64,
    d: f64,
    alpha: f64,
    s: f64,
    n: usize,
) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let (r2, d2) = (tier.disc_radius.powi(2), d * d);
    let count = rand_distr::Poisson::new(tier.density * std::f64::consts::PI * (r2 - d2)).unwrap();
    let mut acc = 0.0;
    for _ in 0..n {
        let k: f64 = rng.sample(count);
        let mut interference = 0.0;
        for _ in 0..k as usize {
            let x = (d2 + rng.random::<f64>() * (r2 - d2)).sqrt();
            let g: f64 = rng.sample(rand_distr::Exp1);
            interference += power * kappa_sq * x.powf(-alpha) * g;
        }
        acc += (-s * interference).exp();
    }
    acc / n as f64
}
