//! Numerical integration: fixed Gauss-Legendre rules, adaptive
//! Gauss-Kronrod (7/15) and dyadic composite Simpson with Richardson
//! extrapolation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    /// Shared 32-point rule.
    pub fn order32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// Kronrod 15-point abscissae (positive half, descending) and weights; the
// odd-indexed abscissae are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let est = kronrod * h;
    let err = ((kronrod - gauss) * h).abs();
    (est, err)
}

/// Globally adaptive Gauss-Kronrod integration of `f` over [a, b].
///
/// Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`. Panels are bisected largest-error first.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_PANELS: usize = 2000;
    let (est, err) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, est, err)];
    let mut total = est;
    let mut total_err = err;
    let mut previous = f64::NAN;
    while !(total_err <= abs_tol.max(rel_tol * total.abs())) {
        if panels.len() >= MAX_PANELS || !total.is_finite() || total_err.is_nan() {
            return Err(Error::NonConvergence {
                last: total,
                previous,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, pest, perr) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (e1, r1) = gk15(&mut f, pa, mid);
        let (e2, r2) = gk15(&mut f, mid, pb);
        previous = total;
        total += e1 + e2 - pest;
        total_err += r1 + r2 - perr;
        panels.push((pa, mid, e1, r1));
        panels.push((mid, pb, e2, r2));
    }
    // Re-sum to shed accumulated cancellation error.
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Composite Simpson on a dyadic grid over [a, b] whose finest level has
/// `2^max_level` intervals. `f(i)` gives the integrand at node
/// `a + i (b - a) / 2^max_level`, so callers can precompute or memoise node
/// values. Starting from `2^min_level` intervals, the grid is doubled until
/// two successive Simpson sums differ by less than `rel_tol` (relative, with
/// `abs_tol` floor); the result is Richardson-extrapolated.
pub fn dyadic_simpson<F: FnMut(usize) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    min_level: u32,
    max_level: u32,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    assert!(min_level >= 1 && min_level <= max_level);
    let fine = 1usize << max_level;
    let mut cache: Vec<Option<f64>> = vec![None; fine + 1];
    let mut value = |i: usize, cache: &mut Vec<Option<f64>>| -> f64 {
        if let Some(v) = cache[i] {
            v
        } else {
            let v = f(i);
            cache[i] = Some(v);
            v
        }
    };
    let mut simpson = |level: u32, cache: &mut Vec<Option<f64>>| -> f64 {
        let n = 1usize << level;
        let stride = fine / n;
        let h = (b - a) / n as f64;
        let mut sum = value(0, cache) + value(fine, cache);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * value(k * stride, cache);
        }
        sum * h / 3.0
    };
    let mut prev = simpson(min_level, &mut cache);
    for level in (min_level + 1)..=max_level {
        let cur = simpson(level, &mut cache);
        let extrapolated = cur + (cur - prev) / 15.0;
        if (cur - prev).abs() <= abs_tol.max(rel_tol * extrapolated.abs()) {
            return Ok(extrapolated);
        }
        if level == max_level {
            return Err(Error::NonConvergence {
                last: cur,
                previous: prev,
            });
        }
        prev = cur;
    }
    // min_level == max_level: single evaluation, nothing to compare against.
    Ok(prev)
}
