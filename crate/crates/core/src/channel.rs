//! One-ring channel covariance of a user group at the macro ULA, its
//! truncated eigendecomposition, and small-scale channel draws.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::GroupGeometry;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest phase excursion (radians) integrated by a single 64-node panel.
const MAX_PANEL_PHASE: f64 = 40.0;

/// Unit-variance circularly-symmetric complex Gaussian.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// `(1 / 2 Delta) int_{theta - Delta}^{theta + Delta} exp(-j 2 pi D lag sin t) dt`.
pub fn one_ring_lag(geom: &GroupGeometry, lag: i64) -> Complex64 {
    if lag == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (lo, hi) = (geom.aoa - geom.angular_spread, geom.aoa + geom.angular_spread);
    let w = 2.0 * std::f64::consts::PI * geom.antenna_spacing * lag as f64;
    let span = (w * (hi.sin() - lo.sin())).abs().max(w.abs() * (hi - lo));
    let panels = (span / MAX_PANEL_PHASE).ceil().max(1.0) as usize;
    let rule = GaussLegendre::order64();
    let step = (hi - lo) / panels as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..panels {
        let a = lo + k as f64 * step;
        re += rule.integrate(|t| (w * t.sin()).cos(), a, a + step);
        im -= rule.integrate(|t| (w * t.sin()).sin(), a, a + step);
    }
    Complex64::new(re, im) / (2.0 * geom.angular_spread)
}

/// `M x M` one-ring covariance. Toeplitz and Hermitian: only lags
/// `0..M` are integrated.
pub fn one_ring_covariance(geom: &GroupGeometry) -> CMatrix {
    let m = geom.num_antennas;
    let lags: Vec<Complex64> = (0..m as i64).map(|d| one_ring_lag(geom, d)).collect();
    CMatrix::from_fn(m, m, |i, j| {
        if i >= j {
            lags[i - j]
        } else {
            lags[j - i].conj()
        }
    })
}

/// Truncated eigendecomposition of a group covariance.
#[derive(Debug, Clone)]
pub struct GroupChannelModel {
    pub covariance: CMatrix,
    /// `M x r` orthonormal dominant eigenvectors.
    pub eigenvectors: CMatrix,
    /// Dominant eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub effective_rank: usize,
}

impl GroupChannelModel {
    pub fn num_antennas(&self) -> usize {
        self.covariance.nrows()
    }

    /// `U Lambda U^H` of the retained eigenpairs.
    pub fn truncated_covariance(&self) -> CMatrix {
        let scaled = self.scaled_eigenvectors();
        &scaled * scaled.adjoint()
    }

    /// `U Lambda^{1/2}`.
    pub fn scaled_eigenvectors(&self) -> CMatrix {
        let mut u = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let s = l.sqrt();
            for v in u.column_mut(j).iter_mut() {
                *v *= s;
            }
        }
        u
    }
}

/// Relative Frobenius asymmetry `||A - A^H|| / ||A||`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / norm
}

/// Eigenpairs of a Hermitian matrix sorted by descending eigenvalue.
pub(crate) fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let asym = hermitian_defect(a);
    if !(asym <= 1e-10) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    // symmetrise away round-off before the solver
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigendecomposition keeping the smallest number of leading eigenpairs that
/// carry at least `energy_fraction` of the trace. Negative round-off
/// eigenvalues are clamped to zero first.
pub fn eigendecompose(covariance: &CMatrix, energy_fraction: f64) -> Result<GroupChannelModel> {
    if !(energy_fraction > 0.0 && energy_fraction <= 1.0) {
        return Err(Error::Invalid(format!("energy fraction {energy_fraction} not in (0, 1]")));
    }
    let (values, vectors) = hermitian_eigen(covariance)?;
    let clamped: Vec<f64> = values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Invalid("covariance has no positive eigenvalue".into()));
    }
    let target = energy_fraction * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut rank = clamped.len();
    for (k, &l) in clamped.iter().enumerate() {
        acc += l;
        if acc >= target {
            rank = k + 1;
            break;
        }
    }
    Ok(GroupChannelModel {
        covariance: covariance.clone(),
        eigenvectors: vectors.columns(0, rank).into_owned(),
        eigenvalues: clamped[..rank].to_vec(),
        effective_rank: rank,
    })
}

/// Builds and decomposes the covariance of one group.
pub fn group_model(geom: &GroupGeometry, energy_fraction: f64) -> Result<GroupChannelModel> {
    geom.validate()?;
    eigendecompose(&one_ring_covariance(geom), energy_fraction)
}

/// `h = U Lambda^{1/2} w` with `w ~ CN(0, I_r)`.
pub fn draw_channel<R: Rng + ?Sized>(model: &GroupChannelModel, rng: &mut R) -> CVector {
    let r = model.effective_rank;
    let w = CVector::from_fn(r, |k, _| complex_gaussian(rng) * model.eigenvalues[k].sqrt());
    &model.eigenvectors * w
}
