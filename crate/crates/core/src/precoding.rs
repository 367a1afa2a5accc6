//! Two-stage JSDM precoding at a macro BS.
//!
//! The first stage `B_g` is built from long-term statistics only: each
//! group's dominant eigenspace is projected onto the orthogonal complement of
//! the other groups' dominant eigenspaces and the leading left singular
//! vectors of the projected factor `(I - E E^H) U_g Lambda_g^{1/2}` are kept.
//! This nulls inter-group interference and makes `B_g^H R_g B_g` diagonal,
//! so the normalised effective channel `C^-1 B^H h` has i.i.d. `CN(0, 1)`
//! entries. The second stage is per-group zero forcing on the normalised
//! effective channels.

use nalgebra::SVD;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{draw_channel, group_model, CMatrix, CVector, GroupChannelModel};
use crate::config::{BeamNorm, NetworkConfig};
use crate::error::{Error, Result};

/// Relative singular-value threshold below which a direction is treated as null.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecodingMode {
    /// Zero-forcing second stage.
    ZeroForcing,
    /// Stream `k` is sent on first-stage beam `k` directly.
    NoSecondStage,
}

/// Left singular vectors with their singular values, sorted descending.
fn sorted_left_singular(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Orthonormal basis of the column span of `a`.
fn range_basis(a: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let (values, vectors) = sorted_left_singular(a);
    let top = values.first().copied().unwrap_or(0.0);
    let rank = values.iter().filter(|&&s| s > RANK_TOL * top).count();
    vectors.columns(0, rank).into_owned()
}

/// First-stage matrices `B_g` (`M x beams[g]`, orthonormal columns).
///
/// `subspace_cap` limits how many dominant eigenvectors of every other
/// group are nulled.
pub fn build_first_stage(
    models: &[GroupChannelModel],
    beams: &[usize],
    subspace_cap: Option<usize>,
) -> Result<Vec<CMatrix>> {
    assert_eq!(models.len(), beams.len(), "one beam count per group");
    let m = models.first().map(|g| g.num_antennas()).unwrap_or(0);
    let mut out = Vec::with_capacity(models.len());
    for (g, model) in models.iter().enumerate() {
        let b = beams[g];
        if b > model.effective_rank {
            return Err(Error::InfeasibleFirstStage {
                group: g,
                reason: format!("B_g = {b} exceeds the effective rank {}", model.effective_rank),
            });
        }
        let other_cols: Vec<CVector> = models
            .iter()
            .enumerate()
            .filter(|(h, _)| *h != g)
            .flat_map(|(_, other)| {
                let keep = subspace_cap.map_or(other.effective_rank, |c| c.min(other.effective_rank));
                (0..keep).map(move |j| other.eigenvectors.column(j).into_owned())
            })
            .collect();
        if other_cols.len() + b > m {
            return Err(Error::InfeasibleFirstStage {
                group: g,
                reason: format!(
                    "{} nulled directions leave no room for {b} beams in {m} antennas",
                    other_cols.len()
                ),
            });
        }
        let basis = if other_cols.is_empty() {
            CMatrix::zeros(m, 0)
        } else {
            range_basis(&CMatrix::from_columns(&other_cols))
        };
        let factor = model.scaled_eigenvectors();
        let projected = &factor - &basis * (basis.adjoint() * &factor);
        let (values, vectors) = sorted_left_singular(&projected);
        let top = values.first().copied().unwrap_or(0.0);
        if values.len() < b || !(values[b - 1] > RANK_TOL.sqrt() * top) || top == 0.0 {
            return Err(Error::InfeasibleFirstStage {
                group: g,
                reason: "null space of the other groups carries too little of this group's energy"
                    .into(),
            });
        }
        out.push(vectors.columns(0, b).into_owned());
    }
    Ok(out)
}

/// Norm `||C^-1 B^H||`.
pub fn matrix_norm(a: &CMatrix, kind: BeamNorm) -> f64 {
    match kind {
        BeamNorm::Frobenius => a.norm(),
        BeamNorm::Spectral => {
            let svd = SVD::new(a.clone(), false, false);
            svd.singular_values.iter().cloned().fold(0.0, f64::max)
        }
    }
}

/// Long-term map from a user channel to its normalised effective channel,
/// `h -> C^-1 B^H h / ||C^-1 B^H||`, with `C = diag(diag(V V^H))^{1/2}`
/// and `V = B^H U Lambda^{1/2}`.
#[derive(Debug, Clone)]
pub struct EffectiveChannelMap {
    pub first_stage: CMatrix,
    /// Diagonal of `C`.
    pub normalization: Vec<f64>,
    /// `C^-1 B^H`.
    pub whitening: CMatrix,
    /// `||C^-1 B^H||`.
    pub norm_factor: f64,
}

impl EffectiveChannelMap {
    pub fn new(first_stage: &CMatrix, model: &GroupChannelModel, norm: BeamNorm) -> Result<Self> {
        let v = first_stage.adjoint() * model.scaled_eigenvectors();
        let mut normalization = Vec::with_capacity(v.nrows());
        for i in 0..v.nrows() {
            let d = v.row(i).norm_squared();
            if !(d > 1e-300) {
                return Err(Error::DegenerateBeam { beam: i });
            }
            normalization.push(d.sqrt());
        }
        let mut whitening = first_stage.adjoint();
        for (i, c) in normalization.iter().enumerate() {
            for x in whitening.row_mut(i).iter_mut() {
                *x /= *c;
            }
        }
        let norm_factor = matrix_norm(&whitening, norm);
        Ok(Self {
            first_stage: first_stage.clone(),
            normalization,
            whitening,
            norm_factor,
        })
    }

    /// `C^-1 B^H h`; entries are `CN(0, 1)` for `h` drawn from the group model.
    pub fn whiten(&self, h: &CVector) -> CVector {
        &self.whitening * h
    }

    /// Normalised effective channel.
    pub fn apply(&self, h: &CVector) -> CVector {
        self.whiten(h).unscale(self.norm_factor)
    }

    pub fn norm_factor_sq(&self) -> f64 {
        self.norm_factor * self.norm_factor
    }
}

/// One-shot form: `(h_bar, ||C^-1 B^H||)`.
pub fn normalize_effective_channel(
    first_stage: &CMatrix,
    model: &GroupChannelModel,
    h: &CVector,
    norm: BeamNorm,
) -> Result<(CVector, f64)> {
    let map = EffectiveChannelMap::new(first_stage, model, norm)?;
    Ok((map.apply(h), map.norm_factor))
}

/// Zero-forcing beams for one group: `p_k` is the unit-norm projection of
/// `h_bar_k` onto the orthogonal complement of the other users' channels.
pub fn zf_second_stage(effective_channels: &[CVector]) -> Result<Vec<CVector>> {
    let k_users = effective_channels.len();
    let mut beams = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let own = &effective_channels[k];
        let others: Vec<CVector> = effective_channels
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, h)| h.clone())
            .collect();
        let residual = if others.is_empty() {
            own.clone()
        } else {
            let stacked = CMatrix::from_columns(&others);
            let (values, vectors) = sorted_left_singular(&stacked);
            let top = values.first().copied().unwrap_or(0.0);
            let rank = values.iter().filter(|&&s| s > RANK_TOL * top).count();
            if rank < others.len() {
                return Err(Error::RankDeficient { user: k });
            }
            let q = vectors.columns(0, rank);
            own - q * (q.adjoint() * own)
        };
        let norm = residual.norm();
        if !(norm > RANK_TOL * own.norm()) || norm == 0.0 {
            return Err(Error::RankDeficient { user: k });
        }
        beams.push(residual.unscale(norm));
    }
    Ok(beams)
}

/// Long-term precoding state of a macro BS: per-group channel models, first
/// stages and effective-channel maps. Built once per configuration.
#[derive(Debug, Clone)]
pub struct JsdmSystem {
    pub models: Vec<GroupChannelModel>,
    pub maps: Vec<EffectiveChannelMap>,
    pub users: Vec<usize>,
    /// Probability that the typical user belongs to each group.
    pub weights: Vec<f64>,
}

impl JsdmSystem {
    pub fn build(cfg: &NetworkConfig) -> Result<Self> {
        let models = cfg
            .groups
            .iter()
            .map(|g| group_model(&g.geometry, cfg.engine.energy_fraction))
            .collect::<Result<Vec<_>>>()?;
        let beams: Vec<usize> = cfg.groups.iter().map(|g| g.beams).collect();
        let first = build_first_stage(&models, &beams, cfg.engine.subspace_cap)?;
        let maps = first
            .iter()
            .zip(&models)
            .map(|(b, m)| EffectiveChannelMap::new(b, m, cfg.engine.beam_norm))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            models,
            maps,
            users: cfg.groups.iter().map(|g| g.users).collect(),
            weights: cfg.group_weights(),
        })
    }

    pub fn num_groups(&self) -> usize {
        self.models.len()
    }

    /// `||C_g^-1 B_g^H||^2` per group.
    pub fn norm_factors_sq(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.norm_factor_sq()).collect()
    }

    /// Largest `||U_{g'}^H B_g||_2` over ordered pairs `g != g'`.
    pub fn max_subspace_leakage(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (g, map) in self.maps.iter().enumerate() {
            for (h, model) in self.models.iter().enumerate() {
                if g != h {
                    let cross = model.eigenvectors.adjoint() * &map.first_stage;
                    worst = worst.max(matrix_norm(&cross, BeamNorm::Spectral));
                }
            }
        }
        worst
    }

    /// Draws a group index with the user-count weights.
    pub fn sample_group<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (g, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return g;
            }
        }
        self.weights.len() - 1
    }

    /// Draws every user's channel and builds both precoding stages.
    pub fn precode<R: Rng + ?Sized>(&self, mode: PrecodingMode, rng: &mut R) -> Result<PrecoderSet> {
        let mut channels = Vec::with_capacity(self.num_groups());
        let mut effective = Vec::with_capacity(self.num_groups());
        let mut beams = Vec::with_capacity(self.num_groups());
        for (g, model) in self.models.iter().enumerate() {
            let hs: Vec<CVector> = (0..self.users[g]).map(|_| draw_channel(model, rng)).collect();
            let hbar: Vec<CVector> = hs.iter().map(|h| self.maps[g].apply(h)).collect();
            let p = match mode {
                PrecodingMode::ZeroForcing => zf_second_stage(&hbar)?,
                PrecodingMode::NoSecondStage => {
                    let dim = self.maps[g].first_stage.ncols();
                    (0..self.users[g])
                        .map(|k| {
                            let mut e = CVector::zeros(dim);
                            e[k] = Complex64::new(1.0, 0.0);
                            e
                        })
                        .collect()
                }
            };
            channels.push(hs);
            effective.push(hbar);
            beams.push(p);
        }
        Ok(PrecoderSet {
            channels,
            effective_channels: effective,
            beams,
            first_stage: self.maps.iter().map(|m| m.first_stage.clone()).collect(),
            norm_factors: self.maps.iter().map(|m| m.norm_factor).collect(),
        })
    }

    /// `|h_bar^H p|^2` seen by a non-served user from an interfering macro
    /// BS that zero-forces its own users of a random group.
    pub fn interferer_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let g = self.sample_group(rng);
        let set = self.precode(PrecodingMode::ZeroForcing, rng)?;
        let stray = self.maps[g].apply(&draw_channel(&self.models[g], rng));
        Ok(stray.dotc(&set.beams[g][0]).norm_sqr())
    }
}

/// Instantaneous precoders of one macro BS for one drop.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    /// Full channels `h_{gk}`.
    pub channels: Vec<Vec<CVector>>,
    /// Normalised effective channels `h_bar_{gk}`.
    pub effective_channels: Vec<Vec<CVector>>,
    /// Second-stage columns `p_{gk}` (unit norm).
    pub beams: Vec<Vec<CVector>>,
    pub first_stage: Vec<CMatrix>,
    pub norm_factors: Vec<f64>,
}

impl PrecoderSet {
    /// `|h_bar_{g,user}^H p_{g,stream}|^2`.
    pub fn gain(&self, group: usize, user: usize, stream: usize) -> f64 {
        self.effective_channels[group][user]
            .dotc(&self.beams[group][stream])
            .norm_sqr()
    }

    /// Sum of `|h_bar_{g,user}^H p_{g,k'}|^2` over the other streams of the group.
    pub fn intra_group_leakage(&self, group: usize, user: usize) -> f64 {
        (0..self.beams[group].len())
            .filter(|&k| k != user)
            .map(|k| self.gain(group, user, k))
            .sum()
    }

    /// `sum_{g' != g} ||h_{g,user}^H B_{g'} P_{g'}||^2`.
    pub fn inter_group_leakage(&self, group: usize, user: usize) -> f64 {
        let h = &self.channels[group][user];
        let mut total = 0.0;
        for (g, b) in self.first_stage.iter().enumerate() {
            if g == group {
                continue;
            }
            let through = b.adjoint() * h;
            for p in &self.beams[g] {
                total += through.dotc(p).norm_sqr();
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::eigendecompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(m: usize, i: usize) -> CVector {
        let mut e = CVector::zeros(m);
        e[i] = Complex64::new(1.0, 0.0);
        e
    }

    fn diag_model(m: usize, entries: &[(usize, f64)]) -> GroupChannelModel {
        let mut r = CMatrix::zeros(m, m);
        for &(i, l) in entries {
            r[(i, i)] = Complex64::new(l, 0.0);
        }
        eigendecompose(&r, 1.0).unwrap()
    }

    #[test]
    fn single_group_keeps_dominant_eigenvectors() {
        let model = diag_model(6, &[(0, 3.0), (2, 2.0), (4, 1.0)]);
        let b = build_first_stage(&[model.clone()], &[2], None).unwrap();
        for j in 0..2 {
            let overlap = b[0].column(j).dotc(&model.eigenvectors.column(j)).norm();
            assert!((overlap - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_groups_are_untouched() {
        let g1 = diag_model(6, &[(0, 2.0), (1, 1.0)]);
        let g2 = diag_model(6, &[(3, 2.0), (4, 1.0)]);
        let b = build_first_stage(&[g1.clone(), g2.clone()], &[2, 2], None).unwrap();
        for j in 0..2 {
            assert!((b[0].column(j).dotc(&g1.eigenvectors.column(j)).norm() - 1.0).abs() < 1e-12);
            assert!((b[1].column(j).dotc(&g2.eigenvectors.column(j)).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_small_null_space_names_group() {
        let g1 = diag_model(3, &[(0, 1.0), (1, 1.0)]);
        let g2 = diag_model(3, &[(1, 1.0), (2, 1.0)]);
        match build_first_stage(&[g1, g2], &[2, 2], None) {
            Err(Error::InfeasibleFirstStage { group, .. }) => assert_eq!(group, 0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn identity_normalization() {
        let model = diag_model(4, &[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        let b = model.eigenvectors.clone();
        let h = CVector::from_fn(4, |i, _| Complex64::new(i as f64, 1.0));
        let (hbar, nf) = normalize_effective_channel(&b, &model, &h, BeamNorm::Frobenius).unwrap();
        assert!((nf - 2.0).abs() < 1e-12);
        let expected = (b.adjoint() * &h).unscale(2.0);
        assert!((hbar - expected).norm() < 1e-12);
        let scaled = normalize_effective_channel(&b, &model, &(h.scale(3.0)), BeamNorm::Frobenius)
            .unwrap()
            .0;
        let base = normalize_effective_channel(&b, &model, &h, BeamNorm::Frobenius).unwrap().0;
        assert!((scaled.norm() - 3.0 * base.norm()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_beam_detected() {
        let model = diag_model(4, &[(0, 1.0)]);
        let b = CMatrix::from_columns(&[unit(4, 2)]);
        assert!(matches!(
            EffectiveChannelMap::new(&b, &model, BeamNorm::Frobenius),
            Err(Error::DegenerateBeam { beam: 0 })
        ));
    }

    #[test]
    fn zf_single_user_is_matched_filter() {
        let h = CVector::from_fn(3, |i, _| Complex64::new(1.0 + i as f64, -0.5));
        let p = zf_second_stage(&[h.clone()]).unwrap();
        assert!((p[0].clone() - h.unscale(h.norm())).norm() < 1e-14);
        assert!((h.dotc(&p[0]).norm() - h.norm()).abs() < 1e-12);
    }

    #[test]
    fn zf_orthogonal_channels_unchanged() {
        let hs = vec![unit(4, 0).scale(2.0), unit(4, 1).scale(0.5)];
        let p = zf_second_stage(&hs).unwrap();
        assert!((p[0].clone() - unit(4, 0)).norm() < 1e-14);
        assert!((p[1].clone() - unit(4, 1)).norm() < 1e-14);
    }

    #[test]
    fn zf_rank_deficiency_names_user() {
        let a = unit(3, 0);
        let hs = vec![a.clone(), a.scale(2.0), unit(3, 1)];
        assert!(matches!(zf_second_stage(&hs), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn zf_nulls_cross_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hs: Vec<CVector> = (0..4)
            .map(|_| CVector::from_fn(8, |_, _| crate::channel::complex_gaussian(&mut rng)))
            .collect();
        let p = zf_second_stage(&hs).unwrap();
        for k in 0..4 {
            assert!((p[k].norm() - 1.0).abs() < 1e-12);
            for j in 0..4 {
                if j != k {
                    assert!(hs[j].dotc(&p[k]).norm() < 1e-10);
                }
            }
        }
    }
}
