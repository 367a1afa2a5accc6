//! Semi-analytical outage: conditional per-user outage with interference
//! Laplace transforms, and the total outage over association regions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{db_to_linear, NetworkConfig, RadialDensity, TierParams};
use crate::error::{Error, Result};
use crate::geometry::{nearest_distance_pdf, Tier};
use crate::precoding::JsdmSystem;
use crate::quadrature::adaptive_gk;
use crate::regions::{marginal_ranges, LinkCase, ServingProfile};

/// Relative tolerance of every Laplace-transform integral.
pub const LAPLACE_REL_TOL: f64 = 1e-6;
const OUTAGE_ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutageMode {
    /// Noise plus interference.
    Sinr,
    /// Interference dropped.
    NoiseLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    OneTier,
    TwoTier,
}

impl Scenario {
    pub fn apply(self, cfg: &NetworkConfig) -> NetworkConfig {
        match self {
            Scenario::OneTier => cfg.one_tier(),
            Scenario::TwoTier => cfg.clone(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::OneTier => "one_tier",
            Scenario::TwoTier => "two_tier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    AnalyticSinr,
    AnalyticSnr,
    Simulated,
}

fn tier_params(cfg: &NetworkConfig, tier: Tier) -> &TierParams {
    match tier {
        Tier::Macro => &cfg.macro_tier,
        Tier::Pico => &cfg.pico_tier,
    }
}

fn tier_power(cfg: &NetworkConfig, tier: Tier) -> f64 {
    match tier {
        Tier::Macro => cfg.macro_power(),
        Tier::Pico => cfg.pico_power(),
    }
}

/// `N0 ||C^-1 B^H||^2 / (P_m kappa^2)`.
pub fn xi_macro(cfg: &NetworkConfig, norm_factor_sq: f64) -> f64 {
    cfg.noise_power() * norm_factor_sq / (cfg.macro_power() * cfg.kappa_sq())
}

/// `N0 / (P_s kappa^2)`.
pub fn xi_pico(cfg: &NetworkConfig) -> f64 {
    cfg.noise_power() / (cfg.pico_power() * cfg.kappa_sq())
}

/// Conditional outage query of a user at serving distance `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    /// Linear SINR threshold `T`.
    pub threshold: f64,
    pub serving_distance: f64,
    pub serving_alpha: f64,
    pub tier: Tier,
    pub xi: f64,
    /// Outer limits of the macro and pico interference integrals.
    pub upper_bounds: [f64; 2],
}

impl OutageQuery {
    /// Query with both upper bounds at the tier disc radii.
    pub fn new(cfg: &NetworkConfig, tier: Tier, distance: f64, alpha: f64, threshold: f64, xi: f64) -> Self {
        Self {
            threshold,
            serving_distance: distance,
            serving_alpha: alpha,
            tier,
            xi,
            upper_bounds: [cfg.macro_tier.disc_radius, cfg.pico_tier.disc_radius],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::Invalid(format!("threshold {} must be positive", self.threshold)));
        }
        if !(self.xi > 0.0) {
            return Err(Error::Invalid(format!("xi {} must be positive", self.xi)));
        }
        if !(self.serving_distance >= 0.0) {
            return Err(Error::Invalid("negative serving distance".into()));
        }
        Ok(())
    }

    /// Laplace variable `s = xi d^a T / N0`, in 1/W.
    pub fn laplace_variable(&self, noise: f64) -> f64 {
        self.xi * self.serving_distance.powf(self.serving_alpha) * self.threshold / noise
    }

    fn upper_bound(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.upper_bounds[0],
            Tier::Pico => self.upper_bounds[1],
        }
    }
}

/// `E[exp(-s I)]` of the interference from `interferer` beyond the serving
/// distance, with unit-mean exponential fading and the serving exponent:
/// `exp(-int_d^Re 2 pi lambda g(x) (1 - 1 / (1 + s P kappa^2 x^-a)) dx)`.
pub fn laplace_interference(interferer: Tier, query: &OutageQuery, cfg: &NetworkConfig) -> Result<f64> {
    query.validate()?;
    let tier = tier_params(cfg, interferer);
    let upper = query.upper_bound(interferer);
    let d = query.serving_distance;
    if !tier.is_enabled() || upper <= d {
        return Ok(1.0);
    }
    let alpha = query.serving_alpha;
    let c = query.laplace_variable(cfg.noise_power()) * tier_power(cfg, interferer) * cfg.kappa_sq();
    if c == 0.0 {
        return Ok(1.0);
    }
    let radial = cfg.engine.radial_density;
    let lambda = tier.density;
    let integrand = |x: f64| {
        let g = match radial {
            RadialDensity::Campbell => x,
            RadialDensity::AsWritten => alpha * x.powf(alpha),
        };
        2.0 * PI * lambda * g * c / (x.powf(alpha) + c)
    };
    let exponent = adaptive_gk(integrand, d, upper, LAPLACE_REL_TOL, 1e-300)?;
    Ok((-exponent).exp())
}

/// `1 - exp(-xi d^a T) L_A L_B`. With `other_tier` false only the serving
/// tier's interference enters; noise-limited mode drops both factors.
pub fn user_outage(query: &OutageQuery, cfg: &NetworkConfig, mode: OutageMode, other_tier: bool) -> Result<f64> {
    query.validate()?;
    let noise_term = (-query.xi * query.serving_distance.powf(query.serving_alpha) * query.threshold).exp();
    if noise_term == 0.0 {
        return Ok(1.0);
    }
    let mut success = noise_term;
    if mode == OutageMode::Sinr {
        success *= laplace_interference(query.tier, query, cfg)?;
        if other_tier {
            success *= laplace_interference(query.tier.other(), query, cfg)?;
        }
    }
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// `P_tout,0`, `P_tout,1` (macro-served) and `P_tout,2` (pico-served).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutageComponents {
    pub no_bs: f64,
    pub macro_served: f64,
    pub pico_served: f64,
    pub total: f64,
}

/// Long-term constants of a configuration and the precomputed region
/// profiles; evaluates outage at any threshold.
#[derive(Debug, Clone)]
pub struct AnalyticEngine {
    cfg: NetworkConfig,
    /// `xi_m` per user group.
    xi_macro: Vec<f64>,
    weights: Vec<f64>,
    xi_pico: f64,
    profiles: Vec<ServingProfile>,
}

impl AnalyticEngine {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        let system = JsdmSystem::build(cfg)?;
        Self::with_system(cfg, &system)
    }

    /// Reuses precoding state already built for `cfg`.
    pub fn with_system(cfg: &NetworkConfig, system: &JsdmSystem) -> Result<Self> {
        let xi_macro = system.norm_factors_sq().into_iter().map(|n| xi_macro(cfg, n)).collect();
        let mut profiles = Vec::new();
        if cfg.macro_tier.is_enabled() && cfg.pico_tier.is_enabled() {
            for case in LinkCase::ALL {
                for tier in [Tier::Macro, Tier::Pico] {
                    profiles.push(ServingProfile::new(case, tier, cfg)?);
                }
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            xi_macro,
            weights: system.weights.clone(),
            xi_pico: xi_pico(cfg),
            profiles,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn xi_macro(&self) -> &[f64] {
        &self.xi_macro
    }

    pub fn xi_pico(&self) -> f64 {
        self.xi_pico
    }

    /// Conditional outage of a user served by `tier` at `distance`. For a
    /// macro-served user this averages over the user's group.
    pub fn user_outage(
        &self,
        tier: Tier,
        distance: f64,
        alpha: f64,
        threshold: f64,
        mode: OutageMode,
        other_tier: bool,
    ) -> Result<f64> {
        match tier {
            Tier::Pico => {
                let q = OutageQuery::new(&self.cfg, tier, distance, alpha, threshold, self.xi_pico);
                user_outage(&q, &self.cfg, mode, other_tier)
            }
            Tier::Macro => {
                let mut total = 0.0;
                for (xi, w) in self.xi_macro.iter().zip(&self.weights) {
                    if *w == 0.0 {
                        continue;
                    }
                    let q = OutageQuery::new(&self.cfg, tier, distance, alpha, threshold, *xi);
                    total += w * user_outage(&q, &self.cfg, mode, other_tier)?;
                }
                Ok(total)
            }
        }
    }

    fn single_tier_term(&self, tier: Tier, threshold: f64, mode: OutageMode) -> Result<f64> {
        let (own, other) = match tier {
            Tier::Macro => (&self.cfg.macro_tier, &self.cfg.pico_tier),
            Tier::Pico => (&self.cfg.pico_tier, &self.cfg.macro_tier),
        };
        if !own.is_enabled() {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        for seg in marginal_ranges(&self.cfg, tier) {
            let [lo, hi] = seg.interval;
            if hi <= lo {
                continue;
            }
            let alpha = if seg.los { own.alpha_los } else { own.alpha_nlos };
            let mut err = None;
            let v = adaptive_gk(
                |d| match self.user_outage(tier, d, alpha, threshold, mode, false) {
                    Ok(p) => p * nearest_distance_pdf(own, d),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                1e-7,
                1e-12,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            sum += v;
        }
        Ok(other.empty_probability() * sum)
    }

    fn region_term(&self, profile: &ServingProfile, threshold: f64, mode: OutageMode) -> Result<f64> {
        let tier = profile.tier();
        let alpha = match tier {
            Tier::Macro => self.cfg.macro_tier.alpha_at_case(profile.case().macro_los()),
            Tier::Pico => self.cfg.pico_tier.alpha_at_case(profile.case().pico_los()),
        };
        let mut err = None;
        let v = profile.integrate(
            |d| match self.user_outage(tier, d, alpha, threshold, mode, true) {
                Ok(p) => p,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            self.cfg.engine.region_rel_tol,
            OUTAGE_ABS_TOL,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Total outage at a linear threshold.
    pub fn total_outage(&self, threshold: f64, mode: OutageMode) -> Result<OutageComponents> {
        if !(threshold > 0.0) {
            return Err(Error::Invalid(format!("threshold {threshold} must be positive")));
        }
        let (m, s) = (&self.cfg.macro_tier, &self.cfg.pico_tier);
        let no_bs = m.empty_probability() * s.empty_probability();
        let mut macro_served = self.single_tier_term(Tier::Macro, threshold, mode)?;
        let mut pico_served = self.single_tier_term(Tier::Pico, threshold, mode)?;
        for p in &self.profiles {
            let v = self.region_term(p, threshold, mode)?;
            match p.tier() {
                Tier::Macro => macro_served += v,
                Tier::Pico => pico_served += v,
            }
        }
        let total = if self.cfg.engine.include_no_bs {
            no_bs + macro_served + pico_served
        } else {
            (macro_served + pico_served) / (1.0 - no_bs)
        };
        Ok(OutageComponents {
            no_bs,
            macro_served,
            pico_served,
            total: total.clamp(0.0, 1.0),
        })
    }

    /// Mass of each association outcome: `(no BS, macro, pico)`.
    pub fn association_probabilities(&self) -> Result<[f64; 3]> {
        let (m, s) = (&self.cfg.macro_tier, &self.cfg.pico_tier);
        let mut macro_p = if m.is_enabled() {
            -(-m.mean_count()).exp_m1() * s.empty_probability()
        } else {
            0.0
        };
        let mut pico_p = if s.is_enabled() {
            -(-s.mean_count()).exp_m1() * m.empty_probability()
        } else {
            0.0
        };
        for p in &self.profiles {
            let v = p.integrate(|_| 1.0, 1e-10, 1e-14)?;
            match p.tier() {
                Tier::Macro => macro_p += v,
                Tier::Pico => pico_p += v,
            }
        }
        Ok([m.empty_probability() * s.empty_probability(), macro_p, pico_p])
    }

    /// Outage over a dB grid; thresholds are evaluated in parallel.
    pub fn outage_curve(&self, thresholds_db: &[f64], mode: OutageMode, scenario: Scenario) -> Result<OutageCurve> {
        if thresholds_db.is_empty() {
            return Err(Error::Invalid("empty threshold grid".into()));
        }
        let components = thresholds_db
            .par_iter()
            .map(|&t| self.total_outage(db_to_linear(t), mode))
            .collect::<Result<Vec<_>>>()?;
        let mut values: Vec<f64> = components.iter().map(|c| c.total).collect();
        enforce_monotone(thresholds_db, &mut values, 1e-6)?;
        Ok(OutageCurve {
            thresholds_db: thresholds_db.to_vec(),
            values,
            source: match mode {
                OutageMode::Sinr => CurveSource::AnalyticSinr,
                OutageMode::NoiseLimited => CurveSource::AnalyticSnr,
            },
            scenario,
            components: Some(components),
        })
    }
}

/// Fails on a drop larger than `tol` between consecutive values and removes
/// smaller quadrature jitter by a running maximum.
pub(crate) fn enforce_monotone(thresholds_db: &[f64], values: &mut [f64], tol: f64) -> Result<()> {
    for i in 1..values.len() {
        let drop = values[i - 1] - values[i];
        if drop > tol {
            return Err(Error::NonMonotone {
                threshold_db: thresholds_db[i],
                drop,
            });
        }
        if drop > 0.0 {
            values[i] = values[i - 1];
        }
    }
    Ok(())
}

/// Outage probability over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    pub thresholds_db: Vec<f64>,
    pub values: Vec<f64>,
    pub source: CurveSource,
    pub scenario: Scenario,
    pub components: Option<Vec<OutageComponents>>,
}

/// Total outage at a linear threshold for `cfg`.
pub fn total_outage(threshold: f64, cfg: &NetworkConfig, mode: OutageMode) -> Result<OutageComponents> {
    AnalyticEngine::new(cfg)?.total_outage(threshold, mode)
}

/// Analytic curve of a scenario derived from `cfg`.
pub fn outage_curve(
    cfg: &NetworkConfig,
    thresholds_db: &[f64],
    mode: OutageMode,
    scenario: Scenario,
) -> Result<OutageCurve> {
    AnalyticEngine::new(&scenario.apply(cfg))?.outage_curve(thresholds_db, mode, scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{dbm_to_watts, linear_to_db};
    use approx::assert_relative_eq;

    #[test]
    fn no_bs_mass() {
        let cfg = NetworkConfig::default();
        let e = AnalyticEngine::new(&cfg).unwrap();
        let c = e.total_outage(1.0, OutageMode::NoiseLimited).unwrap();
        assert_relative_eq!(c.no_bs, (-0.76 * PI).exp(), max_relative = 1e-12);
        assert_relative_eq!(c.no_bs, 0.0919, max_relative = 1e-3);
        assert!((c.total - (c.no_bs + c.macro_served + c.pico_served)).abs() < 1e-12);
    }

    #[test]
    fn pico_noise_limited_by_hand() {
        let cfg = NetworkConfig::default();
        let n0 = dbm_to_watts(-74.0);
        let ps = dbm_to_watts(33.0);
        let lambda = 2.998e8 / 28e9;
        let kappa_sq = (lambda / (4.0 * PI)).powi(2);
        assert_relative_eq!(kappa_sq, 7.27e-7, max_relative = 2e-3);
        let expected = 1.0 - (-n0 / (ps * kappa_sq) * 20f64.powi(4)).exp();
        let q = OutageQuery::new(&cfg, Tier::Pico, 20.0, 4.0, 1.0, xi_pico(&cfg));
        let got = user_outage(&q, &cfg, OutageMode::NoiseLimited, true).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-3);
    }

    #[test]
    fn laplace_limits() {
        let cfg = NetworkConfig::default();
        let q = OutageQuery::new(&cfg, Tier::Macro, 50.0, 4.0, 1e-12, 1e-3);
        let l = laplace_interference(Tier::Macro, &q, &cfg).unwrap();
        assert!(l <= 1.0 && l > 1.0 - 1e-9);
        let one = cfg.one_tier();
        let q = OutageQuery::new(&one, Tier::Macro, 50.0, 4.0, 10.0, 1e-3);
        assert_eq!(laplace_interference(Tier::Pico, &q, &one).unwrap(), 1.0);
    }

    #[test]
    fn laplace_closed_form_alpha_two() {
        // a = 2: int 2 pi lambda x c / (x^2 + c) dx = pi lambda c ln((U^2 + c) / (d^2 + c))
        let mut cfg = NetworkConfig::default();
        cfg.macro_tier.alpha_los = 2.0;
        cfg.macro_tier.alpha_nlos = 2.0;
        let q = OutageQuery::new(&cfg, Tier::Macro, 30.0, 2.0, 3.0, 2e-4);
        let c = q.laplace_variable(cfg.noise_power()) * cfg.macro_power() * cfg.kappa_sq();
        let l = cfg.macro_tier.density;
        let expected = (-PI * l * c * ((200f64.powi(2) + c) / (30f64.powi(2) + c)).ln()).exp();
        let got = laplace_interference(Tier::Macro, &q, &cfg).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-8);
    }

    #[test]
    fn user_outage_limits() {
        let cfg = NetworkConfig::default();
        let e = AnalyticEngine::new(&cfg).unwrap();
        let hi = e.user_outage(Tier::Macro, 100.0, 4.0, 1e12, OutageMode::Sinr, true).unwrap();
        assert!((hi - 1.0).abs() < 1e-9);
        let lo = e.user_outage(Tier::Pico, 1e-6, 4.0, 1.0, OutageMode::NoiseLimited, true).unwrap();
        assert!(lo < 1e-12);
    }

    #[test]
    fn small_threshold_tends_to_no_bs() {
        let cfg = NetworkConfig::default();
        let e = AnalyticEngine::new(&cfg).unwrap();
        let c = e.total_outage(db_to_linear(-120.0), OutageMode::Sinr).unwrap();
        assert!((c.total - c.no_bs).abs() < 1e-6, "{c:?}");
    }

    #[test]
    fn association_mass_sums_to_one() {
        let e = AnalyticEngine::new(&NetworkConfig::default()).unwrap();
        let p = e.association_probabilities().unwrap();
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn monotone_guard() {
        let t = [0.0, 1.0, 2.0];
        let mut v = [0.1, 0.2, 0.2 - 1e-9];
        enforce_monotone(&t, &mut v, 1e-6).unwrap();
        assert_eq!(v[2], 0.2);
        let mut bad = [0.1, 0.2, 0.1];
        assert!(matches!(
            enforce_monotone(&t, &mut bad, 1e-6),
            Err(Error::NonMonotone { .. })
        ));
        assert_relative_eq!(linear_to_db(db_to_linear(3.0)), 3.0, epsilon = 1e-12);
    }
}
