//! Poisson drops of the two tiers on discs around the typical user, LOS-ball
//! blockage and max-received-power cell association.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{NetworkConfig, TierParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Macro,
    Pico,
}

impl Tier {
    pub fn other(self) -> Tier {
        match self {
            Tier::Macro => Tier::Pico,
            Tier::Pico => Tier::Macro,
        }
    }
}

/// A base station of one drop, positioned relative to the typical user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation {
    pub position: [f64; 2],
    pub distance: f64,
    pub los: bool,
}

impl BaseStation {
    fn at(position: [f64; 2], tier: &TierParams) -> Self {
        let distance = position[0].hypot(position[1]);
        Self {
            position,
            distance,
            los: tier.is_los(distance),
        }
    }
}

/// One realization of both tiers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkRealization {
    pub macros: Vec<BaseStation>,
    pub picos: Vec<BaseStation>,
}

impl NetworkRealization {
    pub fn nearest(&self, tier: Tier) -> Option<(usize, &BaseStation)> {
        let list = match tier {
            Tier::Macro => &self.macros,
            Tier::Pico => &self.picos,
        };
        list.iter()
            .enumerate()
            .min_by(|a, b| a.1.distance.total_cmp(&b.1.distance))
    }
}

/// Draws the BSs of one tier: a Poisson number with mean
/// `density * pi * radius^2`, placed uniformly on the disc.
pub fn sample_tier<R: Rng + ?Sized>(tier: &TierParams, rng: &mut R) -> Vec<BaseStation> {
    let mean = tier.mean_count();
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..n)
        .map(|_| {
            // inverse CDF of the radius: P(d <= x) = (x / radius)^2
            let d = tier.disc_radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            BaseStation::at([d * phi.cos(), d * phi.sin()], tier)
        })
        .collect()
}

/// Samples both tiers from a single stream, macro tier first.
pub fn sample_realization<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> NetworkRealization {
    let macros = sample_tier(&cfg.macro_tier, rng);
    let picos = sample_tier(&cfg.pico_tier, rng);
    NetworkRealization { macros, picos }
}

/// Density of the distance to the nearest point of an unbounded PPP,
/// `2 lambda pi d exp(-lambda pi d^2)`.
pub fn nearest_distance_pdf(tier: &TierParams, d: f64) -> f64 {
    let l = tier.density;
    2.0 * l * PI * d * (-l * PI * d * d).exp()
}

/// `P(nearest <= d) = 1 - exp(-lambda pi d^2)`, valid on the tier's disc.
pub fn nearest_distance_cdf(tier: &TierParams, d: f64) -> f64 {
    -(-tier.density * PI * d * d).exp_m1()
}

/// Probability mass of the nearest-distance law on `[a, b]`.
pub fn nearest_distance_mass(tier: &TierParams, a: f64, b: f64) -> f64 {
    let l = tier.density * PI;
    (-l * a * a).exp() - (-l * b * b).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingLink {
    pub tier: Tier,
    /// Index into the tier's BS list.
    pub index: usize,
    pub distance: f64,
    /// Path-loss exponent of the serving link (LOS or NLOS by its own ball).
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Association {
    NoBs,
    Served(ServingLink),
}

impl Association {
    pub fn serving(&self) -> Option<&ServingLink> {
        match self {
            Association::NoBs => None,
            Association::Served(link) => Some(link),
        }
    }

    pub fn tier(&self) -> Option<Tier> {
        self.serving().map(|l| l.tier)
    }
}

/// `P_s kappa^2 r_s^-a_s >= P_m kappa^2 r_m^-a_m`, evaluated without
/// forming `r^-a` so that zero distances are well defined.
pub fn pico_preferred(
    pico_power: f64,
    pico_distance: f64,
    pico_alpha: f64,
    macro_power: f64,
    macro_distance: f64,
    macro_alpha: f64,
    kappa_sq: f64,
) -> bool {
    pico_power * kappa_sq * macro_distance.powf(macro_alpha)
        >= macro_power * kappa_sq * pico_distance.powf(pico_alpha)
}

/// Max-received-power association between the nearest BS of each tier.
/// Ties go to the pico tier.
pub fn associate(realization: &NetworkRealization, cfg: &NetworkConfig) -> Association {
    let link = |tier: Tier, (index, bs): (usize, &BaseStation)| {
        let params = match tier {
            Tier::Macro => &cfg.macro_tier,
            Tier::Pico => &cfg.pico_tier,
        };
        ServingLink {
            tier,
            index,
            distance: bs.distance,
            alpha: params.alpha_at(bs.distance),
        }
    };
    let m = realization.nearest(Tier::Macro).map(|x| link(Tier::Macro, x));
    let s = realization.nearest(Tier::Pico).map(|x| link(Tier::Pico, x));
    match (m, s) {
        (None, None) => Association::NoBs,
        (Some(m), None) => Association::Served(m),
        (None, Some(s)) => Association::Served(s),
        (Some(m), Some(s)) => {
            let pico = pico_preferred(
                cfg.pico_power(),
                s.distance,
                s.alpha,
                cfg.macro_power(),
                m.distance,
                m.alpha,
                cfg.kappa_sq(),
            );
            Association::Served(if pico { s } else { m })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gk;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(d: f64, tier: &TierParams) -> BaseStation {
        BaseStation::at([d, 0.0], tier)
    }

    #[test]
    fn mean_count_matches_table_values() {
        let cfg = NetworkConfig::default();
        assert_relative_eq!(cfg.macro_tier.mean_count(), 1.2566, max_relative = 1e-4);
    }

    #[test]
    fn disabled_tier_is_empty() {
        let cfg = NetworkConfig::default().one_tier();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            assert!(sample_realization(&cfg, &mut rng).picos.is_empty());
        }
    }

    #[test]
    fn los_flag_follows_ball() {
        let cfg = NetworkConfig::default();
        assert!(bs(10.0, &cfg.macro_tier).los);
        assert!(!bs(25.0, &cfg.macro_tier).los);
    }

    #[test]
    fn sampled_points_lie_in_disc() {
        let cfg = NetworkConfig::default().with_density_ratio(100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = sample_realization(&cfg, &mut rng);
        for b in &r.picos {
            assert!(b.distance <= cfg.pico_tier.disc_radius);
            assert_relative_eq!(b.distance, b.position[0].hypot(b.position[1]));
            assert_eq!(b.los, b.distance < cfg.pico_tier.los_radius);
        }
    }

    #[test]
    fn nearest_pdf_values() {
        let cfg = NetworkConfig::default();
        assert_eq!(nearest_distance_pdf(&cfg.macro_tier, 0.0), 0.0);
        let expected = 2.0 * PI * 1e-3 * (-0.1 * PI).exp();
        assert_relative_eq!(nearest_distance_pdf(&cfg.macro_tier, 100.0), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 4.588e-3, max_relative = 1e-3);
        let total = adaptive_gk(|d| nearest_distance_pdf(&cfg.macro_tier, d), 0.0, 5000.0, 1e-10, 0.0)
            .unwrap();
        assert_relative_eq!(total, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn association_prefers_strong_pico() {
        // macro at 50 m (NLOS), pico at 10 m (LOS), P_m / P_s = 100
        let mut cfg = NetworkConfig::default();
        cfg.macro_tier.tx_power = 100.0 * cfg.total_streams as f64;
        cfg.pico_tier.tx_power = 1.0;
        let r = NetworkRealization {
            macros: vec![bs(50.0, &cfg.macro_tier)],
            picos: vec![bs(10.0, &cfg.pico_tier)],
        };
        let ratio = (1.0 / 100.0) * (50.0f64 / 10.0).powi(4);
        assert_relative_eq!(ratio, 6.25, max_relative = 1e-12);
        assert_eq!(associate(&r, &cfg).tier(), Some(Tier::Pico));
    }

    #[test]
    fn empty_and_single_tier_association() {
        let cfg = NetworkConfig::default();
        assert_eq!(associate(&NetworkRealization::default(), &cfg), Association::NoBs);
        let r = NetworkRealization {
            macros: vec![bs(190.0, &cfg.macro_tier), bs(120.0, &cfg.macro_tier)],
            picos: vec![],
        };
        let a = associate(&r, &cfg);
        let link = a.serving().unwrap();
        assert_eq!(link.tier, Tier::Macro);
        assert_eq!(link.index, 1);
        assert_eq!(link.distance, 120.0);
    }

    #[test]
    fn equal_received_power_goes_to_pico() {
        assert!(pico_preferred(1.0, 30.0, 4.0, 1.0, 30.0, 4.0, 1e-7));
        assert!(!pico_preferred(1.0, 30.0 + 1e-9, 4.0, 1.0, 30.0, 4.0, 1e-7));
    }
}
