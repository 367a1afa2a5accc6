mod common;

use common::{ks_critical_1pct, ks_statistic};
use jsdm_hetnet::geometry::{
    associate, nearest_distance_cdf, pico_preferred, sample_realization, Association, BaseStation, NetworkRealization,
    Tier,
};
use jsdm_hetnet::NetworkConfig;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn mean_counts_match_poisson_means() {
    let cfg = NetworkConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 20_000;
    let (mut m, mut s) = (0usize, 0usize);
    for _ in 0..n {
        let r = sample_realization(&cfg, &mut rng);
        m += r.macros.len();
        s += r.picos.len();
    }
    for (total, mean) in [(m, cfg.macro_tier.mean_count()), (s, cfg.pico_tier.mean_count())] {
        let est = total as f64 / n as f64;
        let se = (mean / n as f64).sqrt();
        assert!((est - mean).abs() < 3.0 * se, "{est} vs {mean}");
    }
}

#[test]
fn nearest_distance_follows_truncated_law() {
    // conditioned on at least one point in the disc
    let cfg = NetworkConfig::default();
    let tier = cfg.pico_tier;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut d = Vec::new();
    while d.len() < 10_000 {
        let r = sample_realization(&cfg, &mut rng);
        if let Some((_, bs)) = r.nearest(Tier::Pico) {
            d.push(bs.distance);
        }
    }
    let norm = nearest_distance_cdf(&tier, tier.disc_radius);
    let n = d.len();
    let stat = ks_statistic(d, |x| nearest_distance_cdf(&tier, x) / norm);
    assert!(stat < ks_critical_1pct(n), "KS {stat}");
}

#[test]
fn no_bs_probability() {
    let cfg = NetworkConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 50_000;
    let empty = (0..n)
        .filter(|_| associate(&sample_realization(&cfg, &mut rng), &cfg) == Association::NoBs)
        .count();
    let p = cfg.macro_tier.empty_probability() * cfg.pico_tier.empty_probability();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((empty as f64 / n as f64 - p).abs() < 3.0 * se);
}

#[test]
fn single_tier_present_wins() {
    let cfg = NetworkConfig::default();
    let r = NetworkRealization {
        macros: vec![],
        picos: vec![BaseStation {
            position: [0.0, 55.0],
            distance: 55.0,
            los: false,
        }],
    };
    assert_eq!(associate(&r, &cfg).tier(), Some(Tier::Pico));
}

proptest! {
    #[test]
    fn realization_invariants(seed in any::<u64>(), ratio in 0.0f64..200.0) {
        let cfg = NetworkConfig::default().with_density_ratio(ratio);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = sample_realization(&cfg, &mut rng);
        for (list, tier) in [(&r.macros, &cfg.macro_tier), (&r.picos, &cfg.pico_tier)] {
            for bs in list {
                prop_assert!(bs.distance >= 0.0 && bs.distance <= tier.disc_radius);
                prop_assert!((bs.distance - bs.position[0].hypot(bs.position[1])).abs() < 1e-12);
                prop_assert_eq!(bs.los, bs.distance < tier.los_radius);
            }
        }
        match associate(&r, &cfg) {
            Association::NoBs => prop_assert!(r.macros.is_empty() && r.picos.is_empty()),
            Association::Served(link) => {
                let (idx, nearest) = r.nearest(link.tier).unwrap();
                prop_assert_eq!(idx, link.index);
                prop_assert_eq!(nearest.distance, link.distance);
            }
        }
    }

    #[test]
    fn association_is_invariant_to_kappa(
        ps in 0.01f64..100.0, pm in 0.01f64..100.0,
        rs in 0.1f64..60.0, rm in 0.1f64..200.0,
        a_s in 2.0f64..4.0, a_m in 2.0f64..4.0,
        k in -12.0f64..0.0,
    ) {
        let reference = pico_preferred(ps, rs, a_s, pm, rm, a_m, 1.0);
        prop_assert_eq!(pico_preferred(ps, rs, a_s, pm, rm, a_m, 10f64.powf(k)), reference);
    }
}
