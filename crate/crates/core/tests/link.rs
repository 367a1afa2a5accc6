use jsdm_hetnet::config::InterferenceMode;
use jsdm_hetnet::geometry::{associate, sample_realization, BaseStation, NetworkRealization, ServingLink, Tier};
use jsdm_hetnet::precoding::{JsdmSystem, PrecodingMode};
use jsdm_hetnet::sinr::{macro_served_sinr, pico_served_sinr};
use jsdm_hetnet::{Error, NetworkConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

fn bs(distance: f64, cfg_los_radius: f64) -> BaseStation {
    BaseStation {
        position: [distance, 0.0],
        distance,
        los: distance < cfg_los_radius,
    }
}

fn pico_link(cfg: &NetworkConfig, index: usize, distance: f64) -> ServingLink {
    ServingLink {
        tier: Tier::Pico,
        index,
        distance,
        alpha: cfg.pico_tier.alpha_at(distance),
    }
}

#[test]
fn lone_pico_has_sinr_equal_to_snr() {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg).unwrap();
    let r = NetworkRealization {
        macros: vec![],
        picos: vec![bs(30.0, cfg.pico_tier.los_radius)],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let b = pico_served_sinr(&r, &pico_link(&cfg, 0, 30.0), &system, &cfg, &mut rng).unwrap();
    assert_eq!(b.sinr, b.snr);
    assert_eq!(b.interference_macro + b.interference_pico, 0.0);
}

#[test]
fn pico_budget_by_hand() {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg).unwrap();
    let (ds, dm, d2) = (20.0, 150.0, 45.0);
    let r = NetworkRealization {
        macros: vec![bs(dm, cfg.macro_tier.los_radius)],
        picos: vec![bs(ds, cfg.pico_tier.los_radius), bs(d2, cfg.pico_tier.los_radius)],
    };
    let link = pico_link(&cfg, 0, ds);
    let b = pico_served_sinr(&r, &link, &system, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();

    // same stream order: serving fading, macro interferer, pico interferer
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (g0, g1, g2): (f64, f64, f64) = (rng.sample(Exp1), rng.sample(Exp1), rng.sample(Exp1));
    let k = cfg.kappa_sq();
    let a = link.alpha;
    let useful = cfg.pico_power() * k * ds.powf(-a) * g0;
    let i3 = cfg.macro_power() * k * dm.powf(-a) * g1;
    let i4 = cfg.pico_power() * k * d2.powf(-a) * g2;
    let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs();
    assert!(rel(b.useful_power, useful));
    assert!(rel(b.interference_macro, i3));
    assert!(rel(b.interference_pico, i4));
    assert!(rel(b.sinr, useful / (cfg.noise_power() + i3 + i4)));
}

#[test]
fn analysis_match_skips_closer_interferers() {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg).unwrap();
    let r = NetworkRealization {
        macros: vec![bs(10.0, cfg.macro_tier.los_radius)],
        picos: vec![bs(40.0, cfg.pico_tier.los_radius)],
    };
    let link = pico_link(&cfg, 0, 40.0);
    let b = pico_served_sinr(&r, &link, &system, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert_eq!(b.interference_macro, 0.0);

    let mut physical = cfg.clone();
    physical.engine.interference_mode = InterferenceMode::Physical;
    let b = pico_served_sinr(&r, &link, &system, &physical, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert!(b.interference_macro > 0.0);
}

#[test]
fn macro_user_needs_precoders() {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg).unwrap();
    let r = NetworkRealization {
        macros: vec![bs(100.0, cfg.macro_tier.los_radius)],
        picos: vec![],
    };
    let link = ServingLink {
        tier: Tier::Macro,
        index: 0,
        distance: 100.0,
        alpha: cfg.macro_tier.alpha_at(100.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let err = macro_served_sinr(&r, &link, None, 0, &system, &cfg, &mut rng).unwrap_err();
    assert!(matches!(err, Error::MissingPrecoder));

    let set = system.precode(PrecodingMode::ZeroForcing, &mut rng).unwrap();
    let b = macro_served_sinr(&r, &link, Some(&set), 1, &system, &cfg, &mut rng).unwrap();
    let expected = cfg.macro_power() * cfg.kappa_sq() * 100f64.powf(-link.alpha) * set.gain(1, 0, 0);
    assert!((b.useful_power - expected).abs() <= 1e-12 * expected);
    // only residual inter-group leakage remains with one macro BS
    assert_eq!(b.interference_pico, 0.0);
    let leak = expected / set.gain(1, 0, 0) * set.inter_group_leakage(1, 0);
    assert!((b.interference_macro - leak).abs() <= 1e-12 * expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_never_exceeds_snr(seed in any::<u64>(), ratio in 0.0f64..50.0) {
        let cfg = NetworkConfig::default().with_density_ratio(ratio);
        let system = JsdmSystem::build(&NetworkConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = sample_realization(&cfg, &mut rng);
        if let Some(link) = associate(&r, &cfg).serving().copied() {
            let b = match link.tier {
                Tier::Macro => {
                    let set = system.precode(PrecodingMode::ZeroForcing, &mut rng).unwrap();
                    macro_served_sinr(&r, &link, Some(&set), 0, &system, &cfg, &mut rng).unwrap()
                }
                Tier::Pico => pico_served_sinr(&r, &link, &system, &cfg, &mut rng).unwrap(),
            };
            prop_assert!(b.useful_power > 0.0);
            prop_assert!(b.interference_macro >= 0.0 && b.interference_pico >= 0.0);
            prop_assert!(b.sinr <= b.snr);
        }
    }
}
