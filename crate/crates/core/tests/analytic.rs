mod common;

use common::laplace_by_sampling;
use jsdm_hetnet::analytic::{laplace_interference, user_outage, xi_pico, OutageQuery};
use jsdm_hetnet::config::db_to_linear;
use jsdm_hetnet::geometry::Tier;
use jsdm_hetnet::{AnalyticEngine, NetworkConfig, OutageMode, Scenario};
use proptest::prelude::*;

#[test]
fn laplace_matches_sampling() {
    let cfg = NetworkConfig::default();
    let xi = xi_pico(&cfg);
    for (interferer, d, t_db) in [(Tier::Pico, 10.0, 20.0), (Tier::Pico, 30.0, 10.0), (Tier::Macro, 20.0, 10.0)] {
        let alpha = cfg.pico_tier.alpha_at(d);
        let q = OutageQuery::new(&cfg, Tier::Pico, d, alpha, db_to_linear(t_db), xi);
        let closed = laplace_interference(interferer, &q, &cfg).unwrap();
        let (tier, power) = match interferer {
            Tier::Macro => (&cfg.macro_tier, cfg.macro_power()),
            Tier::Pico => (&cfg.pico_tier, cfg.pico_power()),
        };
        let s = q.laplace_variable(cfg.noise_power());
        let sampled = laplace_by_sampling(tier, power, cfg.kappa_sq(), d, alpha, s, 200_000);
        assert!(closed < 0.95, "{interferer:?} d={d}: {closed} is too close to 1 to be informative");
        assert!((closed - sampled).abs() < 5e-3 * closed.max(0.1) + 2e-3, "{interferer:?} d={d}: {closed} vs {sampled}");
    }
}

#[test]
fn laplace_is_decreasing_in_threshold() {
    let cfg = NetworkConfig::default();
    let xi = xi_pico(&cfg);
    let mut last = 1.0;
    for t_db in [-10.0, 0.0, 10.0, 20.0] {
        let q = OutageQuery::new(&cfg, Tier::Pico, 20.0, 2.0, db_to_linear(t_db), xi);
        let l = laplace_interference(Tier::Pico, &q, &cfg).unwrap();
        assert!(l < last && l > 0.0);
        last = l;
    }
}

#[test]
fn user_outage_bounds() {
    let cfg = NetworkConfig::default();
    let xi = xi_pico(&cfg);
    let q = OutageQuery::new(&cfg, Tier::Pico, 30.0, 2.0, 1.0, xi);
    let snr = user_outage(&q, &cfg, OutageMode::NoiseLimited, true).unwrap();
    let own = user_outage(&q, &cfg, OutageMode::Sinr, false).unwrap();
    let both = user_outage(&q, &cfg, OutageMode::Sinr, true).unwrap();
    assert!(snr <= own && own <= both && both <= 1.0);
    let expected = 1.0 - (-xi * 900.0).exp();
    assert!((snr - expected).abs() < 1e-14);
}

fn grid() -> Vec<f64> {
    (-10..=30).map(f64::from).collect()
}

#[test]
fn curves_are_monotone_and_bounded() {
    for cfg in [NetworkConfig::default(), NetworkConfig::mixed_los()] {
        for scenario in [Scenario::OneTier, Scenario::TwoTier] {
            let engine = AnalyticEngine::new(&scenario.apply(&cfg)).unwrap();
            for mode in [OutageMode::Sinr, OutageMode::NoiseLimited] {
                let c = engine.outage_curve(&grid(), mode, scenario).unwrap();
                assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
                let p0 = engine.total_outage(1.0, mode).unwrap().no_bs;
                assert!(c.values.iter().all(|&v| v >= p0 - 1e-12 && v <= 1.0));
                for comp in c.components.unwrap() {
                    assert!((comp.total - (comp.no_bs + comp.macro_served + comp.pico_served)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn interference_only_raises_outage() {
    let engine = AnalyticEngine::new(&NetworkConfig::default()).unwrap();
    for t_db in [-5.0, 0.0, 10.0, 25.0] {
        let t = db_to_linear(t_db);
        let sinr = engine.total_outage(t, OutageMode::Sinr).unwrap().total;
        let snr = engine.total_outage(t, OutageMode::NoiseLimited).unwrap().total;
        assert!(sinr >= snr - 1e-9, "{t_db} dB: {sinr} < {snr}");
    }
}

#[test]
fn adding_picos_lowers_outage() {
    let cfg = NetworkConfig::default();
    let one = AnalyticEngine::new(&cfg.one_tier()).unwrap();
    let two = AnalyticEngine::new(&cfg).unwrap();
    for t_db in grid() {
        let t = db_to_linear(t_db);
        let a = one.total_outage(t, OutageMode::Sinr).unwrap().total;
        let b = two.total_outage(t, OutageMode::Sinr).unwrap().total;
        assert!(b <= a + 1e-9, "{t_db} dB: {b} > {a}");
    }
}

#[test]
fn one_tier_scenario_has_only_macro_terms() {
    let engine = AnalyticEngine::new(&NetworkConfig::default().one_tier()).unwrap();
    let c = engine.total_outage(1.0, OutageMode::Sinr).unwrap();
    assert_eq!(c.pico_served, 0.0);
    let m = &engine.config().macro_tier;
    assert!((c.no_bs - m.empty_probability()).abs() < 1e-15);
    let [p0, pm, ps] = engine.association_probabilities().unwrap();
    assert!((p0 + pm - 1.0).abs() < 1e-12 && ps == 0.0);
}

#[test]
fn association_masses_sum_to_one() {
    for cfg in [NetworkConfig::default(), NetworkConfig::mixed_los()] {
        let p = AnalyticEngine::new(&cfg).unwrap().association_probabilities().unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn excluding_no_bs_conditions_on_coverage() {
    let cfg = NetworkConfig::default();
    let mut conditional = cfg.clone();
    conditional.engine.include_no_bs = false;
    let a = AnalyticEngine::new(&cfg).unwrap().total_outage(1.0, OutageMode::Sinr).unwrap();
    let b = AnalyticEngine::new(&conditional).unwrap().total_outage(1.0, OutageMode::Sinr).unwrap();
    assert!((b.total - (a.total - a.no_bs) / (1.0 - a.no_bs)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplace_in_unit_interval_and_shrinks_with_density(
        d in 1.0f64..55.0, t_db in -20.0f64..30.0, scale in 1.0f64..5.0,
    ) {
        let cfg = NetworkConfig::default();
        let q = OutageQuery::new(&cfg, Tier::Pico, d, cfg.pico_tier.alpha_at(d), db_to_linear(t_db), xi_pico(&cfg));
        let base = laplace_interference(Tier::Pico, &q, &cfg).unwrap();
        let mut denser = cfg.clone();
        denser.pico_tier.density *= scale;
        let l = laplace_interference(Tier::Pico, &q, &denser).unwrap();
        prop_assert!(base > 0.0 && base <= 1.0);
        // exponent is linear in the density
        prop_assert!((l.ln() - scale * base.ln()).abs() <= 1e-9 * (1.0 + l.ln().abs()));
    }
}
