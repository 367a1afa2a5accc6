//! One random drop: both tiers around the typical user and the serving BS.
//!
//!     cargo run --example geometry_drop -- 7

use jsdm_hetnet::geometry::{associate, nearest_distance_cdf, sample_realization};
use jsdm_hetnet::{Association, NetworkConfig, Tier};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = NetworkConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drop = sample_realization(&cfg, &mut rng);

    for (tier, list) in [(Tier::Macro, &drop.macros), (Tier::Pico, &drop.picos)] {
        println!("{tier:?}: {} BSs", list.len());
        for bs in list {
            let kind = if bs.los { "LOS" } else { "NLOS" };
            println!("  ({:7.1}, {:7.1})  d = {:6.1} m  {kind}", bs.position[0], bs.position[1], bs.distance);
        }
    }
    match associate(&drop, &cfg) {
        Association::NoBs => println!("no BS in range"),
        Association::Served(link) => println!(
            "served by {:?} #{} at {:.1} m, exponent {}",
            link.tier, link.index, link.distance, link.alpha
        ),
    }

    let p = |t: &jsdm_hetnet::config::TierParams| 1.0 - nearest_distance_cdf(t, t.disc_radius);
    println!("P(no macro) = {:.4}, P(no pico) = {:.4}", p(&cfg.macro_tier), p(&cfg.pico_tier));
}
