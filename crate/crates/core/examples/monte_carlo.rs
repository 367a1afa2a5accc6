//! Simulated outage with confidence intervals, next to the analytic curve.
//!
//!     cargo run --release --example monte_carlo -- 20000

use jsdm_hetnet::montecarlo::{run, SimPlan};
use jsdm_hetnet::{AnalyticEngine, NetworkConfig, OutageMode, Scenario};

fn main() -> jsdm_hetnet::Result<()> {
    let drops = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let cfg = NetworkConfig::default();
    let grid: Vec<f64> = (-10..=30).step_by(5).map(f64::from).collect();

    let sim = run(&SimPlan::new(drops, cfg.engine.seed, grid.clone()), &cfg)?;
    let analytic = AnalyticEngine::new(&cfg)?.outage_curve(&grid, OutageMode::Sinr, Scenario::TwoTier)?;
    println!(
        "{drops} drops: {} uncovered, {} macro, {} pico; mean INR {:.3}",
        sim.counts.no_bs, sim.counts.macro_served, sim.counts.pico_served, sim.mean_inr
    );
    println!(" T dB  simulated          analytic");
    for (i, t) in grid.iter().enumerate() {
        println!("{t:5}  {:.4} +- {:.4}    {:.4}", sim.outage[i], sim.ci_half_width[i], analytic.values[i]);
    }
    Ok(())
}
