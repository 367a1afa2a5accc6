//! Outage at 0 dB against the pico-to-macro density ratio.

use jsdm_hetnet::experiments::density_ratio_grid;
use jsdm_hetnet::montecarlo::{sweep_density_ratio, SweepEngine};
use jsdm_hetnet::NetworkConfig;

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    let points = sweep_density_ratio(&cfg, &density_ratio_grid(), 0.0, SweepEngine::Analytic)?;
    let best = points.iter().min_by(|a, b| a.outage.total_cmp(&b.outage)).unwrap();
    for p in &points {
        let bar = "#".repeat((p.outage * 60.0) as usize);
        println!("{:9.1}  {:.5}  {bar}", p.ratio, p.outage);
    }
    println!("lowest outage {:.5} at ratio {:.0}", best.outage, best.ratio);
    Ok(())
}
