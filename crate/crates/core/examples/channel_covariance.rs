//! Eigen-structure of the one-ring covariance of each user group.

use jsdm_hetnet::channel::group_model;
use jsdm_hetnet::NetworkConfig;

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    for (g, geom) in cfg.group_geometries().iter().enumerate() {
        let model = group_model(geom, cfg.engine.energy_fraction)?;
        let trace: f64 = (0..model.num_antennas()).map(|i| model.covariance[(i, i)].re).sum();
        let kept: f64 = model.eigenvalues.iter().sum();
        println!(
            "group {g}: aoa {:5.1} deg, rank {} of {} ({:.2}% of the energy)",
            geom.aoa.to_degrees(),
            model.effective_rank,
            model.num_antennas(),
            100.0 * kept / trace
        );
        let head: Vec<String> = model.eigenvalues.iter().take(6).map(|l| format!("{l:.2}")).collect();
        println!("  leading eigenvalues {}", head.join(" "));
    }
    Ok(())
}
