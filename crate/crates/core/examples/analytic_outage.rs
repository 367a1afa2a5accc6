//! Analytic outage curves for the one- and two-tier networks, split into
//! the no-BS, macro-served and pico-served parts.

use jsdm_hetnet::config::db_to_linear;
use jsdm_hetnet::{AnalyticEngine, NetworkConfig, OutageMode, Scenario};

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    let one = AnalyticEngine::new(&Scenario::OneTier.apply(&cfg))?;
    let two = AnalyticEngine::new(&cfg)?;
    let [p0, pm, ps] = two.association_probabilities()?;
    println!("association: none {p0:.4}, macro {pm:.4}, pico {ps:.4}");

    println!("\n T dB  one tier  two tier  (no BS  macro  pico)  SNR only");
    for t_db in (-10..=30).step_by(5) {
        let t = db_to_linear(t_db as f64);
        let a = one.total_outage(t, OutageMode::Sinr)?;
        let b = two.total_outage(t, OutageMode::Sinr)?;
        let snr = two.total_outage(t, OutageMode::NoiseLimited)?;
        println!(
            "{t_db:5}  {:8.4}  {:8.4}  ({:.4} {:.4} {:.4})  {:8.4}",
            a.total, b.total, b.no_bs, b.macro_served, b.pico_served, snr.total
        );
    }
    Ok(())
}
