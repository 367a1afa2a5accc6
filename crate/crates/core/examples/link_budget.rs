//! SINR budgets of a few drops with the interference split per tier.

use jsdm_hetnet::config::linear_to_db;
use jsdm_hetnet::montecarlo::{simulate_drop, DropOutcome, SimPlan};
use jsdm_hetnet::{JsdmSystem, NetworkConfig};

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg)?;
    let plan = SimPlan::new(1, 42, vec![0.0]);
    println!("noise floor {:.1} dBm", linear_to_db(cfg.noise_power()) + 30.0);
    println!("drop  tier   SNR dB  SINR dB  I_macro/N  I_pico/N");
    for i in 0..12 {
        match simulate_drop(i, &plan, &cfg, &system)? {
            DropOutcome::NoBs => println!("{i:4}  none"),
            DropOutcome::Served { tier, budget: b } => println!(
                "{i:4}  {:5}  {:7.2}  {:7.2}  {:9.2e}  {:8.2e}",
                format!("{tier:?}"),
                linear_to_db(b.snr),
                linear_to_db(b.sinr),
                b.interference_macro / b.noise_power,
                b.interference_pico / b.noise_power
            ),
        }
    }
    Ok(())
}
