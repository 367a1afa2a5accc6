//! Association regions in the (macro distance, pico distance) plane for
//! each LOS/NLOS case, drawn as text, and their probability masses.

use jsdm_hetnet::regions::{integrate_over_region, region_spec, LinkCase, RegionParams};
use jsdm_hetnet::{NetworkConfig, Tier};

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    let p = RegionParams::from_config(&cfg)?;
    println!("P_s/P_m = {:.4}", p.power_ratio);
    for case in LinkCase::ALL {
        let macro_region = region_spec(case, Tier::Macro, &p);
        let pico_region = region_spec(case, Tier::Pico, &p);
        let (rm, rs) = p.rectangle(case);
        println!(
            "\n{}: macro branch {}, pico branch {}, r_m in [{:.0}, {:.0}], r_s in [{:.0}, {:.0}]",
            case.label(),
            macro_region.branch,
            pico_region.branch,
            rm[0],
            rm[1],
            rs[0],
            rs[1]
        );
        // rows: r_s from top to bottom; M = macro, s = pico
        for j in (0..12).rev() {
            let y = rs[0] + (rs[1] - rs[0]) * (j as f64 + 0.5) / 12.0;
            let row: String = (0..48)
                .map(|i| {
                    let x = rm[0] + (rm[1] - rm[0]) * (i as f64 + 0.5) / 48.0;
                    if macro_region.contains(x, y) {
                        'M'
                    } else if pico_region.contains(x, y) {
                        's'
                    } else {
                        '.'
                    }
                })
                .collect();
            println!("  {row}");
        }
        let m = integrate_over_region(case, Tier::Macro, &cfg, |_, _| 1.0)?;
        let s = integrate_over_region(case, Tier::Pico, &cfg, |_, _| 1.0)?;
        println!("  mass: macro {m:.4}, pico {s:.4}");
    }
    Ok(())
}
