//! Two-stage precoding at one macro BS: block-diagonalizing first stage,
//! then zero forcing on the effective channels.

use jsdm_hetnet::{JsdmSystem, NetworkConfig, PrecodingMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> jsdm_hetnet::Result<()> {
    let cfg = NetworkConfig::default();
    let system = JsdmSystem::build(&cfg)?;
    println!("max leakage between group subspaces: {:.2e}", system.max_subspace_leakage());
    for (g, (map, nf)) in system.maps.iter().zip(system.norm_factors_sq()).enumerate() {
        println!("group {g}: {} beams, ||C^-1 B^H||^2 = {nf:.4}", map.first_stage.ncols());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mode in [PrecodingMode::ZeroForcing, PrecodingMode::NoSecondStage] {
        let set = system.precode(mode, &mut rng)?;
        println!("{mode:?}");
        for g in 0..system.num_groups() {
            for k in 0..set.beams[g].len() {
                println!(
                    "  group {g} user {k}: gain {:.4}  intra leak {:.2e}  inter leak {:.2e}",
                    set.gain(g, k, k),
                    set.intra_group_leakage(g, k),
                    set.inter_group_leakage(g, k)
                );
            }
        }
    }
    Ok(())
}
