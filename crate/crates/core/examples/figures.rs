//! Writes the data behind all three figures as CSV, the same files as
//! `jsdm-hetnet figure <id>`.
//!
//!     cargo run --release --example figures -- out 10000

use std::path::PathBuf;

use jsdm_hetnet::experiments::{run_figure, FigureId, RunOptions};
use jsdm_hetnet::NetworkConfig;

fn main() -> jsdm_hetnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let drops = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000);
    let cfg = NetworkConfig::default();
    let opts = RunOptions {
        seed: cfg.engine.seed,
        drops,
        out_dir,
    };
    for id in [FigureId::Fig1, FigureId::Fig2, FigureId::Fig3] {
        for path in run_figure(id, &cfg, &opts)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}
