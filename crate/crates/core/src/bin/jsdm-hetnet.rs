use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jsdm_hetnet::analytic::{AnalyticEngine, OutageMode, Scenario};
use jsdm_hetnet::experiments::{
    density_ratio_grid, dump_regions, resolve_out_dir, run_figure, threshold_grid, CsvTable, FigureId, RunOptions,
};
use jsdm_hetnet::montecarlo::{run, sweep_density_ratio, SimPlan, SweepEngine};
use jsdm_hetnet::{NetworkConfig, PrecodingMode, Result};

#[derive(Parser)]
#[command(version, about = "Outage of a two-tier mmWave network with two-stage precoding")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; omitted fields take the default parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 10_000)]
    drops: usize,
    /// Output directory (default: $JSDM_OUT_DIR, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic SINR and SNR outage curves, one and two tiers.
    Analyze,
    /// Monte Carlo outage curves.
    Simulate {
        #[arg(long)]
        one_tier: bool,
        #[arg(long)]
        no_second_stage: bool,
    },
    /// Data of figure 1, 2 or 3.
    Figure { id: String },
    /// Association-region masks.
    Regions {
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Outage against the pico/macro density ratio.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        threshold_db: f64,
        #[arg(long)]
        simulate: bool,
    },
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = match &cli.common.config {
        Some(path) => NetworkConfig::load(path)?,
        None => NetworkConfig::default(),
    };
    if let Some(seed) = cli.common.seed {
        cfg.engine.seed = seed;
    }
    let opts = RunOptions {
        seed: cfg.engine.seed,
        drops: cli.common.drops,
        out_dir: resolve_out_dir(cli.common.out.as_deref()),
    };
    let meta = |t: CsvTable| t.with_meta("seed", opts.seed).with_meta("config_hash", cfg.hash());
    let grid = threshold_grid();
    match cli.command {
        Command::Analyze => {
            let mut t = meta(CsvTable::new(&[
                "threshold_db",
                "one_tier_sinr",
                "one_tier_snr",
                "two_tier_sinr",
                "two_tier_snr",
                "p_no_bs",
                "p_macro",
                "p_pico",
            ]));
            let mut cols = Vec::new();
            let mut parts = None;
            for scenario in [Scenario::OneTier, Scenario::TwoTier] {
                let e = AnalyticEngine::new(&scenario.apply(&cfg))?;
                let sinr = e.outage_curve(&grid, OutageMode::Sinr, scenario)?;
                cols.push(sinr.values);
                cols.push(e.outage_curve(&grid, OutageMode::NoiseLimited, scenario)?.values);
                parts = sinr.components;
            }
            let parts = parts.unwrap_or_default();
            for (i, &th) in grid.iter().enumerate() {
                let c = parts[i];
                t.push(vec![th, cols[0][i], cols[1][i], cols[2][i], cols[3][i], c.no_bs, c.macro_served, c.pico_served]);
            }
            let path = opts.out_dir.join("analytic_outage.csv");
            t.write(&path)?;
            Ok(vec![path])
        }
        Command::Simulate { one_tier, no_second_stage } => {
            let scenario = if one_tier { Scenario::OneTier } else { Scenario::TwoTier };
            let precoding = if no_second_stage {
                PrecodingMode::NoSecondStage
            } else {
                PrecodingMode::ZeroForcing
            };
            let plan = SimPlan::new(opts.drops, opts.seed, grid.clone())
                .with_scenario(scenario)
                .with_precoding(precoding);
            let r = run(&plan, &cfg)?;
            let mut t = meta(CsvTable::new(&["threshold_db", "sinr_outage", "sinr_ci", "snr_outage", "snr_ci"]))
                .with_meta("drops", opts.drops)
                .with_meta("no_bs", r.counts.no_bs)
                .with_meta("macro_served", r.counts.macro_served)
                .with_meta("pico_served", r.counts.pico_served)
                .with_meta("mean_inr", r.mean_inr)
                .with_meta("failed_drops", r.failed_drops);
            for (i, &th) in grid.iter().enumerate() {
                t.push(vec![th, r.outage[i], r.ci_half_width[i], r.snr_outage[i], r.snr_ci_half_width[i]]);
            }
            let path = opts.out_dir.join(format!("simulated_{}.csv", scenario.label()));
            t.write(&path)?;
            Ok(vec![path])
        }
        Command::Figure { id } => run_figure(id.parse::<FigureId>()?, &cfg, &opts),
        Command::Regions { resolution } => dump_regions(&cfg, resolution, &opts.out_dir),
        Command::Sweep { threshold_db, simulate } => {
            let engine = if simulate {
                SweepEngine::Simulated {
                    num_drops: opts.drops,
                    seed: opts.seed,
                }
            } else {
                SweepEngine::Analytic
            };
            let points = sweep_density_ratio(&cfg, &density_ratio_grid(), threshold_db, engine)?;
            let mut t = meta(CsvTable::new(&["density_ratio", "outage", "ci"])).with_meta("threshold_db", threshold_db);
            for p in points {
                t.push(vec![p.ratio, p.outage, p.ci_half_width.unwrap_or(0.0)]);
            }
            let path = opts.out_dir.join("density_sweep.csv");
            t.write(&path)?;
            Ok(vec![path])
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
