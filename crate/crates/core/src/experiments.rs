//! Figure presets, region-mask dumps and the CSV format shared by all outputs.
//!
//! Every CSV starts with `#` comment lines of `key=value` metadata (always
//! including `seed` and `config_hash`), followed by a header row and numeric
//! rows written at full round-trip precision.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{AnalyticEngine, OutageMode, Scenario};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::Tier;
use crate::montecarlo::{log_grid, run_with_system, sweep_density_ratio, SimPlan, SimResult, SweepEngine};
use crate::precoding::{JsdmSystem, PrecodingMode};
use crate::regions::{near_boundary, oracle_membership, region_spec, LinkCase, RegionParams};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "JSDM_OUT_DIR";

/// `--out` if given, else `$JSDM_OUT_DIR`, else `out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Thresholds -10..=30 dB in 1 dB steps.
pub fn threshold_grid() -> Vec<f64> {
    (-10..=30).map(f64::from).collect()
}

/// Density ratios from 1 to 10^4, four points per decade.
pub fn density_ratio_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 17)
}

/// A table of numbers with metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut file = fs::File::create(path)?;
        for (k, v) in &self.meta {
            writeln!(file, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut meta = BTreeMap::new();
        for line in BufReader::new(fs::File::open(path)?).lines() {
            let line = line?;
            let Some(rest) = line.strip_prefix('#') else { break };
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 2 + meta.len(),
                        message: format!("{s:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { meta, columns, rows })
    }

    /// Reads a table and checks that it was produced from `cfg`.
    pub fn read_checked(path: &Path, cfg: &NetworkConfig) -> Result<Self> {
        let t = Self::read(path)?;
        let expected = cfg.hash();
        let found = t.meta.get("config_hash").cloned().unwrap_or_default();
        if found != expected {
            return Err(Error::HashMismatch {
                path: path.to_path_buf(),
                expected,
                found,
            });
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "fig1" => Ok(FigureId::Fig1),
            "2" | "fig2" => Ok(FigureId::Fig2),
            "3" | "fig3" => Ok(FigureId::Fig3),
            _ => Err(Error::config("figure", format!("unknown figure {s:?}; use 1, 2 or 3"))),
        }
    }
}

/// Shared settings of an experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub drops: usize,
    pub out_dir: PathBuf,
}

fn stamp(table: CsvTable, cfg: &NetworkConfig, opts: &RunOptions, what: &str) -> CsvTable {
    table
        .with_meta("seed", opts.seed)
        .with_meta("config_hash", cfg.hash())
        .with_meta("drops", opts.drops)
        .with_meta("content", what)
}

/// Simulated curve of one scenario/precoding combination.
fn simulate(
    cfg: &NetworkConfig,
    opts: &RunOptions,
    grid: &[f64],
    scenario: Scenario,
    precoding: PrecodingMode,
    system: &JsdmSystem,
) -> Result<SimResult> {
    let plan = SimPlan::new(opts.drops, opts.seed, grid.to_vec())
        .with_scenario(scenario)
        .with_precoding(precoding);
    run_with_system(&plan, &scenario.apply(cfg), system)
}

/// Writes the CSV files of one figure and returns their paths.
pub fn run_figure(id: FigureId, cfg: &NetworkConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let system = JsdmSystem::build(cfg)?;
    let grid = threshold_grid();
    let mut written = Vec::new();
    match id {
        FigureId::Fig1 => {
            let mut t = stamp(
                CsvTable::new(&[
                    "threshold_db",
                    "one_tier_analytic",
                    "one_tier_simulated",
                    "two_tier_analytic",
                    "two_tier_simulated",
                ]),
                cfg,
                opts,
                "total SINR outage",
            );
            let mut cols = Vec::new();
            for scenario in [Scenario::OneTier, Scenario::TwoTier] {
                let sc = scenario.apply(cfg);
                let a = AnalyticEngine::with_system(&sc, &system)?.outage_curve(&grid, OutageMode::Sinr, scenario)?;
                let s = simulate(cfg, opts, &grid, scenario, PrecodingMode::ZeroForcing, &system)?;
                cols.push(a.values);
                cols.push(s.outage);
            }
            for (i, &th) in grid.iter().enumerate() {
                t.push(vec![th, cols[0][i], cols[1][i], cols[2][i], cols[3][i]]);
            }
            let path = opts.out_dir.join("fig1_outage.csv");
            t.write(&path)?;
            written.push(path);
        }
        FigureId::Fig2 => {
            let mut t = stamp(
                CsvTable::new(&[
                    "threshold_db",
                    "one_tier_sinr_analytic",
                    "one_tier_snr_analytic",
                    "one_tier_sinr_simulated",
                    "one_tier_snr_simulated",
                    "two_tier_sinr_analytic",
                    "two_tier_snr_analytic",
                    "two_tier_sinr_simulated",
                    "two_tier_snr_simulated",
                ]),
                cfg,
                opts,
                "SINR vs SNR outage",
            );
            let mut cols = Vec::new();
            for scenario in [Scenario::OneTier, Scenario::TwoTier] {
                let e = AnalyticEngine::with_system(&scenario.apply(cfg), &system)?;
                let sinr = e.outage_curve(&grid, OutageMode::Sinr, scenario)?;
                let snr = e.outage_curve(&grid, OutageMode::NoiseLimited, scenario)?;
                let s = simulate(cfg, opts, &grid, scenario, PrecodingMode::ZeroForcing, &system)?;
                cols.extend([sinr.values, snr.values, s.outage, s.snr_outage]);
            }
            for (i, &th) in grid.iter().enumerate() {
                let mut row = vec![th];
                row.extend(cols.iter().map(|c| c[i]));
                t.push(row);
            }
            let path = opts.out_dir.join("fig2_sinr_snr.csv");
            t.write(&path)?;
            written.push(path);

            let mut p = stamp(
                CsvTable::new(&["threshold_db", "zf_simulated", "zf_ci", "no_second_stage_simulated", "no_second_stage_ci"]),
                cfg,
                opts,
                "two-tier SINR outage with and without the second stage",
            );
            let zf = simulate(cfg, opts, &grid, Scenario::TwoTier, PrecodingMode::ZeroForcing, &system)?;
            let nss = simulate(cfg, opts, &grid, Scenario::TwoTier, PrecodingMode::NoSecondStage, &system)?;
            for (i, &th) in grid.iter().enumerate() {
                p.push(vec![th, zf.outage[i], zf.ci_half_width[i], nss.outage[i], nss.ci_half_width[i]]);
            }
            let path = opts.out_dir.join("fig2_precoding.csv");
            p.write(&path)?;
            written.push(path);
        }
        FigureId::Fig3 => {
            let ratios = density_ratio_grid();
            let analytic = sweep_density_ratio(cfg, &ratios, 0.0, SweepEngine::Analytic)?;
            let simulated = sweep_density_ratio(
                cfg,
                &ratios,
                0.0,
                SweepEngine::Simulated {
                    num_drops: opts.drops,
                    seed: opts.seed,
                },
            )?;
            let mut t = stamp(
                CsvTable::new(&["density_ratio", "analytic", "simulated", "simulated_ci"]),
                cfg,
                opts,
                "total SINR outage at 0 dB against lambda_s / lambda_m",
            );
            for (a, s) in analytic.iter().zip(&simulated) {
                t.push(vec![a.ratio, a.outage, s.outage, s.ci_half_width.unwrap_or(0.0)]);
            }
            let path = opts.out_dir.join("fig3_density_sweep.csv");
            t.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Closed-form masks of the eight regions and the disagreement mask against
/// the direct inequality test, sampled at cell centres.
#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub resolution: usize,
    /// Cell-centre coordinates.
    pub r_m: Vec<f64>,
    pub r_s: Vec<f64>,
    /// `(case, tier, mask)` with `mask[i][j]` at `(r_m[i], r_s[j])`.
    pub masks: Vec<(LinkCase, Tier, Vec<Vec<bool>>)>,
    /// Cells where closed form and oracle differ away from boundaries.
    pub oracle_diff: Vec<Vec<bool>>,
}

impl RegionMasks {
    pub fn compute(cfg: &NetworkConfig, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::config("resolution", "must be at least 2"));
        }
        let p = RegionParams::from_config(cfg)?;
        let centres = |max: f64| (0..resolution).map(|i| (i as f64 + 0.5) * max / resolution as f64).collect::<Vec<_>>();
        let r_m = centres(p.macro_radius);
        let r_s = centres(p.pico_radius);
        let mut oracle_diff = vec![vec![false; resolution]; resolution];
        let mut masks = Vec::new();
        for case in LinkCase::ALL {
            for tier in [Tier::Macro, Tier::Pico] {
                let spec = region_spec(case, tier, &p);
                let mut mask = vec![vec![false; resolution]; resolution];
                for (i, &x) in r_m.iter().enumerate() {
                    for (j, &y) in r_s.iter().enumerate() {
                        let inside = spec.contains(x, y);
                        mask[i][j] = inside;
                        if inside != oracle_membership(case, tier, &p, x, y) && !near_boundary(case, &p, x, y, 1e-9) {
                            oracle_diff[i][j] = true;
                        }
                    }
                }
                masks.push((case, tier, mask));
            }
        }
        Ok(Self {
            resolution,
            r_m,
            r_s,
            masks,
            oracle_diff,
        })
    }

    pub fn disagreements(&self) -> usize {
        self.oracle_diff.iter().flatten().filter(|&&d| d).count()
    }
}

fn mask_table(masks: &RegionMasks, mask: &[Vec<bool>], cfg: &NetworkConfig, what: &str) -> CsvTable {
    let mut t = CsvTable::new(&["r_m", "r_s", "value"])
        .with_meta("seed", cfg.engine.seed)
        .with_meta("config_hash", cfg.hash())
        .with_meta("resolution", masks.resolution)
        .with_meta("content", what);
    for (i, &x) in masks.r_m.iter().enumerate() {
        for (j, &y) in masks.r_s.iter().enumerate() {
            t.push(vec![x, y, mask[i][j] as u8 as f64]);
        }
    }
    t
}

/// Writes `regions_<case>_<tier>.csv` for all eight regions and
/// `regions_oracle_diff.csv`.
pub fn dump_regions(cfg: &NetworkConfig, resolution: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let masks = RegionMasks::compute(cfg, resolution)?;
    let mut written = Vec::new();
    for (case, tier, mask) in &masks.masks {
        let tier_name = match tier {
            Tier::Macro => "macro",
            Tier::Pico => "pico",
        };
        let name = format!("regions_{}_{}.csv", case.label(), tier_name);
        let what = format!("{} case, {}-served", case.label(), tier_name);
        let path = out_dir.join(name);
        mask_table(&masks, mask, cfg, &what).write(&path)?;
        written.push(path);
    }
    let path = out_dir.join("regions_oracle_diff.csv");
    mask_table(&masks, &masks.oracle_diff, cfg, "closed form vs direct test").write(&path)?;
    written.push(path);
    if masks.disagreements() > 0 {
        log::warn!("{} cells disagree with the direct inequality test", masks.disagreements());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let cfg = NetworkConfig::default();
        let mut t = CsvTable::new(&["a", "b"]).with_meta("seed", 7).with_meta("config_hash", cfg.hash());
        t.push(vec![0.1 + 0.2, 1.0 / 3.0]);
        t.push(vec![1e-300, -2.5e17]);
        t.write(&path).unwrap();
        let back = CsvTable::read_checked(&path, &cfg).unwrap();
        assert_eq!(back, t);
        let other = cfg.one_tier();
        assert!(matches!(
            CsvTable::read_checked(&path, &other),
            Err(Error::HashMismatch { .. })
        ));
    }

    #[test]
    fn figure_ids() {
        assert_eq!("fig2".parse::<FigureId>().unwrap(), FigureId::Fig2);
        assert_eq!("3".parse::<FigureId>().unwrap(), FigureId::Fig3);
        assert!("4".parse::<FigureId>().is_err());
    }

    #[test]
    fn grids() {
        let g = threshold_grid();
        assert_eq!(g.len(), 41);
        assert_eq!((g[0], g[40]), (-10.0, 30.0));
        let r = density_ratio_grid();
        assert_eq!((r[0], *r.last().unwrap()), (1.0, 1e4));
    }

    #[test]
    fn table_one_masks_match_oracle() {
        let m = RegionMasks::compute(&NetworkConfig::default(), 60).unwrap();
        assert_eq!(m.disagreements(), 0);
        assert_eq!(m.masks.len(), 8);
    }

    #[test]
    fn out_dir_precedence() {
        assert_eq!(resolve_out_dir(Some(Path::new("x"))), PathBuf::from("x"));
    }
}
