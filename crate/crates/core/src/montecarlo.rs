//! Monte Carlo estimation of outage curves: independent drops of both tiers,
//! association, precoding and SINR of the typical user.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticEngine, OutageMode, Scenario};
use crate::config::{db_to_linear, InterferenceMode, NetworkConfig};
use crate::error::{Error, Result};
use crate::geometry::{associate, sample_realization, Association, Tier};
use crate::precoding::{JsdmSystem, PrecodingMode};
use crate::sinr::{macro_served_sinr, pico_served_sinr, LinkBudget};

/// Random streams of one drop. Each purpose has its own stream so that
/// scenarios sharing a seed reuse the same geometry and fading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Geometry = 0,
    Group = 1,
    Precoding = 2,
    Fading = 3,
}

const STREAMS_PER_DROP: u64 = 8;

/// Counter-based stream of `purpose` in drop `drop`.
pub fn drop_stream(seed: u64, drop: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop * STREAMS_PER_DROP + purpose as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub num_drops: usize,
    pub seed: u64,
    pub thresholds_db: Vec<f64>,
    pub scenario: Scenario,
    pub interference_mode: InterferenceMode,
    pub precoding_mode: PrecodingMode,
}

impl SimPlan {
    pub fn new(num_drops: usize, seed: u64, thresholds_db: Vec<f64>) -> Self {
        Self {
            num_drops,
            seed,
            thresholds_db,
            scenario: Scenario::TwoTier,
            interference_mode: InterferenceMode::AnalysisMatch,
            precoding_mode: PrecodingMode::ZeroForcing,
        }
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_precoding(mut self, mode: PrecodingMode) -> Self {
        self.precoding_mode = mode;
        self
    }

    pub fn with_interference(mut self, mode: InterferenceMode) -> Self {
        self.interference_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_drops == 0 {
            return Err(Error::config("drops", "need at least one drop"));
        }
        if self.thresholds_db.is_empty() {
            return Err(Error::config("thresholds", "grid is empty"));
        }
        if self.thresholds_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("thresholds", "grid must be strictly ascending"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AssociationCounts {
    pub no_bs: usize,
    pub macro_served: usize,
    pub pico_served: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub thresholds_db: Vec<f64>,
    /// Fraction of counted drops with SINR below each threshold.
    pub outage: Vec<f64>,
    /// Binomial 95% half-width `1.96 sqrt(p (1 - p) / N)`.
    pub ci_half_width: Vec<f64>,
    pub snr_outage: Vec<f64>,
    pub snr_ci_half_width: Vec<f64>,
    pub counts: AssociationCounts,
    /// Mean interference-to-noise ratio over served drops.
    pub mean_inr: f64,
    /// Drops entering the estimates.
    pub counted_drops: usize,
    pub failed_drops: usize,
}

impl SimResult {
    pub fn no_bs_fraction(&self) -> f64 {
        let n = self.counts.no_bs + self.counts.macro_served + self.counts.pico_served;
        self.counts.no_bs as f64 / n as f64
    }
}

/// Outcome of one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DropOutcome {
    NoBs,
    Served { tier: Tier, budget: LinkBudget },
}

/// Simulates drop `index`.
pub fn simulate_drop(
    index: u64,
    plan: &SimPlan,
    cfg: &NetworkConfig,
    system: &JsdmSystem,
) -> Result<DropOutcome> {
    let mut geo = drop_stream(plan.seed, index, StreamPurpose::Geometry);
    let realization = sample_realization(cfg, &mut geo);
    let link = match associate(&realization, cfg) {
        Association::NoBs => return Ok(DropOutcome::NoBs),
        Association::Served(link) => link,
    };
    let mut fading = drop_stream(plan.seed, index, StreamPurpose::Fading);
    let budget = match link.tier {
        Tier::Macro => {
            let group = system.sample_group(&mut drop_stream(plan.seed, index, StreamPurpose::Group));
            let mut prec_rng = drop_stream(plan.seed, index, StreamPurpose::Precoding);
            let precoders = system.precode(plan.precoding_mode, &mut prec_rng)?;
            macro_served_sinr(&realization, &link, Some(&precoders), group, system, cfg, &mut fading)?
        }
        Tier::Pico => pico_served_sinr(&realization, &link, system, cfg, &mut fading)?,
    };
    Ok(DropOutcome::Served {
        tier: link.tier,
        budget,
    })
}

fn half_width(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Runs a plan, building the precoding state from `cfg`.
pub fn run(plan: &SimPlan, cfg: &NetworkConfig) -> Result<SimResult> {
    let cfg = plan.scenario.apply(cfg);
    cfg.validate()?;
    let system = JsdmSystem::build(&cfg)?;
    run_with_system(plan, &cfg, &system)
}

/// Runs a plan on a configuration that already reflects the scenario.
/// Results depend only on `(seed, plan, cfg)`, not on the thread count.
pub fn run_with_system(plan: &SimPlan, cfg: &NetworkConfig, system: &JsdmSystem) -> Result<SimResult> {
    plan.validate()?;
    let mut cfg = cfg.clone();
    cfg.engine.interference_mode = plan.interference_mode;
    let outcomes: Vec<Result<DropOutcome>> = (0..plan.num_drops as u64)
        .into_par_iter()
        .map(|i| simulate_drop(i, plan, &cfg, system))
        .collect();

    let thresholds: Vec<f64> = plan.thresholds_db.iter().map(|&t| db_to_linear(t)).collect();
    let mut sinr_hits = vec![0usize; thresholds.len()];
    let mut snr_hits = vec![0usize; thresholds.len()];
    let mut counts = AssociationCounts::default();
    let mut inr_sum = 0.0;
    let mut failed = 0usize;
    let mut first_error: Option<Error> = None;
    let mut counted = 0usize;
    for outcome in outcomes {
        match outcome {
            Err(e) => {
                log::warn!("drop failed: {e}");
                failed += 1;
                first_error.get_or_insert(e);
            }
            Ok(DropOutcome::NoBs) => {
                counts.no_bs += 1;
                if cfg.engine.include_no_bs {
                    counted += 1;
                    for k in 0..thresholds.len() {
                        sinr_hits[k] += 1;
                        snr_hits[k] += 1;
                    }
                }
            }
            Ok(DropOutcome::Served { tier, budget }) => {
                match tier {
                    Tier::Macro => counts.macro_served += 1,
                    Tier::Pico => counts.pico_served += 1,
                }
                counted += 1;
                inr_sum += budget.interference_to_noise();
                for (k, &t) in thresholds.iter().enumerate() {
                    sinr_hits[k] += (budget.sinr < t) as usize;
                    snr_hits[k] += (budget.snr < t) as usize;
                }
            }
        }
    }
    if failed * 1000 > plan.num_drops {
        return Err(Error::TooManyDropErrors {
            failed,
            total: plan.num_drops,
            first: first_error.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    if counted == 0 {
        return Err(Error::Invalid("no drop entered the estimate".into()));
    }
    let frac = |hits: &[usize]| hits.iter().map(|&h| h as f64 / counted as f64).collect::<Vec<_>>();
    let outage = frac(&sinr_hits);
    let snr_outage = frac(&snr_hits);
    let served = counts.macro_served + counts.pico_served;
    Ok(SimResult {
        thresholds_db: plan.thresholds_db.clone(),
        ci_half_width: outage.iter().map(|&p| half_width(p, counted)).collect(),
        snr_ci_half_width: snr_outage.iter().map(|&p| half_width(p, counted)).collect(),
        outage,
        snr_outage,
        counts,
        mean_inr: if served > 0 { inr_sum / served as f64 } else { 0.0 },
        counted_drops: counted,
        failed_drops: failed,
    })
}

/// How a density sweep evaluates each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepEngine {
    Analytic,
    Simulated { num_drops: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// `lambda_s / lambda_m`.
    pub ratio: f64,
    pub outage: f64,
    /// CI half-width of simulated points.
    pub ci_half_width: Option<f64>,
}

/// Total outage at one threshold for each pico-to-macro density ratio.
pub fn sweep_density_ratio(
    cfg: &NetworkConfig,
    ratios: &[f64],
    threshold_db: f64,
    engine: SweepEngine,
) -> Result<Vec<SweepPoint>> {
    if ratios.is_empty() || ratios.windows(2).any(|w| !(w[0] < w[1])) || ratios[0] < 0.0 {
        return Err(Error::config("ratios", "must be a nonempty ascending list of nonnegative values"));
    }
    let system = JsdmSystem::build(cfg)?;
    ratios
        .iter()
        .map(|&ratio| {
            let c = cfg.with_density_ratio(ratio);
            match engine {
                SweepEngine::Analytic => {
                    let e = AnalyticEngine::with_system(&c, &system)?;
                    let v = e.total_outage(db_to_linear(threshold_db), OutageMode::Sinr)?;
                    Ok(SweepPoint {
                        ratio,
                        outage: v.total,
                        ci_half_width: None,
                    })
                }
                SweepEngine::Simulated { num_drops, seed } => {
                    let plan = SimPlan::new(num_drops, seed, vec![threshold_db]);
                    let r = run_with_system(&plan, &c, &system)?;
                    Ok(SweepPoint {
                        ratio,
                        outage: r.outage[0],
                        ci_half_width: Some(r.ci_half_width[0]),
                    })
                }
            }
        })
        .collect()
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
