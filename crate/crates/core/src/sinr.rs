//! Link budget of the typical user: useful power, per-tier interference and
//! thermal noise.

use rand::Rng;
use rand_distr::Exp1;

use crate::config::{dbm_to_watts, InterferenceMode, InterfererBeams, NetworkConfig, TierParams};
use crate::error::{Error, Result};
use crate::geometry::{BaseStation, NetworkRealization, ServingLink, Tier};
use crate::precoding::{JsdmSystem, PrecoderSet};

/// Thermal noise `-174 dBm/Hz + 10 log10(B) + NF`, in watts.
pub fn noise_power(bandwidth: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(-174.0 + 10.0 * bandwidth.log10() + noise_figure_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub useful_power: f64,
    /// Macro-tier interference (I1 or I3). For a macro-served user this also
    /// holds any residual intra-cell leakage of the serving BS.
    pub interference_macro: f64,
    /// Pico-tier interference (I2 or I4).
    pub interference_pico: f64,
    pub noise_power: f64,
    pub sinr: f64,
    pub snr: f64,
}

impl LinkBudget {
    pub fn new(useful: f64, interference_macro: f64, interference_pico: f64, noise: f64) -> Self {
        Self {
            useful_power: useful,
            interference_macro,
            interference_pico,
            noise_power: noise,
            sinr: useful / (noise + interference_macro + interference_pico),
            snr: useful / noise,
        }
    }

    pub fn interference_to_noise(&self) -> f64 {
        (self.interference_macro + self.interference_pico) / self.noise_power
    }
}

fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Sum of `power kappa^2 r^-alpha G` over a tier's BSs, skipping the serving
/// BS. In analysis-match mode every link uses the serving exponent and only
/// BSs at least as far as the serving BS contribute.
fn tier_interference<R, G>(
    stations: &[BaseStation],
    skip: Option<usize>,
    tier: &TierParams,
    power: f64,
    link: &ServingLink,
    cfg: &NetworkConfig,
    rng: &mut R,
    mut gain: G,
) -> Result<f64>
where
    R: Rng + ?Sized,
    G: FnMut(&mut R) -> Result<f64>,
{
    let kappa_sq = cfg.kappa_sq();
    let mut total = 0.0;
    for (i, bs) in stations.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let alpha = match cfg.engine.interference_mode {
            InterferenceMode::AnalysisMatch => {
                if bs.distance < link.distance {
                    continue;
                }
                link.alpha
            }
            InterferenceMode::Physical => tier.alpha_at(bs.distance),
        };
        total += power * kappa_sq * bs.distance.powf(-alpha) * gain(rng)?;
    }
    Ok(total)
}

fn macro_interferer_gain<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    system: &JsdmSystem,
    rng: &mut R,
) -> Result<f64> {
    match cfg.engine.interferer_beams {
        InterfererBeams::Exponential => Ok(unit_exponential(rng)),
        InterfererBeams::FullPrecoding => system.interferer_gain(rng),
    }
}

/// Budget of a user served by macro BS `link.index`, who is user 0 of
/// `group` in `precoders`.
pub fn macro_served_sinr<R: Rng + ?Sized>(
    realization: &NetworkRealization,
    link: &ServingLink,
    precoders: Option<&PrecoderSet>,
    group: usize,
    system: &JsdmSystem,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<LinkBudget> {
    debug_assert_eq!(link.tier, Tier::Macro);
    let precoders = precoders.ok_or(Error::MissingPrecoder)?;
    if group >= precoders.beams.len() || precoders.beams[group].is_empty() {
        return Err(Error::MissingPrecoder);
    }
    let scale = cfg.macro_power() * cfg.kappa_sq() * link.distance.powf(-link.alpha);
    let useful = scale * precoders.gain(group, 0, 0);
    let leakage = scale
        * (precoders.intra_group_leakage(group, 0) + precoders.inter_group_leakage(group, 0));
    let i1 = tier_interference(
        &realization.macros,
        Some(link.index),
        &cfg.macro_tier,
        cfg.macro_power(),
        link,
        cfg,
        rng,
        |r| macro_interferer_gain(cfg, system, r),
    )?;
    let i2 = tier_interference(
        &realization.picos,
        None,
        &cfg.pico_tier,
        cfg.pico_power(),
        link,
        cfg,
        rng,
        |r| Ok(unit_exponential(r)),
    )?;
    Ok(LinkBudget::new(useful, i1 + leakage, i2, cfg.noise_power()))
}

/// Budget of a user served by pico BS `link.index`.
pub fn pico_served_sinr<R: Rng + ?Sized>(
    realization: &NetworkRealization,
    link: &ServingLink,
    system: &JsdmSystem,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<LinkBudget> {
    debug_assert_eq!(link.tier, Tier::Pico);
    let useful =
        cfg.pico_power() * cfg.kappa_sq() * link.distance.powf(-link.alpha) * unit_exponential(rng);
    let i3 = tier_interference(
        &realization.macros,
        None,
        &cfg.macro_tier,
        cfg.macro_power(),
        link,
        cfg,
        rng,
        |r| macro_interferer_gain(cfg, system, r),
    )?;
    let i4 = tier_interference(
        &realization.picos,
        Some(link.index),
        &cfg.pico_tier,
        cfg.pico_power(),
        link,
        cfg,
        rng,
        |r| Ok(unit_exponential(r)),
    )?;
    Ok(LinkBudget::new(useful, i3, i4, cfg.noise_power()))
}
