//! Network configuration: tier parameters, macro array geometry, radio
//! constants and engine switches.
//!
//! Configuration files are TOML. Every field is optional; omitted fields take
//! the default system parameters (two groups at -30 and 0 degrees, 128
//! antennas, 28 GHz, 53/33 dBm, 200/60 m discs, 20 m LOS balls, alpha = 4).
//! Powers are given in dBm and angles in degrees in the file and are
//! converted once, at load time, to watts and radians.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for the carrier wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Parameters shared by all base stations of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierParams {
    /// BS per square metre. Zero disables the tier.
    pub density: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Radius of the disc (centred on the typical user) holding the tier, m.
    pub disc_radius: f64,
    /// LOS ball radius, m.
    pub los_radius: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
}

impl TierParams {
    /// Links strictly shorter than the LOS radius are line of sight.
    pub fn is_los(&self, distance: f64) -> bool {
        distance < self.los_radius
    }

    pub fn alpha_at(&self, distance: f64) -> f64 {
        if self.is_los(distance) {
            self.alpha_los
        } else {
            self.alpha_nlos
        }
    }

    pub fn alpha_at_case(&self, los: bool) -> f64 {
        if los {
            self.alpha_los
        } else {
            self.alpha_nlos
        }
    }

    /// Mean number of BSs in the disc.
    pub fn mean_count(&self) -> f64 {
        self.density * PI * self.disc_radius * self.disc_radius
    }

    /// Probability that the disc holds no BS.
    pub fn empty_probability(&self) -> f64 {
        (-self.mean_count()).exp()
    }

    pub fn is_enabled(&self) -> bool {
        self.density > 0.0
    }

    fn validate(&self, name: &str) -> Result<()> {
        let field = |f: &str| format!("{name}.{f}");
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return Err(Error::config(field("density"), "must be finite and >= 0"));
        }
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            return Err(Error::config(field("tx_power_dbm"), "power must be positive"));
        }
        if !(self.disc_radius > 0.0) || !self.disc_radius.is_finite() {
            return Err(Error::config(field("disc_radius"), "must be positive"));
        }
        if !(self.los_radius > 0.0) || self.los_radius > self.disc_radius {
            return Err(Error::config(
                field("los_radius"),
                "must satisfy 0 < los_radius <= disc_radius",
            ));
        }
        if !(self.alpha_los > 0.0) {
            return Err(Error::config(field("alpha_los"), "must be positive"));
        }
        if !(self.alpha_nlos >= self.alpha_los) {
            return Err(Error::config(field("alpha_nlos"), "must be >= alpha_los"));
        }
        Ok(())
    }
}

/// One-ring scattering geometry of a user group seen from the macro array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupGeometry {
    /// Angle of arrival, radians.
    pub aoa: f64,
    /// Half-width of the angular spread, radians.
    pub angular_spread: f64,
    /// Element spacing in carrier wavelengths.
    pub antenna_spacing: f64,
    pub num_antennas: usize,
}

impl GroupGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.angular_spread > 0.0 && self.angular_spread < PI / 2.0) {
            return Err(Error::config("groups.spread_deg", "must lie in (0, 90) degrees"));
        }
        if self.num_antennas == 0 {
            return Err(Error::config("array.num_antennas", "must be >= 1"));
        }
        if !(self.antenna_spacing > 0.0) {
            return Err(Error::config("array.antenna_spacing", "must be positive"));
        }
        Ok(())
    }
}

/// A user group served by every macro BS: its covariance geometry, the
/// number of users (one stream each) and the first-stage dimension `B_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub geometry: GroupGeometry,
    pub users: usize,
    pub beams: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceMode {
    /// Every interferer uses the serving link's path-loss exponent and only
    /// interferers at least as far as the serving BS are counted.
    AnalysisMatch,
    /// Every interferer has its own LOS/NLOS exponent; all are counted.
    Physical,
}

/// Radial factor of the Laplace-functional integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialDensity {
    /// `2 pi lambda x`, the PPP intensity in polar coordinates.
    Campbell,
    /// `2 pi lambda alpha x^alpha`, the literal printed integrand.
    AsWritten,
}

/// How the beam gain `|h_l^H p_l|^2` of interfering macro BSs is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfererBeams {
    /// Independent unit-mean exponential per interferer.
    Exponential,
    /// Each interferer builds a zero-forcing beam for its own users and the
    /// typical user's effective channel to it is drawn independently.
    FullPrecoding,
}

/// Matrix norm used for `||C^-1 B^H||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamNorm {
    Frobenius,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub interference_mode: InterferenceMode,
    pub radial_density: RadialDensity,
    pub interferer_beams: InterfererBeams,
    pub beam_norm: BeamNorm,
    /// Fraction of the covariance trace kept when truncating its rank.
    pub energy_fraction: f64,
    /// Optional cap on the per-group dominant subspace nulled by the first stage.
    pub subspace_cap: Option<usize>,
    /// Count drops without any BS as outages (they carry `P_tout,0`).
    pub include_no_bs: bool,
    /// Relative tolerance of the outer region integrals.
    pub region_rel_tol: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            interference_mode: InterferenceMode::AnalysisMatch,
            radial_density: RadialDensity::Campbell,
            interferer_beams: InterfererBeams::Exponential,
            beam_norm: BeamNorm::Frobenius,
            energy_fraction: 0.99,
            subspace_cap: None,
            include_no_bs: true,
            region_rel_tol: 1e-4,
            seed: 1,
        }
    }
}

/// Fully resolved configuration in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Tier 1. `tx_power` is the total macro power `P_1`.
    pub macro_tier: TierParams,
    /// Tier 2. `tx_power` is `P_s = P_2`.
    pub pico_tier: TierParams,
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub noise_figure_db: f64,
    pub num_antennas: usize,
    pub antenna_spacing: f64,
    pub groups: Vec<GroupConfig>,
    /// Number of data streams `S` sharing the macro power.
    pub total_streams: usize,
    pub user_density: f64,
    pub engine: EngineConfig,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        RawConfig::default()
            .resolve()
            .expect("default configuration is valid")
    }
}

impl NetworkConfig {
    /// The default system parameters.
    pub fn table_one() -> Self {
        Self::default()
    }

    /// Default parameters with a LOS exponent of 2, so that the mixed
    /// LOS/NLOS association cases are non-trivial.
    pub fn mixed_los() -> Self {
        let mut cfg = Self::default();
        cfg.macro_tier.alpha_los = 2.0;
        cfg.pico_tier.alpha_los = 2.0;
        cfg
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let line = e
                .span()
                .map(|span| src[..span.start.min(src.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        raw.resolve()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_str(&src)
    }

    pub fn validate(&self) -> Result<()> {
        self.macro_tier.validate("macro_tier")?;
        self.pico_tier.validate("pico_tier")?;
        if !(self.carrier_frequency > 0.0) {
            return Err(Error::config("radio.carrier_frequency_hz", "must be positive"));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::config("radio.bandwidth_hz", "must be positive"));
        }
        if self.groups.is_empty() {
            return Err(Error::config("groups", "at least one group is required"));
        }
        for (g, group) in self.groups.iter().enumerate() {
            group.geometry.validate()?;
            if group.users == 0 {
                return Err(Error::config(format!("groups[{g}].users"), "must be >= 1"));
            }
            if group.beams < group.users {
                return Err(Error::config(
                    format!("groups[{g}].beams"),
                    "first-stage dimension must be >= number of users",
                ));
            }
            if group.beams > self.num_antennas {
                return Err(Error::config(
                    format!("groups[{g}].beams"),
                    "first-stage dimension exceeds the number of antennas",
                ));
            }
        }
        let streams: usize = self.groups.iter().map(|g| g.users).sum();
        if streams > self.num_antennas {
            return Err(Error::config("groups", "total streams exceed the number of antennas"));
        }
        if self.total_streams == 0 {
            return Err(Error::config("total_streams", "must be >= 1"));
        }
        if !(self.user_density >= 0.0) {
            return Err(Error::config("user_density", "must be >= 0"));
        }
        let e = &self.engine;
        if !(e.energy_fraction > 0.0 && e.energy_fraction <= 1.0) {
            return Err(Error::config("engine.energy_fraction", "must lie in (0, 1]"));
        }
        if !(e.region_rel_tol > 0.0) {
            return Err(Error::config("engine.region_rel_tol", "must be positive"));
        }
        if e.subspace_cap == Some(0) {
            return Err(Error::config("engine.subspace_cap", "must be >= 1"));
        }
        Ok(())
    }

    /// Per-stream macro power `P_m = P_1 / S`.
    pub fn macro_power(&self) -> f64 {
        self.macro_tier.tx_power / self.total_streams as f64
    }

    /// Pico power `P_s`.
    pub fn pico_power(&self) -> f64 {
        self.pico_tier.tx_power
    }

    /// `P_s / P_m`.
    pub fn power_ratio(&self) -> f64 {
        self.pico_power() / self.macro_power()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Free-space reference gain `kappa^2 = (lambda_c / 4 pi)^2`.
    pub fn kappa_sq(&self) -> f64 {
        let kappa = self.wavelength() / (4.0 * PI);
        kappa * kappa
    }

    /// Thermal noise power in watts.
    pub fn noise_power(&self) -> f64 {
        crate::sinr::noise_power(self.bandwidth, self.noise_figure_db)
    }

    pub fn num_users(&self) -> usize {
        self.groups.iter().map(|g| g.users).sum()
    }

    pub fn group_geometries(&self) -> Vec<GroupGeometry> {
        self.groups.iter().map(|g| g.geometry).collect()
    }

    /// Probability that a uniformly chosen user belongs to each group.
    pub fn group_weights(&self) -> Vec<f64> {
        let k = self.num_users() as f64;
        self.groups.iter().map(|g| g.users as f64 / k).collect()
    }

    /// Copy with the pico tier disabled.
    pub fn one_tier(&self) -> Self {
        let mut cfg = self.clone();
        cfg.pico_tier.density = 0.0;
        cfg
    }

    /// Copy with `lambda_s = ratio * lambda_m`.
    pub fn with_density_ratio(&self, ratio: f64) -> Self {
        let mut cfg = self.clone();
        cfg.pico_tier.density = ratio * self.macro_tier.density;
        cfg
    }

    /// Short stable digest of the resolved configuration.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    total_streams: Option<usize>,
    user_density: Option<f64>,
    #[serde(default)]
    macro_tier: RawTier,
    #[serde(default)]
    pico_tier: RawTier,
    #[serde(default)]
    radio: RawRadio,
    #[serde(default)]
    array: RawArray,
    groups: Option<Vec<RawGroup>>,
    #[serde(default)]
    engine: RawEngine,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTier {
    density: Option<f64>,
    tx_power_dbm: Option<f64>,
    disc_radius: Option<f64>,
    los_radius: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    carrier_frequency_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    noise_figure_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    num_antennas: Option<usize>,
    antenna_spacing: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    aoa_deg: f64,
    spread_deg: f64,
    users: usize,
    beams: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEngine {
    interference_mode: Option<InterferenceMode>,
    radial_density: Option<RadialDensity>,
    interferer_beams: Option<InterfererBeams>,
    beam_norm: Option<BeamNorm>,
    energy_fraction: Option<f64>,
    subspace_cap: Option<usize>,
    include_no_bs: Option<bool>,
    region_rel_tol: Option<f64>,
    seed: Option<u64>,
}

struct TierDefaults {
    density: f64,
    tx_power_dbm: f64,
    disc_radius: f64,
    los_radius: f64,
}

const MACRO_DEFAULTS: TierDefaults = TierDefaults {
    density: 1e-5,
    tx_power_dbm: 53.0,
    disc_radius: 200.0,
    los_radius: 20.0,
};

const PICO_DEFAULTS: TierDefaults = TierDefaults {
    density: 1e-4,
    tx_power_dbm: 33.0,
    disc_radius: 60.0,
    los_radius: 20.0,
};

const DEFAULT_ALPHA: f64 = 4.0;

impl RawTier {
    fn resolve(&self, d: &TierDefaults) -> TierParams {
        TierParams {
            density: self.density.unwrap_or(d.density),
            tx_power: dbm_to_watts(self.tx_power_dbm.unwrap_or(d.tx_power_dbm)),
            disc_radius: self.disc_radius.unwrap_or(d.disc_radius),
            los_radius: self.los_radius.unwrap_or(d.los_radius),
            alpha_los: self.alpha_los.unwrap_or(DEFAULT_ALPHA),
            alpha_nlos: self.alpha_nlos.unwrap_or(DEFAULT_ALPHA),
        }
    }
}

impl RawConfig {
    fn resolve(self) -> Result<NetworkConfig> {
        let num_antennas = self.array.num_antennas.unwrap_or(128);
        let antenna_spacing = self.array.antenna_spacing.unwrap_or(0.5);
        let raw_groups = self.groups.unwrap_or_else(|| {
            vec![
                RawGroup {
                    aoa_deg: -30.0,
                    spread_deg: 15.0,
                    users: 5,
                    beams: None,
                },
                RawGroup {
                    aoa_deg: 0.0,
                    spread_deg: 15.0,
                    users: 5,
                    beams: None,
                },
            ]
        });
        let groups: Vec<GroupConfig> = raw_groups
            .iter()
            .map(|g| GroupConfig {
                geometry: GroupGeometry {
                    aoa: g.aoa_deg.to_radians(),
                    angular_spread: g.spread_deg.to_radians(),
                    antenna_spacing,
                    num_antennas,
                },
                users: g.users,
                beams: g.beams.unwrap_or(g.users),
            })
            .collect();
        let default_streams: usize = groups.iter().map(|g| g.users).sum();
        let e = self.engine;
        let defaults = EngineConfig::default();
        let cfg = NetworkConfig {
            macro_tier: self.macro_tier.resolve(&MACRO_DEFAULTS),
            pico_tier: self.pico_tier.resolve(&PICO_DEFAULTS),
            carrier_frequency: self.radio.carrier_frequency_hz.unwrap_or(28e9),
            bandwidth: self.radio.bandwidth_hz.unwrap_or(1e9),
            noise_figure_db: self.radio.noise_figure_db.unwrap_or(10.0),
            num_antennas,
            antenna_spacing,
            groups,
            total_streams: self.total_streams.unwrap_or(default_streams),
            user_density: self.user_density.unwrap_or(1e-3),
            engine: EngineConfig {
                interference_mode: e.interference_mode.unwrap_or(defaults.interference_mode),
                radial_density: e.radial_density.unwrap_or(defaults.radial_density),
                interferer_beams: e.interferer_beams.unwrap_or(defaults.interferer_beams),
                beam_norm: e.beam_norm.unwrap_or(defaults.beam_norm),
                energy_fraction: e.energy_fraction.unwrap_or(defaults.energy_fraction),
                subspace_cap: e.subspace_cap.or(defaults.subspace_cap),
                include_no_bs: e.include_no_bs.unwrap_or(defaults.include_no_bs),
                region_rel_tol: e.region_rel_tol.unwrap_or(defaults.region_rel_tol),
                seed: e.seed.unwrap_or(defaults.seed),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = NetworkConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.num_antennas, 128);
        assert_eq!(cfg.num_users(), 10);
        assert_eq!(cfg.groups.len(), 2);
        assert_relative_eq!(cfg.macro_tier.tx_power, dbm_to_watts(53.0), max_relative = 1e-12);
        assert_relative_eq!(cfg.pico_tier.tx_power, dbm_to_watts(33.0), max_relative = 1e-12);
        assert_eq!(cfg.macro_tier.disc_radius, 200.0);
        assert_eq!(cfg.pico_tier.disc_radius, 60.0);
        assert_eq!(cfg.macro_tier.los_radius, 20.0);
        assert_eq!(cfg.pico_tier.los_radius, 20.0);
        assert_eq!(cfg.macro_tier.density, 1e-5);
        assert_eq!(cfg.pico_tier.density, 1e-4);
        assert_eq!(cfg.macro_tier.alpha_los, 4.0);
        assert_eq!(cfg.pico_tier.alpha_nlos, 4.0);
        assert_eq!(cfg.bandwidth, 1e9);
        assert_eq!(cfg.noise_figure_db, 10.0);
        assert_eq!(cfg.carrier_frequency, 28e9);
        assert_relative_eq!(cfg.groups[0].geometry.aoa, -PI / 6.0, epsilon = 1e-15);
        assert_eq!(cfg, NetworkConfig::default());
    }

    #[test]
    fn partial_override_changes_one_field() {
        let cfg = NetworkConfig::from_toml_str("[pico_tier]\ndensity = 3e-4\n").unwrap();
        let mut expected = NetworkConfig::default();
        expected.pico_tier.density = 3e-4;
        assert_eq!(cfg, expected);
    }

    #[test]
    fn negative_density_is_rejected() {
        let err = NetworkConfig::from_toml_str("[macro_tier]\ndensity = -1e-5\n").unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "macro_tier.density"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn los_radius_beyond_disc_is_rejected() {
        let err = NetworkConfig::from_toml_str("[pico_tier]\nlos_radius = 70.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "pico_tier.los_radius"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn parse_error_reports_line() {
        let err = NetworkConfig::from_toml_str("[engine]\nseed = 1\nenergy_fraction = \"x\"\n")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn engine_enums_parse() {
        let cfg = NetworkConfig::from_toml_str(
            "[engine]\ninterference_mode = \"physical\"\nradial_density = \"as-written\"\n",
        )
        .unwrap();
        assert_eq!(cfg.engine.interference_mode, InterferenceMode::Physical);
        assert_eq!(cfg.engine.radial_density, RadialDensity::AsWritten);
    }

    #[test]
    fn derived_quantities() {
        let cfg = NetworkConfig::default();
        assert_relative_eq!(cfg.macro_power(), dbm_to_watts(53.0) / 10.0, max_relative = 1e-12);
        assert_relative_eq!(cfg.power_ratio(), 0.1, max_relative = 1e-3);
        // kappa^2 at 28 GHz
        assert_relative_eq!(cfg.kappa_sq(), 7.26e-7, max_relative = 2e-3);
        assert_eq!(cfg.hash(), NetworkConfig::default().hash());
        assert_ne!(cfg.hash(), cfg.one_tier().hash());
    }

    #[test]
    fn dbm_round_trip() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0);
        assert_relative_eq!(watts_to_dbm(dbm_to_watts(-74.0)), -74.0, epsilon = 1e-12);
    }
}
