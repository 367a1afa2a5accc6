//! Outage analysis of a two-tier mmWave network whose macro base stations
//! use two-stage (JSDM) precoding: Monte Carlo simulation and
//! semi-analytical evaluation over the same model.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod montecarlo;
pub mod precoding;
pub mod quadrature;
pub mod regions;
pub mod sinr;

pub use analytic::{AnalyticEngine, CurveSource, OutageComponents, OutageCurve, OutageMode, Scenario};
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use geometry::{Association, Tier};
pub use precoding::{JsdmSystem, PrecodingMode};
