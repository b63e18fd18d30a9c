//! JSON run-configuration schema. One document holds exactly one command
//! block; function descriptions reuse the core serde schema
//! (`{"family":"power_log", ...}`).

use std::path::Path;

use parastab::funcs::{ScalarFunction, StructureTriple};
use parastab::pde::EquationSpec;
use parastab::stationary::ShootOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunConfig {
    Check(CheckConfig),
    Sweep(SweepConfig),
    Envelope(EnvelopeConfig),
    Simulate(SimulateConfig),
    Stationary(StationaryConfig),
}

impl RunConfig {
    pub fn block_name(&self) -> &'static str {
        match self {
            RunConfig::Check(_) => "check",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Envelope(_) => "envelope",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Stationary(_) => "stationary",
        }
    }
}

/// One of: a raw structure triple, or an example-family shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckConfig {
    Triple(StructureTriple<f64>),
    PowerFamily(PowerFamilyParams),
    CriticalSpatial(CriticalSpatialParams),
    CriticalAbsorption(CriticalAbsorptionParams),
    GradientAbsorption(GradientAbsorptionParams),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerFamilyParams {
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalSpatialParams {
    pub alpha: f64,
    pub k: f64,
    pub s: f64,
    pub l: f64,
    pub m: f64,
    pub sigma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalAbsorptionParams {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub k: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientAbsorptionParams {
    pub phi: ScalarFunction<f64>,
    pub psi: ScalarFunction<f64>,
    pub epsilon: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

pub fn default_theta() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: PowerFamilyParams,
    /// Swept in order; rows are emitted lexicographically by axis.
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    pub g: ScalarFunction<f64>,
    pub h: ScalarFunction<f64>,
    pub p: ScalarFunction<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_calibration")]
    pub calibration_c: f64,
    pub probe_radius: f64,
    pub t_grid: Vec<f64>,
}

fn default_calibration() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub equation: EquationSpec<f64>,
    pub grid: GridParams,
    pub initial: InitialData,
    pub dt: f64,
    pub t_final: f64,
    pub probe_radius: f64,
    pub sample_every: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridParams {
    pub r_max: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    Constant { amplitude: f64 },
    Gaussian { amplitude: f64, width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryConfig {
    pub equation: EquationSpec<f64>,
    pub a_lo: f64,
    pub a_hi: f64,
    pub r_max: f64,
    #[serde(default)]
    pub options: Option<ShootOptions>,
}

/// Reads and parses the run configuration; parse failures carry the
/// line/column diagnostic from the JSON parser.
pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
