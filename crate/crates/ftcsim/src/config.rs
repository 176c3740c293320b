//! Configuration files: circuit descriptions and per-command run blocks.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::pulse::PulseSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read `{0}`: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("cannot parse `{0}`: {1}")]
    Parse(PathBuf, toml::de::Error),
    #[error("run config is missing the `{0}` section required by this command")]
    MissingSection(&'static str),
    #[error("circuit reference missing: set `circuit.path` or an inline `circuit.spec`")]
    MissingCircuit,
}

/// Where the circuit comes from: a separate file or inline.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct CircuitRef {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub spec: Option<CircuitSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepBlock {
    /// Couplers to sweep (one for a line scan, two for a map).
    pub couplers: Vec<String>,
    /// Center of each flux grid (radians); defaults to the idle flux.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Half-width of each grid (radians).
    #[serde(default = "default_halfwidth")]
    pub halfwidth: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_halfwidth() -> f64 {
    0.15
}

fn default_points() -> usize {
    21
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessBlock {
    pub coupler: String,
    /// Maximum |relative error| of the scan, e.g. 0.03 for 3 percent.
    #[serde(default = "default_delta")]
    pub delta_max: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_flux_halfwidth")]
    pub flux_halfwidth: f64,
}

fn default_delta() -> f64 {
    0.03
}

fn default_grid() -> usize {
    5
}

fn default_flux_halfwidth() -> f64 {
    0.3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateBlock {
    pub pulse: PulseSpec,
    /// Write a time-series file alongside the report.
    #[serde(default)]
    pub timeseries: bool,
    /// Dressed-state truncation for the propagation (None = full).
    #[serde(default)]
    pub retain_states: Option<usize>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_rtol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeBlock {
    pub gate_time: f64,
    pub coupler: String,
    /// Seed tone; frequency 0 means "use the analytic prediction".
    #[serde(default)]
    pub seed_frequency: f64,
    #[serde(default = "default_seed_amp")]
    pub seed_amplitude: f64,
    #[serde(default = "default_seed_ramp")]
    pub seed_ramp: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub two_tone: bool,
    #[serde(default = "default_two_tone_budget")]
    pub two_tone_budget: usize,
    #[serde(default = "default_starts")]
    pub two_tone_starts: usize,
    /// Early-stop threshold; 0 disables.
    #[serde(default)]
    pub target: f64,
    #[serde(default = "default_search_rtol")]
    pub rtol_search: f64,
    #[serde(default = "default_rtol")]
    pub rtol_final: f64,
    #[serde(default)]
    pub retain_states: Option<usize>,
}

fn default_seed_amp() -> f64 {
    0.25
}

fn default_seed_ramp() -> f64 {
    8.0
}

fn default_budget() -> usize {
    400
}

fn default_two_tone_budget() -> usize {
    1200
}

fn default_starts() -> usize {
    3
}

fn default_search_rtol() -> f64 {
    1e-7
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectatorBlock {
    /// Run the driven-gate simulation on top of the static analysis.
    #[serde(default)]
    pub gate: Option<GateBlock>,
    /// Spectator qubit index (0-based among qubits); default last.
    #[serde(default)]
    pub spectator: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeBlock {
    /// Modulation amplitude for the drive-coefficient report, radians.
    #[serde(default = "default_analyze_amplitude")]
    pub amplitude: f64,
}

fn default_analyze_amplitude() -> f64 {
    0.25
}

/// One experiment: a circuit plus command-specific blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub circuit: CircuitRef,
    /// Per-node truncation of the joint model.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub robustness: Option<RobustnessBlock>,
    #[serde(default)]
    pub gate: Option<GateBlock>,
    #[serde(default)]
    pub optimize: Option<OptimizeBlock>,
    #[serde(default)]
    pub spectator: Option<SpectatorBlock>,
    #[serde(default)]
    pub analyze: Option<AnalyzeBlock>,
}

fn default_levels() -> usize {
    5
}

pub fn load_circuit(path: &Path) -> Result<CircuitSpec, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(path.to_path_buf(), e))
}

pub fn load_run(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(path.to_path_buf(), e))
}

impl RunConfig {
    /// Resolve the circuit, reading `circuit.path` relative to `base`.
    pub fn circuit_spec(&self, base: &Path) -> Result<CircuitSpec, ConfigError> {
        if let Some(spec) = &self.circuit.spec {
            return Ok(spec.clone());
        }
        if let Some(p) = &self.circuit.path {
            let full = if p.is_absolute() { p.clone() } else { base.join(p) };
            return load_circuit(&full);
        }
        Err(ConfigError::MissingCircuit)
    }
}

/// FNV-1a of the raw config bytes, printed in output metadata headers.
pub fn config_hash(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
