//! Scenario configuration: JSON schema, defaults and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use muxmem_core::cavity::{CavityParams, PulseSpec};
use muxmem_core::ensemble::{EnsembleSpec, FieldTimeline};
use muxmem_core::model::MemoryParams;
use muxmem_core::protocol::{ReadoutTiming, DEFAULT_MODE_SPACING, DEFAULT_WRITE_DURATION};
use muxmem_core::repeater::LinkParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ModeSweep,
    MaxModes,
    CavityDesign,
    PulseEnhancement,
    Echo,
    ProtocolRun,
    Crosstalk,
    StorageDecay,
    RepeaterRate,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Self::ModeSweep,
        Self::MaxModes,
        Self::CavityDesign,
        Self::PulseEnhancement,
        Self::Echo,
        Self::ProtocolRun,
        Self::Crosstalk,
        Self::StorageDecay,
        Self::RepeaterRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ModeSweep => "mode-sweep",
            Self::MaxModes => "max-modes",
            Self::CavityDesign => "cavity-design",
            Self::PulseEnhancement => "pulse-enhancement",
            Self::Echo => "echo",
            Self::ProtocolRun => "protocol-run",
            Self::Crosstalk => "crosstalk",
            Self::StorageDecay => "storage-decay",
            Self::RepeaterRate => "repeater-rate",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Write-train layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n_modes: u32,
    #[serde(rename = "mode_spacing_s")]
    pub mode_spacing: f64,
    #[serde(rename = "write_duration_s")]
    pub write_duration: f64,
    pub timing: ReadoutTiming,
    /// Programmed gradient used when no explicit timeline is given.
    #[serde(rename = "gradient_g_per_cm")]
    pub gradient: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            n_modes: 6,
            mode_spacing: DEFAULT_MODE_SPACING,
            write_duration: DEFAULT_WRITE_DURATION,
            timing: ReadoutTiming::ImmediateAfterLast,
            gradient: 5.0,
        }
    }
}

/// Sweep ranges and scenario-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub beta_ratios: Vec<f64>,
    /// Largest mode count of the mode sweep.
    pub max_modes: u32,
    /// Cross-correlation threshold for the mode capacity.
    pub threshold: f64,
    pub roundtrip_losses: Vec<f64>,
    pub reflectivity_points: usize,
    #[serde(rename = "pulse_durations_s")]
    pub pulse_durations: Vec<f64>,
    #[serde(rename = "detuning_span_hz")]
    pub detuning_span: f64,
    pub detuning_points: usize,
    #[serde(rename = "echo_write_time_s")]
    pub echo_write_time: f64,
    #[serde(rename = "echo_half_window_s")]
    pub echo_half_window: f64,
    pub echo_points: usize,
    #[serde(rename = "storage_max_s")]
    pub storage_max: f64,
    pub storage_points: usize,
    /// Longest train of the protocol run.
    pub train_modes: u32,
    #[serde(rename = "drift_rate_per_s")]
    pub drift_rate: f64,
    #[serde(rename = "distances_m")]
    pub distances: Vec<f64>,
    pub mode_counts: Vec<u32>,
    pub per_mode_success: f64,
    #[serde(rename = "dephasing_interval_s")]
    pub dephasing_interval: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            beta_ratios: (0..9).map(|i| 1.0 + 10.0 * f64::from(i)).collect(),
            max_modes: 100,
            threshold: 5.8,
            roundtrip_losses: vec![0.11, 0.01],
            reflectivity_points: 99,
            pulse_durations: vec![133e-9, 266e-9, 532e-9, 1064e-9],
            detuning_span: 100e6,
            detuning_points: 201,
            echo_write_time: 2e-6,
            echo_half_window: 4e-6,
            echo_points: 401,
            storage_max: 200e-6,
            storage_points: 101,
            train_modes: 10,
            drift_rate: 1e3,
            distances: vec![25e3, 50e3, 100e3, 200e3],
            mode_counts: vec![1, 10, 100],
            per_mode_success: 1e-3,
            dephasing_interval: 0.0,
        }
    }
}

/// One scenario run. Parameter blocks left out take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub memory: MemoryParams,
    #[serde(default)]
    pub cavity: CavityParams,
    #[serde(default)]
    pub pulse: PulseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeline: Option<FieldTimeline>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from(".")
}

fn default_trials() -> u64 {
    100_000
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario: Some(scenario),
            ..parse_config("{}").expect("empty config is valid")
        }
    }

    /// Scenario named in the file, or an error when none is given.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        self.scenario
            .ok_or_else(|| CliError::Config("no scenario given".into()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let ctx = |block: &'static str| move |e: muxmem_core::Error| CliError::Config(format!("{block}: {e}"));
        self.memory.validate().map_err(ctx("memory"))?;
        self.cavity.validate().map_err(ctx("cavity"))?;
        self.pulse.validate().map_err(ctx("pulse"))?;
        if let Some(tl) = &self.timeline {
            tl.validate().map_err(ctx("timeline"))?;
        }
        self.link.validate().map_err(ctx("link"))?;
        let s = &self.schedule;
        if s.n_modes == 0 {
            return Err(CliError::Config("schedule.n_modes: must be >= 1".into()));
        }
        if !(s.write_duration > 0.0 && s.write_duration < s.mode_spacing) {
            return Err(CliError::Config(
                "schedule.write_duration_s: must be positive and below schedule.mode_spacing_s".into(),
            ));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials: must be >= 1".into()));
        }
        let w = &self.sweep;
        if w.beta_ratios.iter().any(|b| !(*b >= 1.0)) {
            return Err(CliError::Config("sweep.beta_ratios: entries must be >= 1".into()));
        }
        if !(w.threshold > 1.0) {
            return Err(CliError::Config("sweep.threshold: must be > 1".into()));
        }
        if w.roundtrip_losses.iter().any(|l| !(0.0..1.0).contains(l)) {
            return Err(CliError::Config("sweep.roundtrip_losses: entries must lie in [0, 1)".into()));
        }
        if w.pulse_durations.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::Config("sweep.pulse_durations_s: entries must be > 0 s".into()));
        }
        for (name, n) in [
            ("sweep.reflectivity_points", w.reflectivity_points),
            ("sweep.detuning_points", w.detuning_points),
            ("sweep.echo_points", w.echo_points),
            ("sweep.storage_points", w.storage_points),
        ] {
            if n < 2 {
                return Err(CliError::Config(format!("{name}: must be >= 2")));
            }
        }
        if w.max_modes == 0 || w.train_modes == 0 || w.mode_counts.contains(&0) {
            return Err(CliError::Config("sweep: mode counts must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&w.per_mode_success) {
            return Err(CliError::Config("sweep.per_mode_success: must lie in [0, 1]".into()));
        }
        if w.distances.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::Config("sweep.distances_m: entries must be > 0 m".into()));
        }
        if !(w.storage_max > 0.0) || !(w.echo_half_window > 0.0) || !(w.detuning_span > 0.0) {
            return Err(CliError::Config("sweep: spans must be > 0".into()));
        }
        Ok(())
    }
}

/// Parses and validates a JSON scenario configuration.
///
/// Errors name the offending field path, e.g. `memory.tau_mem_s`.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_blocks_take_defaults() {
        let cfg = parse_config(r#"{"scenario": "cavity-design", "cavity": {}, "memory": {}}"#).unwrap();
        assert_eq!(cfg.scenario, Some(Scenario::CavityDesign));
        assert_eq!(cfg.cavity, CavityParams::default());
        assert_eq!(cfg.memory.p, 0.045);
        assert_eq!(cfg.memory.beta_ratio, 14.0);
        assert_eq!(cfg.memory.tau_mem, 72e-6);
        assert_eq!(cfg.schedule.mode_spacing, 800e-9);
        assert_eq!(cfg.pulse.duration_fwhm, 266e-9);
        assert_eq!(cfg.link.signal_velocity, 2e8);
        assert_eq!(cfg.ensemble.zeeman_coeff, 1.4e6);
    }

    #[test]
    fn bad_probability_names_field() {
        let err = parse_config(r#"{"memory": {"p": 1.5}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("memory") && msg.contains("`p`"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_and_mistyped_keys_report_path() {
        let err = parse_config(r#"{"memory": {"tau_mem": 1e-6}}"#).unwrap_err();
        assert!(err.to_string().contains("tau_mem"), "{err}");
        let err = parse_config(r#"{"cavity": {"roundtrip_length_m": "long"}}"#).unwrap_err();
        assert!(err.to_string().contains("cavity.roundtrip_length_m"), "{err}");
        assert!(parse_config(r#"{"colour": 1}"#).is_err());
        assert!(parse_config(r#"{"scenario": "plot"}"#).is_err());
    }

    #[test]
    fn defaults_round_trip() {
        for sc in Scenario::ALL {
            let cfg = ScenarioConfig::new(sc);
            assert_eq!(parse_config(&to_json(&cfg)).unwrap(), cfg);
        }
        let mut cfg = ScenarioConfig::new(Scenario::Echo);
        cfg.timeline = Some(FieldTimeline::reversal(1.0, 5e-6).with_drift(10.0));
        cfg.schedule.timing = ReadoutTiming::FreezeRelease {
            t_freeze: 5e-6,
            t_release: 9e-6,
        };
        assert_eq!(parse_config(&to_json(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn scenario_names_parse() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
    }
}
