//! Single-link repeater arithmetic: attempt rate, multiplexing gain and
//! readout latency.

use serde::{Deserialize, Serialize};

use crate::constants::{FIBER_SIGNAL_VELOCITY, SPEED_OF_LIGHT};
use crate::error::{check_positive, check_probability, invalid, Result};

/// Elementary link between two memories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    #[serde(rename = "distance_m")]
    pub distance: f64,
    #[serde(rename = "signal_velocity_m_per_s")]
    pub signal_velocity: f64,
    pub n_modes: u32,
    /// Time until the herald arrives, s.
    #[serde(rename = "herald_time_s")]
    pub herald_time: f64,
    /// Time to act on the herald, s.
    #[serde(rename = "decision_delay_s")]
    pub decision_delay: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            distance: 100e3,
            signal_velocity: FIBER_SIGNAL_VELOCITY,
            n_modes: 1,
            herald_time: 0.0,
            decision_delay: 0.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("distance", self.distance)?;
        check_positive("signal_velocity", self.signal_velocity)?;
        if self.signal_velocity > SPEED_OF_LIGHT {
            return Err(invalid("signal_velocity", "exceeds the vacuum speed of light"));
        }
        if self.n_modes == 0 {
            return Err(invalid("n_modes", "must be >= 1"));
        }
        if !(self.herald_time >= 0.0 && self.herald_time.is_finite()) {
            return Err(invalid("herald_time", "must be finite and >= 0"));
        }
        if !(self.decision_delay >= 0.0 && self.decision_delay.is_finite()) {
            return Err(invalid("decision_delay", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// How stored modes are brought back after the herald.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LatencyMode {
    /// Gradient reversed right after writing; retrieval at `2 (tau + dt)`.
    ImmediateReversal,
    /// Dephasing frozen while waiting; retrieval at `tau + dt + interval`.
    FreezeRelease {
        #[serde(rename = "dephasing_interval_s")]
        dephasing_interval: f64,
    },
}

/// Attempt rate limited by the herald round trip, `v / L`.
pub fn repetition_rate(link: &LinkParams) -> Result<f64> {
    link.validate()?;
    Ok(link.signal_velocity / link.distance)
}

/// Success rate with `n_modes` independent attempts per round trip,
/// `R (1 - (1 - q)^N)`.
pub fn multiplexed_rate(link: &LinkParams, per_mode_success: f64) -> Result<f64> {
    check_probability("per_mode_success", per_mode_success)?;
    let r = repetition_rate(link)?;
    if per_mode_success == 1.0 {
        return Ok(r);
    }
    let all_fail = f64::from(link.n_modes) * (-per_mode_success).ln_1p();
    Ok(-r * all_fail.exp_m1())
}

/// Time from writing until the read photon is retrieved.
pub fn readout_latency(link: &LinkParams, mode: LatencyMode) -> Result<f64> {
    link.validate()?;
    let wait = link.herald_time + link.decision_delay;
    match mode {
        LatencyMode::ImmediateReversal => Ok(2.0 * wait),
        LatencyMode::FreezeRelease { dephasing_interval } => {
            if !(dephasing_interval >= 0.0 && dephasing_interval.is_finite()) {
                return Err(invalid("dephasing_interval", "must be finite and >= 0"));
            }
            Ok(wait + dephasing_interval)
        }
    }
}

/// Storage time needed to retrieve a whole train of `n_modes` spaced by
/// `mode_spacing` with immediate reversal, `2 N spacing`.
pub fn train_storage_requirement(n_modes: u32, mode_spacing: f64) -> f64 {
    2.0 * f64::from(n_modes) * mode_spacing
}
