use serde::{Deserialize, Serialize};

use crate::ensemble::FieldTimeline;
use crate::error::{check_positive, invalid, Error, Result};

/// Default interval between write pulses, s.
pub const DEFAULT_MODE_SPACING: f64 = 800e-9;
/// Default write pulse FWHM, s.
pub const DEFAULT_WRITE_DURATION: f64 = 266e-9;

/// How the gradient is reversed after the write train.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ReadoutTiming {
    /// Gradient flips sign once the last write pulse has ended.
    #[default]
    ImmediateAfterLast,
    /// Gradient nulled on `[t_freeze, t_release)`, then reversed.
    FreezeRelease {
        #[serde(rename = "t_freeze_s")]
        t_freeze: f64,
        #[serde(rename = "t_release_s")]
        t_release: f64,
    },
}

/// Write and feed-forward read times of a multimode train.
///
/// Mode `m` is written at `m * mode_spacing` (pulse centre) and read at
/// the rephasing time of the drift-free timeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub n_modes: u32,
    pub mode_spacing: f64,
    pub write_duration: f64,
    pub timing: ReadoutTiming,
    pub write_times: Vec<f64>,
    pub readout_times: Vec<f64>,
    /// Extra multiplicative factor on the coherent retrieval of each mode,
    /// 1 unless the realised field deviates from the programmed one.
    pub retrieval_factors: Vec<f64>,
}

impl Schedule {
    /// Builds the schedule for `timeline`, which must realise `timing`.
    pub fn build(
        n_modes: u32,
        mode_spacing: f64,
        write_duration: f64,
        timeline: &FieldTimeline,
        timing: ReadoutTiming,
    ) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("n_modes", "must be >= 1"));
        }
        check_positive("mode_spacing", mode_spacing)?;
        check_positive("write_duration", write_duration)?;
        if write_duration >= mode_spacing {
            return Err(invalid(
                "write_duration",
                format!("{write_duration} s must be shorter than the mode spacing {mode_spacing} s"),
            ));
        }
        timeline.validate()?;
        let write_times: Vec<f64> = (0..n_modes).map(|m| f64::from(m) * mode_spacing).collect();
        let train_end = write_times[write_times.len() - 1] + 0.5 * write_duration;
        check_timing(timeline, timing, train_end)?;

        let programmed = timeline.without_drift();
        let readout_times = write_times
            .iter()
            .map(|&tw| programmed.rephasing_time(tw))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_modes,
            mode_spacing,
            write_duration,
            timing,
            write_times,
            readout_times,
            retrieval_factors: vec![1.0; n_modes as usize],
        })
    }

    /// Timeline of gradient `gradient` (G/cm) realising `timing` for a
    /// train of `n_modes`. Immediate reversal happens half a spacing after
    /// the last write pulse centre.
    pub fn timeline_for(n_modes: u32, mode_spacing: f64, gradient: f64, timing: ReadoutTiming) -> FieldTimeline {
        match timing {
            ReadoutTiming::ImmediateAfterLast => {
                let t_rev = (f64::from(n_modes.max(1)) - 0.5) * mode_spacing;
                FieldTimeline::reversal(gradient, t_rev)
            }
            ReadoutTiming::FreezeRelease { t_freeze, t_release } => {
                FieldTimeline::freeze_release(gradient, t_freeze, t_release)
            }
        }
    }

    pub fn with_retrieval_factors(mut self, factors: Vec<f64>) -> Result<Self> {
        if factors.len() != self.n_modes as usize {
            return Err(Error::Mismatch(format!(
                "{} retrieval factors for {} modes",
                factors.len(),
                self.n_modes
            )));
        }
        if factors.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(invalid("retrieval_factors", "must lie in [0, 1]"));
        }
        self.retrieval_factors = factors;
        Ok(self)
    }

    /// Storage time of mode `m`.
    pub fn storage_time(&self, m: usize) -> f64 {
        self.readout_times[m] - self.write_times[m]
    }

    /// Modes in the order they are read out.
    pub fn readout_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_modes as usize).collect();
        order.sort_by(|&a, &b| self.readout_times[a].total_cmp(&self.readout_times[b]));
        order
    }
}

fn check_timing(timeline: &FieldTimeline, timing: ReadoutTiming, train_end: f64) -> Result<()> {
    let g0 = timeline.programmed_gradient(0.0);
    if g0 == 0.0 {
        return Err(Error::Timeline("gradient must be on while writing".into()));
    }
    let reversed = |t: f64| timeline.programmed_gradient(t) * g0 < 0.0;
    match timing {
        ReadoutTiming::ImmediateAfterLast => {
            let t_rev = timeline
                .segments
                .iter()
                .map(|s| s.t_start)
                .find(|&t| timeline.programmed_gradient(t) * g0 <= 0.0)
                .ok_or_else(|| Error::Timeline("gradient is never reversed".into()))?;
            if t_rev < train_end {
                return Err(Error::Timeline(format!(
                    "reversal at {t_rev} s precedes the end of the write train at {train_end} s"
                )));
            }
            if !reversed(t_rev) {
                return Err(Error::Timeline("immediate policy expects a direct sign flip".into()));
            }
        }
        ReadoutTiming::FreezeRelease { t_freeze, t_release } => {
            if !(t_freeze >= train_end && t_release > t_freeze) {
                return Err(Error::Timeline(format!(
                    "freeze at {t_freeze} s and release at {t_release} s must follow the train end at {train_end} s in order"
                )));
            }
            let frozen = timeline
                .segments
                .iter()
                .filter(|s| s.t_start >= t_freeze && s.t_start < t_release)
                .all(|s| s.gradient == 0.0)
                && timeline.programmed_gradient(t_freeze) == 0.0;
            if !frozen || !reversed(t_release) {
                return Err(Error::Timeline(
                    "timeline does not null the gradient between freeze and release and reverse it afterwards".into(),
                ));
            }
            if timeline.segments.iter().any(|s| s.t_start > 0.0 && s.t_start < t_freeze && s.gradient != g0) {
                return Err(Error::Timeline("gradient changes before the freeze".into()));
            }
        }
    }
    Ok(())
}
