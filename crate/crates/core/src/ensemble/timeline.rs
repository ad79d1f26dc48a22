use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss per centimeter to gauss per meter.
const PER_CM: f64 = 100.0;

/// Default search horizon for [`FieldTimeline::rephasing_time`], seconds.
pub const DEFAULT_REPHASING_HORIZON: f64 = 1.0;

/// One piece of the programmed gradient amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientSegment {
    #[serde(rename = "t_start_s")]
    pub t_start: f64,
    #[serde(rename = "gradient_g_per_cm")]
    pub gradient: f64,
}

/// Piecewise-constant magnetic gradient along the photon axis, with a
/// uniform bias and a fractional linear drift of the gradient amplitude.
///
/// The gradient at time `t` inside segment `s` is
/// `segments[s].gradient * (1 + drift_rate * t)`; the last segment extends
/// to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTimeline {
    pub segments: Vec<GradientSegment>,
    #[serde(rename = "bias_g", default)]
    pub bias: f64,
    #[serde(rename = "drift_rate_per_s", default)]
    pub drift_rate: f64,
}

/// Time integrals of the field between spin-wave creation and a query time.
///
/// An atom at `z + v (t' - t_w)` accumulates a Zeeman phase proportional to
/// `bias_area + position_area * z + velocity_area * v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMoments {
    /// Gauss seconds.
    pub bias_area: f64,
    /// Gauss per meter times seconds.
    pub position_area: f64,
    /// Gauss per meter times seconds squared.
    pub velocity_area: f64,
}

impl FieldTimeline {
    pub fn constant(gradient: f64) -> Self {
        Self::from_segments(&[(0.0, gradient)])
    }

    /// `+gradient` until `t_reverse`, `-gradient` afterwards.
    pub fn reversal(gradient: f64, t_reverse: f64) -> Self {
        Self::from_segments(&[(0.0, gradient), (t_reverse, -gradient)])
    }

    /// `+gradient` until `t_freeze`, nulled until `t_release`, then reversed.
    pub fn freeze_release(gradient: f64, t_freeze: f64, t_release: f64) -> Self {
        Self::from_segments(&[(0.0, gradient), (t_freeze, 0.0), (t_release, -gradient)])
    }

    pub fn from_segments(segments: &[(f64, f64)]) -> Self {
        Self {
            segments: segments
                .iter()
                .map(|&(t_start, gradient)| GradientSegment { t_start, gradient })
                .collect(),
            bias: 0.0,
            drift_rate: 0.0,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_drift(mut self, drift_rate: f64) -> Self {
        self.drift_rate = drift_rate;
        self
    }

    /// The programmed timeline, as calibrated without drift.
    pub fn without_drift(&self) -> Self {
        self.clone().with_drift(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .segments
            .first()
            .ok_or_else(|| Error::Timeline("at least one segment is required".into()))?;
        if first.t_start != 0.0 {
            return Err(Error::Timeline(format!(
                "first segment must start at 0 s, got {} s",
                first.t_start
            )));
        }
        if self.segments.iter().any(|s| !s.t_start.is_finite() || !s.gradient.is_finite()) {
            return Err(Error::Timeline("segment values must be finite".into()));
        }
        if self.segments.windows(2).any(|w| w[1].t_start <= w[0].t_start) {
            return Err(Error::Timeline("segment start times must be strictly increasing".into()));
        }
        if !self.bias.is_finite() || !self.drift_rate.is_finite() {
            return Err(Error::Timeline("bias and drift rate must be finite".into()));
        }
        Ok(())
    }

    /// Drift-free programmed gradient in G/cm at time `t`.
    pub fn programmed_gradient(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.t_start <= t);
        self.segments[idx.saturating_sub(1)].gradient
    }

    /// Gradient in G/cm at time `t`, drift included.
    pub fn gradient_at(&self, t: f64) -> f64 {
        self.programmed_gradient(t) * (1.0 + self.drift_rate * t)
    }

    /// `(start, end, gradient in G/m)` pieces overlapping `[from, to]`.
    fn pieces(&self, from: f64, to: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.segments.iter().enumerate().filter_map(move |(i, s)| {
            let end = self.segments.get(i + 1).map_or(f64::INFINITY, |n| n.t_start);
            let lo = s.t_start.max(from);
            let hi = end.min(to);
            (hi > lo).then_some((lo, hi, s.gradient * PER_CM))
        })
    }

    /// Field integrals from `write_time` to `t`, exact per segment.
    pub fn moments(&self, write_time: f64, t: f64) -> Result<FieldMoments> {
        if t < write_time {
            return Err(Error::BeforeWrite { t, write_time });
        }
        let d = self.drift_rate;
        let mut position_area = 0.0;
        let mut velocity_area = 0.0;
        for (lo, hi, g) in self.pieces(write_time, t) {
            position_area += g * ((hi - lo) + 0.5 * d * (hi * hi - lo * lo));
            let (ul, uh) = (lo - write_time, hi - write_time);
            velocity_area += g
                * ((1.0 + d * write_time) * 0.5 * (uh * uh - ul * ul)
                    + d * (uh * uh * uh - ul * ul * ul) / 3.0);
        }
        Ok(FieldMoments {
            bias_area: self.bias * (t - write_time),
            position_area,
            velocity_area,
        })
    }

    /// First time after `write_time` at which the position-proportional
    /// phase integral returns to zero, searched up to 1 s.
    pub fn rephasing_time(&self, write_time: f64) -> Result<f64> {
        self.rephasing_time_within(write_time, DEFAULT_REPHASING_HORIZON)
    }

    /// As [`rephasing_time`](Self::rephasing_time) with an explicit horizon.
    ///
    /// Within a segment the integral is quadratic in time (linear without
    /// drift), so each crossing is solved in closed form.
    pub fn rephasing_time_within(&self, write_time: f64, horizon: f64) -> Result<f64> {
        self.validate()?;
        let d = self.drift_rate;
        let mut accumulated = 0.0;
        for (lo, hi, g) in self.pieces(write_time, horizon) {
            if g != 0.0 {
                // accumulated + g * [(t - lo) + d/2 (t^2 - lo^2)] = 0
                let roots = if accumulated == 0.0 {
                    // Roots are `lo` itself and the drift sign flip.
                    [(d != 0.0).then(|| -2.0 / d - lo), None]
                } else {
                    quadratic_roots(0.5 * d, 1.0, accumulated / g - lo - 0.5 * d * lo * lo)
                };
                let root = roots
                    .into_iter()
                    .flatten()
                    .filter(|&r| r > lo && r <= hi)
                    .min_by(f64::total_cmp);
                if let Some(r) = root {
                    return Ok(r);
                }
                accumulated += g * ((hi - lo) + 0.5 * d * (hi * hi - lo * lo));
            }
        }
        Err(Error::NoRephasing { write_time, horizon })
    }
}

/// Real roots of `a x^2 + b x + c`, numerically stable.
fn quadratic_roots(a: f64, b: f64, c: f64) -> [Option<f64>; 2] {
    if a == 0.0 {
        return [(b != 0.0).then(|| -c / b), None];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return [None, None];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    [Some(r1), Some(r2)]
}
