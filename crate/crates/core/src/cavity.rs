//! Ring-cavity design: finesse, escape efficiency, write-emission
//! enhancement, multimode rate gain and pulse/cavity spectral overlap.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{check_positive, invalid, Error, Result};
use crate::quad;

/// Outcoupler transmission `T`, intra-cavity roundtrip loss `L` and the
/// optical roundtrip length of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityParams {
    #[serde(rename = "outcoupler_transmission")]
    pub transmission: f64,
    #[serde(rename = "roundtrip_loss")]
    pub loss: f64,
    /// Meters.
    #[serde(rename = "roundtrip_length_m")]
    pub roundtrip_length: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            transmission: 0.14,
            loss: 0.11,
            roundtrip_length: 0.877,
        }
    }
}

/// Temporal envelope of the write pulse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSpec {
    /// Intensity FWHM of the write pulse, seconds.
    #[serde(rename = "duration_fwhm_s")]
    pub duration_fwhm: f64,
    pub shape: PulseShape,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self::gaussian(266e-9)
    }
}

impl PulseSpec {
    pub fn gaussian(duration_fwhm: f64) -> Self {
        Self {
            duration_fwhm,
            shape: PulseShape::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("duration_fwhm", self.duration_fwhm)
    }

    /// FWHM of the power spectrum, Hz. Transform limited: `2 ln2 / (pi dt)`.
    pub fn spectral_fwhm(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => 2.0 * LN_2 / (PI * self.duration_fwhm),
        }
    }

    /// Standard deviation of the temporal intensity envelope, seconds.
    pub fn temporal_sigma(&self) -> f64 {
        self.duration_fwhm / fwhm_per_sigma()
    }
}

fn fwhm_per_sigma() -> f64 {
    2.0 * (2.0 * LN_2).sqrt()
}

impl CavityParams {
    pub fn new(transmission: f64, loss: f64, roundtrip_length: f64) -> Result<Self> {
        let cav = Self {
            transmission,
            loss,
            roundtrip_length,
        };
        cav.validate()?;
        Ok(cav)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.transmission > 0.0 && self.transmission < 1.0) {
            return Err(invalid("transmission", format!("{} is not in (0, 1)", self.transmission)));
        }
        if !(self.loss >= 0.0 && self.loss < 1.0) {
            return Err(invalid("loss", format!("{} is not in [0, 1)", self.loss)));
        }
        check_positive("roundtrip_length", self.roundtrip_length)
    }

    pub fn reflectivity(&self) -> f64 {
        1.0 - self.transmission
    }

    /// Finesse `pi r^(1/4) / (1 - r^(1/2))` with roundtrip survival
    /// `r = (1 - T)(1 - L)`.
    pub fn finesse(&self) -> Result<f64> {
        let r = (1.0 - self.transmission) * (1.0 - self.loss);
        if !(r < 1.0) || !(r >= 0.0) {
            return Err(Error::DegenerateCavity);
        }
        Ok(PI * r.powf(0.25) / (1.0 - r.sqrt()))
    }

    /// Probability that an intra-cavity photon leaves through the outcoupler.
    pub fn escape_efficiency(&self) -> f64 {
        self.transmission / (self.transmission + self.loss)
    }

    /// Write-emission enhancement `2F/pi`; this is the model's `beta_ratio`.
    pub fn enhancement_factor(&self) -> Result<f64> {
        self.finesse().map(enhancement_from_finesse)
    }

    /// Multimode coincidence-rate gain at equal multimode error:
    /// enhancement times escape efficiency.
    pub fn rate_gain(&self) -> Result<f64> {
        Ok(self.enhancement_factor()? * self.escape_efficiency())
    }

    /// Free spectral range, Hz.
    pub fn fsr(&self) -> f64 {
        SPEED_OF_LIGHT / self.roundtrip_length
    }

    /// Transmission FWHM, Hz.
    pub fn linewidth(&self) -> Result<f64> {
        Ok(linewidth_from(self.fsr(), self.finesse()?))
    }

    /// Normalized Lorentzian transmission at `detuning` Hz from resonance.
    pub fn transmission_spectrum(&self, detuning: f64) -> Result<f64> {
        Ok(lorentzian(self.linewidth()?, detuning))
    }

    /// Enhancement seen by a finite write pulse: `2F/pi` times the overlap
    /// of the pulse power spectrum with the detuned cavity line.
    pub fn effective_enhancement(&self, pulse: &PulseSpec, cavity_detuning: f64) -> Result<f64> {
        let overlap = spectral_overlap(self.linewidth()?, pulse, cavity_detuning)?;
        Ok(self.enhancement_factor()? * overlap)
    }
}

pub fn enhancement_from_finesse(finesse: f64) -> f64 {
    2.0 * finesse / PI
}

pub fn linewidth_from(fsr: f64, finesse: f64) -> f64 {
    fsr / finesse
}

/// Unit-peak Lorentzian with FWHM `linewidth`.
pub fn lorentzian(linewidth: f64, detuning: f64) -> f64 {
    let x = 2.0 * detuning / linewidth;
    1.0 / (1.0 + x * x)
}

/// Overlap of the normalized pulse power spectrum with a unit-peak
/// Lorentzian line of FWHM `linewidth` centred at `detuning`.
///
/// Lies in `(0, 1]`; tends to the Lorentzian value at `detuning` for long
/// pulses.
pub fn spectral_overlap(linewidth: f64, pulse: &PulseSpec, detuning: f64) -> Result<f64> {
    pulse.validate()?;
    check_positive("linewidth", linewidth)?;
    let sigma = pulse.spectral_fwhm() / fwhm_per_sigma();
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let spectrum = |nu: f64| norm * (-0.5 * (nu / sigma).powi(2)).exp();
    let integrand = |nu: f64| spectrum(nu) * lorentzian(linewidth, nu - detuning);
    let reach = 12.0 * sigma;
    let value = quad::integrate(integrand, -reach, reach, &[0.0, detuning], 16, 1e-8);
    Ok(value.min(1.0))
}

/// Result of maximizing the rate gain over the outcoupler transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcouplerOptimum {
    pub transmission: f64,
    pub rate_gain: f64,
}

/// Maximizes [`CavityParams::rate_gain`] over `T` in `range` for a fixed
/// roundtrip loss: a coarse grid locates the peak, golden-section search
/// refines it.
pub fn optimal_outcoupler(loss: f64, range: (f64, f64)) -> Result<OutcouplerOptimum> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi < 1.0 && lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    if !(0.0..1.0).contains(&loss) {
        return Err(invalid("loss", format!("{loss} is not in [0, 1)")));
    }
    let gain = |t: f64| {
        CavityParams {
            transmission: t,
            loss,
            roundtrip_length: 1.0,
        }
        .rate_gain()
        .unwrap_or(f64::NEG_INFINITY)
    };

    // Log-spaced grid: the optimum sits near T = L, which spans decades.
    const GRID: usize = 512;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| (llo + (lhi - llo) * i as f64 / GRID as f64).exp())
        .collect();
    let best = (0..=GRID)
        .max_by(|&a, &b| gain(grid[a]).total_cmp(&gain(grid[b])))
        .expect("grid is non-empty");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (gain(c), gain(d));
    while (b - a) > 1e-13 * b.max(1e-300) {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = gain(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = gain(d);
        }
    }
    let mut t_opt = 0.5 * (a + b);
    let mut g_opt = gain(t_opt);
    // Optimum pinned at a range edge.
    for edge in [lo, hi] {
        let g = gain(edge);
        if g > g_opt {
            t_opt = edge;
            g_opt = g;
        }
    }
    Ok(OutcouplerOptimum {
        transmission: t_opt,
        rate_gain: g_opt,
    })
}
