//! Monte Carlo spin-wave dephasing and rephasing in a cold atomic cloud.
//!
//! Each atom `j` in a spin wave created at `t_w` carries the phase
//!
//! ```text
//! phi_j(t) = k_sw v_j (t - t_w) + 2 pi c_Z * integral_{t_w}^{t} B(z_j(t'), t') dt'
//! ```
//!
//! where `c_Z` is the differential Zeeman coefficient of the spin transition
//! and `z_j(t') = z_j + v_j (t' - t_w)`. The field integral is evaluated in
//! closed form per gradient segment (see [`FieldTimeline::moments`]), so no
//! time stepping is involved. Collective read-out efficiency follows from
//! the squared modulus of the mean phasor.

mod timeline;

pub use timeline::{FieldMoments, FieldTimeline, GradientSegment, DEFAULT_REPHASING_HORIZON};

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::PulseSpec;
use crate::constants::{BOLTZMANN, RB87_D2_WAVELENGTH, RB87_MASS, RB87_SPIN_WAVE_ZEEMAN};
use crate::error::{check_positive, invalid, Result};
use crate::rng::{substream, DOMAIN_ATOMS};
use crate::stats::Estimate;

/// Motional 1/e lifetime used to pick the default spin-wave wavevector, s.
pub const DEFAULT_MOTIONAL_LIFETIME: f64 = 72e-6;

/// Creation-time quadrature nodes across the write pulse in [`AtomEnsemble::echo_profile`].
pub const ECHO_PULSE_NODES: usize = 65;

/// One-dimensional thermal velocity spread of Rb-87, m/s.
pub fn velocity_sigma(temperature: f64) -> f64 {
    (BOLTZMANN * temperature / RB87_MASS).sqrt()
}

/// Spin-wave wavevector giving a Gaussian motional decay with 1/e time
/// `lifetime` at `temperature`, `1 / (sigma_v lifetime)`.
pub fn motional_wavevector(temperature: f64, lifetime: f64) -> f64 {
    1.0 / (velocity_sigma(temperature) * lifetime)
}

/// `|k_W - k_w|` for write beam and write photon at `angle` radians,
/// both at `wavelength`.
pub fn spin_wave_wavevector(wavelength: f64, angle: f64) -> f64 {
    2.0 * (2.0 * PI / wavelength) * (0.5 * angle).sin()
}

/// Gaussian RMS width for a cloud of full length `length`.
pub fn cloud_sigma_from_length(length: f64) -> f64 {
    length / 4.0
}

/// Sampling recipe for an [`AtomEnsemble`], as read from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n_atoms: usize,
    /// Full cloud length; the Gaussian sigma is a quarter of it.
    #[serde(rename = "cloud_length_m")]
    pub cloud_length: f64,
    #[serde(rename = "temperature_k")]
    pub temperature: f64,
    /// Spin-wave wavevector; defaults to a 72 us motional lifetime.
    #[serde(rename = "k_sw_per_m", skip_serializing_if = "Option::is_none")]
    pub k_sw: Option<f64>,
    #[serde(rename = "zeeman_coeff_hz_per_g")]
    pub zeeman_coeff: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            n_atoms: 10_000,
            cloud_length: 8e-3,
            temperature: 40e-6,
            k_sw: None,
            zeeman_coeff: RB87_SPIN_WAVE_ZEEMAN,
        }
    }
}

impl EnsembleSpec {
    pub fn k_sw(&self) -> f64 {
        self.k_sw.unwrap_or_else(|| {
            if self.temperature > 0.0 {
                motional_wavevector(self.temperature, DEFAULT_MOTIONAL_LIFETIME)
            } else {
                0.0
            }
        })
    }

    pub fn sample(&self, seed: u64) -> Result<AtomEnsemble> {
        sample_ensemble(
            self.n_atoms,
            cloud_sigma_from_length(self.cloud_length),
            self.temperature,
            self.k_sw(),
            self.zeeman_coeff,
            seed,
        )
    }
}

/// Sampled atom positions and velocities along the gradient axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomEnsemble {
    /// Meters.
    pub positions: Vec<f64>,
    /// Meters per second.
    pub velocities: Vec<f64>,
    pub cloud_sigma: f64,
    pub temperature: f64,
    /// Radians per meter.
    pub k_sw: f64,
    /// Hertz per gauss.
    pub zeeman_coeff: f64,
}

/// Accumulated per-atom phases at a query time.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub write_time: f64,
    pub phases: Vec<f64>,
}

/// Draws `n_atoms` atoms with Gaussian positions and Maxwell-Boltzmann
/// velocities. Atom `j` uses its own random substream, so the result
/// depends only on `seed`.
pub fn sample_ensemble(
    n_atoms: usize,
    cloud_sigma: f64,
    temperature: f64,
    k_sw: f64,
    zeeman_coeff: f64,
    seed: u64,
) -> Result<AtomEnsemble> {
    if n_atoms == 0 {
        return Err(invalid("n_atoms", "must be >= 1"));
    }
    check_positive("cloud_sigma", cloud_sigma)?;
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(invalid("temperature", format!("{temperature} must be >= 0")));
    }
    if !(k_sw >= 0.0 && k_sw.is_finite()) {
        return Err(invalid("k_sw", format!("{k_sw} must be >= 0")));
    }
    check_positive("zeeman_coeff", zeeman_coeff)?;

    let sigma_v = velocity_sigma(temperature);
    let (positions, velocities) = (0..n_atoms as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, DOMAIN_ATOMS, j);
            let z: f64 = StandardNormal.sample(&mut rng);
            let v: f64 = StandardNormal.sample(&mut rng);
            (cloud_sigma * z, sigma_v * v)
        })
        .unzip();
    Ok(AtomEnsemble {
        positions,
        velocities,
        cloud_sigma,
        temperature,
        k_sw,
        zeeman_coeff,
    })
}

impl AtomEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Angular two-photon detuning, rad/s, in a field of `field` gauss.
    pub fn zeeman_detuning(&self, field: f64) -> f64 {
        2.0 * PI * self.zeeman_coeff * field
    }

    /// Same ensemble with all velocities zeroed.
    pub fn frozen(&self) -> Self {
        Self {
            velocities: vec![0.0; self.len()],
            temperature: 0.0,
            ..self.clone()
        }
    }

    fn phase_fn(&self, timeline: &FieldTimeline, write_time: f64, t: f64) -> Result<impl Fn(usize) -> f64 + '_> {
        let m = timeline.moments(write_time, t)?;
        let w = 2.0 * PI * self.zeeman_coeff;
        let common = w * m.bias_area;
        let per_z = w * m.position_area;
        let per_v = w * m.velocity_area + self.k_sw * (t - write_time);
        Ok(move |j: usize| common + per_z * self.positions[j] + per_v * self.velocities[j])
    }

    pub fn accumulate_phase(&self, timeline: &FieldTimeline, write_time: f64, t: f64) -> Result<PhaseState> {
        let phase = self.phase_fn(timeline, write_time, t)?;
        Ok(PhaseState {
            write_time,
            phases: (0..self.len()).map(phase).collect(),
        })
    }

    /// `p_int0 |<exp(i phi)>|^2` for a spin wave written at `write_time`.
    pub fn collective_efficiency(&self, timeline: &FieldTimeline, write_time: f64, t: f64, p_int0: f64) -> Result<f64> {
        let phase = self.phase_fn(timeline, write_time, t)?;
        let (re, im) = (0..self.len()).fold((0.0, 0.0), |(re, im), j| {
            let (s, c) = phase(j).sin_cos();
            (re + c, im + s)
        });
        let n = self.len() as f64;
        Ok(p_int0 * (re * re + im * im) / (n * n))
    }

    /// [`collective_efficiency`](Self::collective_efficiency) with a Monte
    /// Carlo standard error.
    ///
    /// The error combines the delta-method spread of `|mean|^2` with its
    /// `(1 - |mean|^2) / N` finite-sample bias.
    pub fn coherence_estimate(&self, timeline: &FieldTimeline, write_time: f64, t: f64, p_int0: f64) -> Result<Estimate> {
        let state = self.accumulate_phase(timeline, write_time, t)?;
        Ok(coherence_of(&state.phases, p_int0))
    }

    /// Read-out efficiency versus time for a spin wave created anywhere
    /// within a Gaussian write pulse centred at `write_time`.
    ///
    /// Creation times are weighted by the pulse envelope across +-3 sigma;
    /// grid times before a given creation time contribute zero for it.
    pub fn echo_profile(
        &self,
        timeline: &FieldTimeline,
        write_time: f64,
        pulse: &PulseSpec,
        p_int0: f64,
        grid: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        pulse.validate()?;
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("time_grid", "must be sorted ascending"));
        }
        let sigma = pulse.temporal_sigma();
        let nodes: Vec<(f64, f64)> = (0..ECHO_PULSE_NODES)
            .map(|k| {
                let x = -3.0 + 6.0 * k as f64 / (ECHO_PULSE_NODES - 1) as f64;
                (write_time + x * sigma, (-0.5 * x * x).exp())
            })
            .collect();
        let norm: f64 = nodes.iter().map(|n| n.1).sum();

        grid.par_iter()
            .map(|&t| {
                let mut acc = 0.0;
                for &(tc, w) in &nodes {
                    if t >= tc {
                        acc += w * self.collective_efficiency(timeline, tc, t, p_int0)?;
                    }
                }
                Ok((t, acc / norm))
            })
            .collect()
    }
}

/// `p_int0 |<exp(i phi)>|^2` with its Monte Carlo standard error.
pub fn coherence_of(phases: &[f64], p_int0: f64) -> Estimate {
    let n = phases.len() as f64;
    let (re, im) = phases.iter().fold((0.0, 0.0), |(re, im), &p| {
        let (s, c) = p.sin_cos();
        (re + c, im + s)
    });
    let (mr, mi) = (re / n, im / n);
    let modsq = mr * mr + mi * mi;
    // Var of Re(conj(m) z_j) drives the delta-method error of |m|^2.
    let var = phases
        .iter()
        .map(|&p| {
            let proj = mr * p.cos() + mi * p.sin();
            (proj - modsq).powi(2)
        })
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let stderr = 2.0 * (var / n).sqrt() + (1.0 - modsq).max(0.0) / n;
    Estimate::new(p_int0 * modsq, p_int0 * stderr)
}

/// Programmed rephasing time of a spin wave written at `write_time`.
pub fn rephasing_time(timeline: &FieldTimeline, write_time: f64) -> Result<f64> {
    timeline.rephasing_time(write_time)
}

/// Write-beam/photon angle that yields wavevector `k_sw` on the D2 line.
pub fn angle_for_wavevector(k_sw: f64) -> f64 {
    2.0 * (k_sw / (2.0 * 2.0 * PI / RB87_D2_WAVELENGTH)).asin()
}
