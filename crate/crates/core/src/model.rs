//! Closed-form photon statistics of a temporally multiplexed DLCZ memory.
//!
//! A write pulse train of `n_modes` temporal modes creates, per mode, a
//! spin wave heralded by a write photon with probability `p`. Reading the
//! rephased mode yields the coherent read photon with intrinsic efficiency
//! `p_int(t)`; every other (dephased) mode, and the unrephased fraction of
//! the read mode, emits incoherently into all directions. Only the fraction
//! `xi_eg * beta_r / beta_w` of that emission lands in the read detection
//! mode, which is why a cavity enhancing the write emission (`beta_w`)
//! suppresses the multimode noise.
//!
//! All functions are first order in `p`; multi-photon emission is ignored.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, invalid, Error, Result};

/// Storage-time decay law of the intrinsic retrieval efficiency.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayShape {
    /// `p_int0 * exp(-t / tau)`
    #[default]
    Exponential,
    /// `p_int0 * exp(-t^2 / tau^2)`
    Gaussian,
}

/// Probabilities and efficiencies of the analytic memory model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryParams {
    /// Spin-wave / write-photon pair creation probability per mode.
    pub p: f64,
    /// Write-photon detection efficiency, cavity escape included.
    pub eta_w: f64,
    /// Read-photon detection efficiency.
    pub eta_r: f64,
    /// Intrinsic retrieval efficiency at zero storage time.
    pub p_int0: f64,
    /// Write/read collection ratio `beta_w / beta_r`; 1 without cavity.
    pub beta_ratio: f64,
    /// Branching ratio of the read transition.
    pub xi_eg: f64,
    /// Number of temporal modes.
    pub n_modes: u32,
    /// 1/e memory lifetime, seconds.
    #[serde(rename = "tau_mem_s")]
    pub tau_mem: f64,
    pub decay_shape: DecayShape,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            p: 0.045,
            eta_w: 0.3,
            eta_r: 0.25,
            p_int0: 0.4,
            beta_ratio: 14.0,
            xi_eg: 1.0,
            n_modes: 1,
            tau_mem: 72e-6,
            decay_shape: DecayShape::Exponential,
        }
    }
}

/// Result of inverting the cross-correlation for the mode count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCapacity {
    Bounded(u64),
    /// No dephased noise reaches the read mode; any mode count complies.
    Unbounded,
}

impl ModeCapacity {
    pub fn bounded(self) -> Option<u64> {
        match self {
            Self::Bounded(n) => Some(n),
            Self::Unbounded => None,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("p", self.p)?;
        check_probability("eta_w", self.eta_w)?;
        check_probability("eta_r", self.eta_r)?;
        check_probability("p_int0", self.p_int0)?;
        if self.beta_ratio.is_nan() || self.beta_ratio < 1.0 {
            return Err(invalid("beta_ratio", format!("{} must be >= 1", self.beta_ratio)));
        }
        if !(self.xi_eg > 0.0 && self.xi_eg <= 1.0) {
            return Err(invalid("xi_eg", format!("{} is not in (0, 1]", self.xi_eg)));
        }
        if self.n_modes == 0 {
            return Err(invalid("n_modes", "must be >= 1"));
        }
        check_positive("tau_mem", self.tau_mem)
    }

    pub fn with_modes(self, n_modes: u32) -> Self {
        Self { n_modes, ..self }
    }

    pub fn with_beta_ratio(self, beta_ratio: f64) -> Self {
        Self { beta_ratio, ..self }
    }

    /// Intrinsic retrieval efficiency after `t` seconds of storage.
    pub fn intrinsic_efficiency(&self, t: f64) -> f64 {
        let x = t / self.tau_mem;
        match self.decay_shape {
            DecayShape::Exponential => self.p_int0 * (-x).exp(),
            DecayShape::Gaussian => self.p_int0 * (-x * x).exp(),
        }
    }

    fn checked_efficiency(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.intrinsic_efficiency(t))
    }

    /// Fraction of incoherent emission reaching the read detection mode,
    /// `xi_eg * beta_r / beta_w`.
    pub fn leakage(&self) -> f64 {
        self.xi_eg / self.beta_ratio
    }

    fn modes(&self) -> f64 {
        f64::from(self.n_modes)
    }

    /// Write click probability per mode, `p * eta_w`.
    pub fn write_prob(&self) -> f64 {
        self.p * self.eta_w
    }

    /// Unconditional read click probability at zero storage time.
    pub fn read_prob(&self) -> f64 {
        self.read_prob_with(self.p_int0)
    }

    /// Write-read coincidence probability at zero storage time.
    pub fn coincidence_prob(&self) -> f64 {
        self.coincidence_prob_with(self.p_int0)
    }

    /// [`read_prob`](Self::read_prob) after `t` seconds of storage.
    pub fn read_prob_at(&self, t: f64) -> Result<f64> {
        Ok(self.read_prob_with(self.checked_efficiency(t)?))
    }

    /// [`coincidence_prob`](Self::coincidence_prob) after `t` seconds of storage.
    pub fn coincidence_prob_at(&self, t: f64) -> Result<f64> {
        Ok(self.coincidence_prob_with(self.checked_efficiency(t)?))
    }

    fn read_prob_with(&self, p_int: f64) -> f64 {
        self.p * self.eta_r * (p_int + (self.modes() - p_int) * self.leakage())
    }

    fn coincidence_prob_with(&self, p_int: f64) -> f64 {
        self.p * self.eta_w * self.eta_r * (p_int + self.p * (self.modes() - p_int) * self.leakage())
    }

    /// Probability to detect a read photon from dephased spin waves given a
    /// write click, after `t` seconds of storage.
    pub fn noise_given_write(&self, t: f64) -> Result<f64> {
        let p_int = self.checked_efficiency(t)?;
        Ok(self.noise_with(p_int))
    }

    pub(crate) fn noise_with(&self, p_int: f64) -> f64 {
        self.p * (self.modes() - p_int) * self.leakage() * self.eta_r
    }

    /// Detected read-out efficiency `p_{r|w}`: coherent retrieval plus noise.
    pub fn retrieval_given_write(&self, t: f64) -> Result<f64> {
        let p_int = self.checked_efficiency(t)?;
        Ok(p_int * self.eta_r + self.noise_with(p_int))
    }

    /// Write-read cross-correlation `g2_{w,r}` after `t` seconds of storage.
    pub fn cross_correlation(&self, t: f64) -> Result<f64> {
        let p_int = self.checked_efficiency(t)?;
        self.cross_correlation_with(p_int)
    }

    pub(crate) fn cross_correlation_with(&self, p_int: f64) -> Result<f64> {
        if self.p <= 0.0 {
            return Err(Error::UndefinedCorrelation("excitation probability is zero"));
        }
        let p = self.p;
        let denom = p * p_int + p * (self.modes() - p_int) * self.leakage();
        if denom <= 0.0 {
            return Err(Error::UndefinedCorrelation("no read emission"));
        }
        Ok(1.0 + p_int * (1.0 - p) / denom)
    }
}

/// Cross-correlation gain `(g2_cav - 1) / (g2_nocav - 1)` from cavity
/// enhancement. The two parameter sets may differ only in `beta_ratio`.
pub fn cavity_gain(with_cavity: &MemoryParams, without_cavity: &MemoryParams, t: f64) -> Result<f64> {
    let aligned = MemoryParams {
        beta_ratio: with_cavity.beta_ratio,
        ..*without_cavity
    };
    if aligned != *with_cavity {
        return Err(Error::Mismatch(
            "cavity and no-cavity parameters must differ only in beta_ratio".into(),
        ));
    }
    let excess_c = with_cavity.cross_correlation(t)? - 1.0;
    let excess_n = without_cavity.cross_correlation(t)? - 1.0;
    if excess_n <= 0.0 {
        return Err(Error::UndefinedCorrelation("no excess correlation without cavity"));
    }
    Ok(excess_c / excess_n)
}

/// Largest mode count whose zero-storage-time cross-correlation stays
/// strictly above `threshold`.
///
/// `g2(N) > threshold` is equivalent to `N < p_int + (p_int (1 - p) / (threshold - 1) - p p_int) / (p leakage)`,
/// so the answer is the largest integer strictly below that bound.
pub fn max_modes(params: &MemoryParams, threshold: f64) -> Result<ModeCapacity> {
    if threshold.is_nan() || threshold <= 1.0 {
        return Err(invalid("threshold", format!("{threshold} must be > 1")));
    }
    if params.p <= 0.0 {
        return Err(Error::UndefinedCorrelation("excitation probability is zero"));
    }
    let (p, p_int, leak) = (params.p, params.p_int0, params.leakage());
    let complies = |n: u64| {
        params
            .with_modes(u32::try_from(n).unwrap_or(u32::MAX))
            .cross_correlation_with(p_int)
            .map(|g| g > threshold)
            .unwrap_or(false)
    };

    if leak == 0.0 {
        return Ok(if complies(1) {
            ModeCapacity::Unbounded
        } else {
            ModeCapacity::Bounded(0)
        });
    }

    let bound = p_int + (p_int * (1.0 - p) / (threshold - 1.0) - p * p_int) / (p * leak);
    if !(bound > 1.0) {
        return Ok(ModeCapacity::Bounded(0));
    }
    if bound >= f64::from(u32::MAX) {
        return Ok(ModeCapacity::Bounded(u64::from(u32::MAX)));
    }
    // ceil(bound) - 1, then nudge across rounding at an exact integer bound.
    let mut n = bound.ceil() as u64 - 1;
    while n > 0 && !complies(n) {
        n -= 1;
    }
    while complies(n + 1) {
        n += 1;
    }
    Ok(ModeCapacity::Bounded(n))
}

/// Cross-correlation evaluated along sorted, non-negative storage times.
pub fn g2_vs_storage(params: &MemoryParams, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be sorted ascending"));
    }
    times
        .iter()
        .map(|&t| params.cross_correlation(t).map(|g| (t, g)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Paper-like multimode parameter set used by several examples.
    fn base() -> MemoryParams {
        MemoryParams {
            p: 0.045,
            eta_w: 0.3,
            eta_r: 0.25,
            p_int0: 0.4,
            beta_ratio: 14.0,
            xi_eg: 1.0,
            n_modes: 10,
            tau_mem: 72e-6,
            decay_shape: DecayShape::Exponential,
        }
    }

    /// Independent route: the coherent/incoherent decomposition with the
    /// collection fractions and spin-excitation numbers written out.
    struct Decomposed {
        p_r: f64,
        p_wr: f64,
    }

    fn decomposed(m: &MemoryParams, p_int: f64) -> Decomposed {
        let beta_w = 0.02;
        let beta_r = beta_w / m.beta_ratio;
        let n_s = m.p / beta_w;
        let n_deph = m.p * (f64::from(m.n_modes) - 1.0) / beta_w;
        let p_r = m.p * p_int * m.eta_r
            + n_s * (1.0 - p_int) * beta_r * m.xi_eg * m.eta_r
            + n_deph * beta_r * m.xi_eg * m.eta_r;
        let p_wr = m.p * p_int * m.eta_w * m.eta_r
            + m.p * m.eta_w * n_s * (1.0 - p_int) * beta_r * m.xi_eg * m.eta_r
            + m.p * m.eta_w * n_deph * beta_r * m.xi_eg * m.eta_r;
        Decomposed { p_r, p_wr }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn write_prob_examples() {
        let m = MemoryParams { p: 0.0, ..base() };
        assert_eq!(m.write_prob(), 0.0);
        let m = MemoryParams { eta_w: 1.0, ..base() };
        assert_eq!(m.write_prob(), 0.045);
        assert!(close(base().write_prob(), 0.0135, 1e-15));
    }

    #[test]
    fn read_prob_examples() {
        let m = MemoryParams {
            p_int0: 1.0,
            n_modes: 1,
            beta_ratio: f64::INFINITY,
            ..base()
        };
        assert!(close(m.read_prob(), m.p * m.eta_r, 1e-15));
        assert!(close(base().read_prob(), 0.045 * 0.25 * (0.4 + 9.6 / 14.0), 1e-15));
        assert!(close(base().read_prob(), 0.012214, 5e-7));
        assert!(close(base().with_beta_ratio(1.0).read_prob(), 0.1125, 1e-12));
        let d = decomposed(&base(), 0.4);
        assert!(close(base().read_prob(), d.p_r, 1e-15));
    }

    #[test]
    fn coincidence_prob_examples() {
        assert_eq!(MemoryParams { p: 0.0, ..base() }.coincidence_prob(), 0.0);
        assert!(close(base().coincidence_prob(), 0.0014542, 1e-7));
        let d = decomposed(&base(), 0.4);
        assert!(close(base().coincidence_prob(), d.p_wr, 1e-15));
        let m = MemoryParams {
            p_int0: 1.0,
            n_modes: 1,
            ..base()
        };
        assert!(close(m.coincidence_prob(), m.p * m.eta_w * m.eta_r, 1e-15));
    }

    #[test]
    fn retrieval_examples() {
        let m = MemoryParams {
            p_int0: 1.0,
            n_modes: 1,
            ..base()
        };
        assert!(close(m.retrieval_given_write(0.0).unwrap(), m.eta_r, 1e-15));
        assert!(close(base().retrieval_given_write(0.0).unwrap(), 0.107714, 5e-7));
        assert!(close(
            base().with_beta_ratio(1.0).retrieval_given_write(0.0).unwrap(),
            0.208,
            1e-12
        ));
        assert_eq!(base().retrieval_given_write(-1e-6), Err(Error::NegativeTime(-1e-6)));
    }

    #[test]
    fn noise_examples() {
        let m = MemoryParams {
            p_int0: 1.0,
            n_modes: 1,
            ..base()
        };
        assert_eq!(m.noise_given_write(0.0).unwrap(), 0.0);
        assert!(close(base().noise_given_write(0.0).unwrap(), 0.0077143, 5e-8));
        let doubled = base().with_beta_ratio(28.0).noise_given_write(0.0).unwrap();
        assert!(close(doubled * 2.0, base().noise_given_write(0.0).unwrap(), 1e-16));
        assert!(base().noise_given_write(-1.0).is_err());
    }

    #[test]
    fn cross_correlation_examples() {
        let m = MemoryParams {
            p: 0.1,
            p_int0: 1.0,
            n_modes: 1,
            ..base()
        };
        assert!(close(m.cross_correlation(0.0).unwrap(), 10.0, 1e-12));
        assert!(close(base().cross_correlation(0.0).unwrap(), 8.819, 5e-4));
        assert!(close(base().with_beta_ratio(1.0).cross_correlation(0.0).unwrap(), 1.849, 5e-4));
        let zero = MemoryParams { p: 0.0, ..base() };
        assert!(matches!(zero.cross_correlation(0.0), Err(Error::UndefinedCorrelation(_))));
    }

    #[test]
    fn cavity_gain_examples() {
        let single = base().with_modes(1);
        assert_eq!(cavity_gain(&single, &single, 0.0).unwrap(), 1.0);
        let g = cavity_gain(&single, &single.with_beta_ratio(1.0), 0.0).unwrap();
        assert!(close(g, 1.0 / (0.4 + 0.6 / 14.0), 1e-12));
        assert!(close(g, 2.3, 0.1));
        let perfect = MemoryParams { p_int0: 1.0, ..single };
        assert!(close(cavity_gain(&perfect, &perfect.with_beta_ratio(1.0), 0.0).unwrap(), 1.0, 1e-12));
        let other = MemoryParams { p: 0.1, ..single };
        assert!(matches!(cavity_gain(&single, &other, 0.0), Err(Error::Mismatch(_))));
    }

    /// Linear scan oracle for `max_modes`.
    fn scan_max_modes(params: &MemoryParams, threshold: f64, limit: u32) -> u32 {
        (1..=limit)
            .take_while(|&n| params.with_modes(n).cross_correlation(0.0).unwrap() > threshold)
            .last()
            .unwrap_or(0)
    }

    #[test]
    fn max_modes_examples() {
        let m = base();
        assert_eq!(max_modes(&m, 5.8).unwrap(), ModeCapacity::Bounded(19));
        assert_eq!(scan_max_modes(&m, 5.8, 1000), 19);
        assert_eq!(
            max_modes(&m.with_beta_ratio(f64::INFINITY), 5.8).unwrap(),
            ModeCapacity::Unbounded
        );
        // g2 at one mode is 1 + 0.382/0.019929 ~ 20.2; anything above fails.
        assert_eq!(max_modes(&m, 25.0).unwrap(), ModeCapacity::Bounded(0));
        assert_eq!(
            max_modes(&m.with_beta_ratio(f64::INFINITY), 1.0 / m.p + 1.0).unwrap(),
            ModeCapacity::Bounded(0)
        );
        assert!(max_modes(&m, 1.0).is_err());
    }

    #[test]
    fn max_modes_matches_scan_across_enhancements() {
        for p_int0 in [0.4, 0.55, 0.7, 0.85, 1.0] {
            for beta in (1..=81).step_by(5) {
                let m = MemoryParams {
                    p_int0,
                    beta_ratio: f64::from(beta),
                    ..base()
                };
                let closed = max_modes(&m, 5.8).unwrap().bounded().unwrap();
                assert_eq!(closed, u64::from(scan_max_modes(&m, 5.8, 2000)), "p_int0={p_int0} beta={beta}");
            }
        }
    }

    #[test]
    fn storage_series_starts_at_zero_time_value() {
        let m = base();
        let s = g2_vs_storage(&m, &[0.0, 10e-6, 72e-6]).unwrap();
        assert_eq!(s[0].1, m.cross_correlation(0.0).unwrap());
        assert!(s.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(g2_vs_storage(&m, &[1e-6, 0.0]).is_err());
    }

    #[test]
    fn storage_decay_drops() {
        let m = MemoryParams {
            p: 0.1,
            p_int0: 0.4,
            n_modes: 1,
            ..base()
        };
        let drop = |m: MemoryParams| {
            let s = g2_vs_storage(&m, &[0.0, m.tau_mem]).unwrap();
            1.0 - (s[1].1 - 1.0) / (s[0].1 - 1.0)
        };
        let without = drop(m.with_beta_ratio(1.0));
        let with = drop(m);
        assert!(close(without, 1.0 - (-1.0f64).exp(), 1e-12));
        assert!(with < 0.25 && with > 0.2);
        // Both decay laws agree at tau.
        let g = MemoryParams {
            decay_shape: DecayShape::Gaussian,
            ..m
        };
        assert!(close(g.intrinsic_efficiency(m.tau_mem), m.intrinsic_efficiency(m.tau_mem), 1e-15));
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(base().validate().is_ok());
        assert!(MemoryParams { p: 1.5, ..base() }.validate().is_err());
        assert!(MemoryParams { beta_ratio: 0.5, ..base() }.validate().is_err());
        assert!(MemoryParams { xi_eg: 0.0, ..base() }.validate().is_err());
        assert!(MemoryParams { n_modes: 0, ..base() }.validate().is_err());
        assert!(MemoryParams { tau_mem: 0.0, ..base() }.validate().is_err());
    }
}
