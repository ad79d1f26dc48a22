//! Multimode scheduling, the stochastic trial engine and the correlation
//! estimators built on its tallies.
//!
//! The cross-correlation estimate is `g2 = p_{r|w} / p_r`, i.e.
//! `p_{w,r} / (p_w p_r)`. `p_{r|w}` and `p_r` are mean read-photon numbers,
//! with standard errors from the sample variance of the per-trial photon
//! number (binomial when at most one photon is read). Ratios propagate
//! relative errors to first order.

mod engine;
mod schedule;

pub use engine::{run_trials, CountsTally, ReadoutPolicy, SplitCounts, TrialSpec};
pub use schedule::{ReadoutTiming, Schedule, DEFAULT_MODE_SPACING, DEFAULT_WRITE_DURATION};

use serde::Serialize;

use crate::ensemble::AtomEnsemble;
use crate::error::{check_positive, invalid, Error, Result};
use crate::model::MemoryParams;
use crate::rng::derive_seed;
use crate::stats::{weighted_mean, Estimate};

/// Estimated statistics for one (herald mode, read mode) pair. `None`
/// marks an estimate whose denominator had no counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEstimate {
    pub herald_mode: usize,
    pub read_mode: usize,
    pub p_w: Option<Estimate>,
    pub p_r: Option<Estimate>,
    pub p_r_given_w: Option<Estimate>,
    pub p_wr: Option<Estimate>,
    pub g2: Option<Estimate>,
}

fn photon_mean(sum: u64, sum_sq: u64, count: u64) -> Option<Estimate> {
    if count == 0 {
        return None;
    }
    let n = count as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0);
    Some(Estimate::new(mean, (var / n).sqrt()))
}

fn product(a: Estimate, b: Estimate) -> Estimate {
    let v = a.value * b.value;
    Estimate::new(v, (b.value * a.stderr).hypot(a.value * b.stderr))
}

/// `p_{r|w} / p_r`. With no read photons after a herald the value is 0
/// and the stderr is the one-sided value a single photon would give.
fn ratio_g2(conditional: Estimate, herald_trials: u64, unconditional: Estimate) -> Option<Estimate> {
    if unconditional.value <= 0.0 {
        return None;
    }
    if conditional.value == 0.0 {
        return Some(Estimate::new(0.0, 1.0 / herald_trials as f64 / unconditional.value));
    }
    let value = conditional.value / unconditional.value;
    let rel = (conditional.stderr / conditional.value).hypot(unconditional.stderr / unconditional.value);
    Some(Estimate::new(value, value * rel))
}

/// Estimates for herald mode `h` and read mode `r`.
pub fn estimate_cell(tally: &CountsTally, h: usize, r: usize) -> ModeEstimate {
    let c = tally.cell(h, r);
    let p_w = Estimate::proportion(tally.write_counts[h], tally.n_trials);
    let p_r = photon_mean(
        tally.unconditional_read_counts[r],
        tally.unconditional_read_sq_counts[r],
        tally.unconditional_trials[r],
    );
    let p_r_given_w = photon_mean(tally.read_counts[c], tally.read_sq_counts[c], tally.herald_counts[c]);
    let p_wr = p_w.zip(p_r_given_w).map(|(a, b)| product(a, b));
    let g2 = p_r_given_w
        .zip(p_r)
        .and_then(|(cond, unc)| ratio_g2(cond, tally.herald_counts[c], unc));
    ModeEstimate {
        herald_mode: h,
        read_mode: r,
        p_w,
        p_r,
        p_r_given_w,
        p_wr,
        g2,
    }
}

/// Estimates for every mode pair, row-major in (herald, read).
pub fn estimate_statistics(tally: &CountsTally) -> Vec<ModeEstimate> {
    let n = tally.n_modes;
    (0..n * n).map(|c| estimate_cell(tally, c / n, c % n)).collect()
}

/// Heralded read autocorrelation `g2_{r,r|w} = N_AB H / (N_A N_B)` over the
/// virtual splitter, pooled across herald modes.
///
/// Without any coincidence across the arms the value is 0 with the
/// one-sided stderr of a single coincidence.
pub fn heralded_autocorrelation(tally: &CountsTally) -> Option<Estimate> {
    let (mut h, mut a, mut b, mut ab) = (0u64, 0u64, 0u64, 0u64);
    for s in &tally.split_read_counts {
        h += s.heralded;
        a += s.arm_a;
        b += s.arm_b;
        ab += s.both;
    }
    if h == 0 || a == 0 || b == 0 {
        return None;
    }
    let scale = h as f64 / (a as f64 * b as f64);
    if ab == 0 {
        return Some(Estimate::new(0.0, scale));
    }
    let value = ab as f64 * scale;
    let rel = (1.0 / ab as f64 + 1.0 / a as f64 + 1.0 / b as f64).sqrt();
    Some(Estimate::new(value, value * rel))
}

/// Cross-correlation between a write click in mode `i` (row) and a read
/// of mode `j` (column) at mode `j`'s rephasing time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstalkMatrix {
    pub n_modes: usize,
    /// Row-major entries.
    pub g2: Vec<Option<Estimate>>,
}

impl CrosstalkMatrix {
    pub fn get(&self, write_mode: usize, read_mode: usize) -> Option<Estimate> {
        self.g2[write_mode * self.n_modes + read_mode]
    }

    fn average(&self, diagonal: bool) -> Option<Estimate> {
        let n = self.n_modes;
        let picked: Vec<Estimate> = (0..n * n)
            .filter(|c| (c / n == c % n) == diagonal)
            .filter_map(|c| self.g2[c])
            .collect();
        weighted_mean(&picked)
    }

    /// Inverse-variance weighted average of the diagonal.
    pub fn diagonal_average(&self) -> Option<Estimate> {
        self.average(true)
    }

    /// Inverse-variance weighted average of the off-diagonal entries.
    pub fn off_diagonal_average(&self) -> Option<Estimate> {
        self.average(false)
    }
}

/// Reads each column with a fixed-mode run of `spec.n_trials` trials.
/// Column `j` uses a seed derived from `spec.seed` and `j`.
pub fn crosstalk_matrix(params: &MemoryParams, schedule: &Schedule, spec: &TrialSpec) -> Result<CrosstalkMatrix> {
    let n = schedule.n_modes as usize;
    let mut g2 = vec![None; n * n];
    for j in 0..n {
        let column = TrialSpec {
            seed: derive_seed(spec.seed, j as u64),
            policy: ReadoutPolicy::Fixed(j as u32),
            ..*spec
        };
        let tally = run_trials(params, schedule, &column)?;
        for i in 0..n {
            g2[i * n + j] = estimate_cell(&tally, i, j).g2;
        }
    }
    Ok(CrosstalkMatrix { n_modes: n, g2 })
}

/// Write train used by [`coincidence_scaling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingSetup {
    pub max_modes: u32,
    pub mode_spacing: f64,
    pub write_duration: f64,
    /// Programmed gradient before reversal, G/cm.
    pub gradient: f64,
    /// Fractional gradient drift per second in the realised field.
    pub drift_rate: f64,
}

/// Per-train totals for one mode count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n_modes: u32,
    /// Expected write clicks per train, `sum_m p_w(m)`.
    pub p_w_total: Estimate,
    /// Expected write-read coincidences per train, `sum_m p_w(m) p_{r|w}(m)`.
    pub p_wr_total: Estimate,
    /// Weighted average of the per-mode `g2`.
    pub g2_avg: Option<Estimate>,
}

/// Sweeps the train length from 1 to `setup.max_modes` modes.
///
/// Reads happen at the drift-free rephasing times (immediate reversal).
/// The realised field drifts at `setup.drift_rate`, so each mode's coherent
/// retrieval is scaled by the ratio of the ensemble's collective efficiency
/// with and without drift at its programmed read time. Each mode count runs
/// feed-forward trials with a seed derived from `spec.seed`.
pub fn coincidence_scaling(
    params: &MemoryParams,
    setup: &ScalingSetup,
    ensemble: &AtomEnsemble,
    spec: &TrialSpec,
) -> Result<Vec<ScalingPoint>> {
    if setup.max_modes == 0 {
        return Err(invalid("max_modes", "must be >= 1"));
    }
    check_positive("gradient", setup.gradient.abs())?;
    let timing = ReadoutTiming::ImmediateAfterLast;
    (1..=setup.max_modes)
        .map(|n_modes| {
            let programmed = Schedule::timeline_for(n_modes, setup.mode_spacing, setup.gradient, timing);
            let realised = programmed.clone().with_drift(setup.drift_rate);
            let schedule = Schedule::build(n_modes, setup.mode_spacing, setup.write_duration, &programmed, timing)?;
            let factors = (0..n_modes as usize)
                .map(|m| {
                    let (tw, tr) = (schedule.write_times[m], schedule.readout_times[m]);
                    let ideal = ensemble.collective_efficiency(&programmed, tw, tr, 1.0)?;
                    if ideal <= 0.0 {
                        return Err(Error::UndefinedCorrelation("no collective retrieval at the programmed time"));
                    }
                    let actual = ensemble.collective_efficiency(&realised, tw, tr, 1.0)?;
                    Ok((actual / ideal).min(1.0))
                })
                .collect::<Result<Vec<_>>>()?;
            let schedule = schedule.with_retrieval_factors(factors)?;
            let run = TrialSpec {
                seed: derive_seed(spec.seed, u64::from(n_modes)),
                policy: ReadoutPolicy::FeedForward,
                ..*spec
            };
            let tally = run_trials(&params.with_modes(n_modes), &schedule, &run)?;
            Ok(scaling_point(&tally, n_modes))
        })
        .collect()
}

fn scaling_point(tally: &CountsTally, n_modes: u32) -> ScalingPoint {
    let (mut w, mut w_var, mut wr, mut wr_var) = (0.0, 0.0, 0.0, 0.0);
    let mut g2s = Vec::new();
    for m in 0..tally.n_modes {
        let e = estimate_cell(tally, m, m);
        if let Some(pw) = e.p_w {
            w += pw.value;
            w_var += pw.stderr * pw.stderr;
        }
        if let Some(pwr) = e.p_wr {
            wr += pwr.value;
            wr_var += pwr.stderr * pwr.stderr;
        }
        g2s.extend(e.g2);
    }
    ScalingPoint {
        n_modes,
        p_w_total: Estimate::new(w, w_var.sqrt()),
        p_wr_total: Estimate::new(wr, wr_var.sqrt()),
        g2_avg: weighted_mean(&g2s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_ensemble, FieldTimeline};

    fn schedule(n: u32) -> Schedule {
        let timing = ReadoutTiming::ImmediateAfterLast;
        let tl = Schedule::timeline_for(n, DEFAULT_MODE_SPACING, 1.0, timing);
        Schedule::build(n, DEFAULT_MODE_SPACING, DEFAULT_WRITE_DURATION, &tl, timing).unwrap()
    }

    fn params(n: u32) -> MemoryParams {
        MemoryParams {
            p: 0.05,
            n_modes: n,
            tau_mem: 1e9,
            ..MemoryParams::default()
        }
    }

    #[test]
    fn zero_excitation_gives_empty_tally() {
        let m = MemoryParams { p: 0.0, ..params(3) };
        let t = run_trials(&m, &schedule(3), &TrialSpec::new(5000, 1, ReadoutPolicy::Fixed(1))).unwrap();
        assert_eq!(t.n_trials, 5000);
        assert!(t.write_counts.iter().all(|&c| c == 0));
        assert!(t.read_counts.iter().all(|&c| c == 0));
        assert!(t.unconditional_read_counts.iter().all(|&c| c == 0));
        assert_eq!(heralded_autocorrelation(&t), None);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = schedule(3);
        let spec = TrialSpec::new(10, 0, ReadoutPolicy::FeedForward);
        assert!(matches!(run_trials(&params(4), &s, &spec), Err(Error::Mismatch(_))));
        assert!(run_trials(&params(3), &s, &TrialSpec { n_trials: 0, ..spec }).is_err());
        assert!(run_trials(&params(3), &s, &TrialSpec::new(10, 0, ReadoutPolicy::Fixed(3))).is_err());
    }

    #[test]
    fn tally_is_independent_of_workers() {
        let s = schedule(4);
        let base = TrialSpec::new(20_000, 42, ReadoutPolicy::FeedForward);
        let one = run_trials(&params(4), &s, &base.with_workers(Some(1))).unwrap();
        let many = run_trials(&params(4), &s, &base.with_workers(Some(7))).unwrap();
        assert_eq!(one, many);
        one.check().unwrap();
    }

    #[test]
    fn deterministic_tally_gives_unit_g2() {
        let n = 1000;
        let mut t = CountsTally::empty(1);
        t.n_trials = n;
        t.write_counts[0] = n;
        t.herald_counts[0] = n;
        t.read_counts[0] = n;
        t.read_sq_counts[0] = n;
        t.coincidence_counts[0] = n;
        t.unconditional_trials[0] = n;
        t.unconditional_read_counts[0] = n;
        t.unconditional_read_sq_counts[0] = n;
        let e = estimate_cell(&t, 0, 0);
        assert_eq!(e.g2.unwrap().value, 1.0);
        assert_eq!(e.p_w.unwrap().value, 1.0);
        assert_eq!(e.p_r.unwrap().value, 1.0);
    }

    #[test]
    fn zero_coincidences_give_zero_with_one_sided_error() {
        let mut t = CountsTally::empty(1);
        t.n_trials = 1000;
        t.write_counts[0] = 100;
        t.herald_counts[0] = 100;
        t.unconditional_trials[0] = 1000;
        t.unconditional_read_counts[0] = 50;
        t.unconditional_read_sq_counts[0] = 50;
        let g2 = estimate_cell(&t, 0, 0).g2.unwrap();
        assert_eq!(g2.value, 0.0);
        assert!((g2.stderr - (1.0 / 100.0) / 0.05).abs() < 1e-12);

        t.unconditional_read_counts[0] = 0;
        t.unconditional_read_sq_counts[0] = 0;
        assert_eq!(estimate_cell(&t, 0, 0).g2, None);
        assert_eq!(estimate_cell(&CountsTally::empty(1), 0, 0).p_w, None);
    }

    #[test]
    fn fixed_mode_matches_model() {
        let m = params(5);
        let s = schedule(5);
        let t = run_trials(&m, &s, &TrialSpec::new(400_000, 3, ReadoutPolicy::Fixed(2))).unwrap();
        let e = estimate_cell(&t, 2, 2);
        let ts = s.storage_time(2);
        let g2 = m.cross_correlation(ts).unwrap();
        assert!((g2 - 11.43).abs() < 0.01);
        assert!(e.g2.unwrap().z_score(g2) < 3.0, "{:?} vs {g2}", e.g2);
        assert!(e.p_w.unwrap().z_score(m.write_prob()) < 3.0);
        assert!(e.p_r_given_w.unwrap().z_score(m.retrieval_given_write(ts).unwrap()) < 3.0);
        assert!(e.p_r.unwrap().z_score(m.read_prob_at(ts).unwrap()) < 3.0);
    }

    #[test]
    fn feed_forward_reads_only_after_heralds() {
        let s = schedule(3);
        let t = run_trials(&params(3), &s, &TrialSpec::new(30_000, 5, ReadoutPolicy::FeedForward)).unwrap();
        t.check().unwrap();
        let ff: u64 = t.heralded_trials.iter().sum();
        let unc: u64 = t.unconditional_trials.iter().sum();
        assert_eq!(unc, 15_000);
        assert!(ff > 0 && ff + unc <= t.n_trials);
        let e = estimate_cell(&t, 1, 1);
        assert!(e.g2.unwrap().value > 5.0);
    }

    #[test]
    fn noise_free_retrieval_is_antibunched() {
        let m = MemoryParams {
            p: 0.5,
            p_int0: 1.0,
            eta_r: 1.0,
            beta_ratio: f64::INFINITY,
            ..params(2)
        };
        let t = run_trials(&m, &schedule(2), &TrialSpec::new(20_000, 8, ReadoutPolicy::FeedForward)).unwrap();
        let g = heralded_autocorrelation(&t).unwrap();
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn thermal_noise_is_bunched() {
        let m = MemoryParams {
            p: 0.2,
            p_int0: 0.0,
            beta_ratio: 1.0,
            ..params(10)
        };
        let t = run_trials(&m, &schedule(10), &TrialSpec::new(200_000, 9, ReadoutPolicy::FeedForward)).unwrap();
        let g = heralded_autocorrelation(&t).unwrap();
        assert!(g.z_score(2.0) < 3.0, "{g:?}");
    }

    #[test]
    fn single_mode_crosstalk_is_plain_g2() {
        let m = params(1);
        let s = schedule(1);
        let spec = TrialSpec::new(50_000, 4, ReadoutPolicy::FeedForward);
        let x = crosstalk_matrix(&m, &s, &spec).unwrap();
        assert_eq!(x.n_modes, 1);
        let direct = run_trials(
            &m,
            &s,
            &TrialSpec {
                seed: derive_seed(4, 0),
                policy: ReadoutPolicy::Fixed(0),
                ..spec
            },
        )
        .unwrap();
        assert_eq!(x.get(0, 0), estimate_cell(&direct, 0, 0).g2);
        assert_eq!(x.off_diagonal_average(), None);
    }

    #[test]
    fn scaling_single_mode_and_drift_free_linearity() {
        let cloud = sample_ensemble(2000, 2e-3, 0.0, 0.0, 1.4e6, 1).unwrap();
        let setup = ScalingSetup {
            max_modes: 3,
            mode_spacing: DEFAULT_MODE_SPACING,
            write_duration: DEFAULT_WRITE_DURATION,
            gradient: 5.0,
            drift_rate: 0.0,
        };
        let m = params(1);
        let pts = coincidence_scaling(&m, &setup, &cloud, &TrialSpec::new(100_000, 2, ReadoutPolicy::FeedForward)).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].n_modes, 1);
        let ratio = pts[2].p_w_total.value / pts[0].p_w_total.value;
        assert!((ratio - 3.0).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn drift_reduces_retrieval_of_late_readouts() {
        let cloud = sample_ensemble(4000, 2e-3, 0.0, 0.0, 1.4e6, 1).unwrap();
        let timing = ReadoutTiming::ImmediateAfterLast;
        let tl = Schedule::timeline_for(10, DEFAULT_MODE_SPACING, 5.0, timing);
        let s = Schedule::build(10, DEFAULT_MODE_SPACING, DEFAULT_WRITE_DURATION, &tl, timing).unwrap();
        let drifted: FieldTimeline = tl.clone().with_drift(1e3);
        let factor = |m: usize| {
            let (tw, tr) = (s.write_times[m], s.readout_times[m]);
            cloud.collective_efficiency(&drifted, tw, tr, 1.0).unwrap() / cloud.collective_efficiency(&tl, tw, tr, 1.0).unwrap()
        };
        // Mode 0 is stored longest.
        assert!(factor(0) < factor(9));
        assert!(factor(9) > 0.99);
    }
}
