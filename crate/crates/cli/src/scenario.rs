//! One function per scenario, each producing a table and a summary.

use muxmem_core::cavity::{optimal_outcoupler, CavityParams, PulseSpec};
use muxmem_core::ensemble::FieldTimeline;
use muxmem_core::model::max_modes;
use muxmem_core::protocol::{
    coincidence_scaling, crosstalk_matrix, ReadoutPolicy, ScalingSetup, Schedule, TrialSpec,
};
use muxmem_core::repeater::{
    multiplexed_rate, readout_latency, repetition_rate, train_storage_requirement, LatencyMode, LinkParams,
};
use muxmem_core::stats::{linear_fit, peak_and_fwhm};
use serde_json::json;

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{Summary, Table};

/// Range searched for the optimal outcoupler transmission.
const OUTCOUPLER_RANGE: (f64, f64) = (1e-4, 0.999);

/// Runs `cfg`'s scenario. `workers` caps Monte Carlo threads; results do
/// not depend on it.
pub fn run_scenario(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<(Table, Summary), CliError> {
    let scenario = cfg.scenario()?;
    let ctx = Ctx {
        cfg,
        scenario,
        workers,
    };
    match scenario {
        Scenario::ModeSweep => ctx.mode_sweep(),
        Scenario::MaxModes => ctx.max_modes(),
        Scenario::CavityDesign => ctx.cavity_design(),
        Scenario::PulseEnhancement => ctx.pulse_enhancement(),
        Scenario::Echo => ctx.echo(),
        Scenario::ProtocolRun => ctx.protocol_run(),
        Scenario::Crosstalk => ctx.crosstalk(),
        Scenario::StorageDecay => ctx.storage_decay(),
        Scenario::RepeaterRate => ctx.repeater_rate(),
    }
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    scenario: Scenario,
    workers: Option<usize>,
}

type Out = Result<(Table, Summary), CliError>;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl Ctx<'_> {
    fn model<T>(&self, r: muxmem_core::Result<T>) -> Result<T, CliError> {
        r.map_err(|source| CliError::Model {
            scenario: self.scenario.name(),
            source,
        })
    }

    fn summary(&self) -> Summary {
        let mut s = Summary::new(self.scenario.name());
        s.set("rng_seed", self.cfg.rng_seed);
        s
    }

    fn trial_spec(&self, policy: ReadoutPolicy) -> TrialSpec {
        TrialSpec::new(self.cfg.trials, self.cfg.rng_seed, policy).with_workers(self.workers)
    }

    fn schedule(&self) -> Result<Schedule, CliError> {
        let s = &self.cfg.schedule;
        let timeline = self
            .cfg
            .timeline
            .clone()
            .unwrap_or_else(|| Schedule::timeline_for(s.n_modes, s.mode_spacing, s.gradient, s.timing));
        self.model(Schedule::build(s.n_modes, s.mode_spacing, s.write_duration, &timeline, s.timing))
    }

    fn mode_sweep(&self) -> Out {
        let w = &self.cfg.sweep;
        let mut table = Table::new(&["beta_ratio", "n_modes", "g2"]);
        for &b in &w.beta_ratios {
            let m = self.cfg.memory.with_beta_ratio(b);
            for n in 1..=w.max_modes {
                let g = self.model(m.with_modes(n).cross_correlation(0.0))?;
                table.push(vec![b.into(), n.into(), g.into()]);
            }
        }
        let mut s = self.summary();
        s.set("beta_ratios", w.beta_ratios.clone());
        s.set("max_modes", w.max_modes);
        s.set("g2_single_mode", self.model(self.cfg.memory.with_modes(1).cross_correlation(0.0))?);
        Ok((table, s))
    }

    fn max_modes(&self) -> Out {
        let w = &self.cfg.sweep;
        let mut table = Table::new(&["beta_ratio", "max_modes"]);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &b in &w.beta_ratios {
            let cap = self.model(max_modes(&self.cfg.memory.with_beta_ratio(b), w.threshold))?;
            let n = cap
                .bounded()
                .ok_or_else(|| CliError::Config("max-modes needs a finite beta_ratio".into()))?;
            table.push(vec![b.into(), n.into()]);
            xs.push(b);
            ys.push(n as f64);
        }
        let mut s = self.summary();
        s.set("threshold", w.threshold);
        let at_config = self.model(max_modes(&self.cfg.memory, w.threshold))?;
        s.set("max_modes_at_beta_ratio", json!(at_config.bounded()));
        if let Some(fit) = linear_fit(&xs, &ys) {
            s.set("slope", fit.slope);
            s.set("intercept", fit.intercept);
            s.set("r_squared", fit.r_squared);
        }
        Ok((table, s))
    }

    fn cavity_design(&self) -> Out {
        let w = &self.cfg.sweep;
        let c = self.cfg.cavity;
        let mut table = Table::new(&["roundtrip_loss", "reflectivity", "finesse", "escape_efficiency", "rate_gain"]);
        let mut optima = Vec::new();
        for &loss in &w.roundtrip_losses {
            for i in 1..=w.reflectivity_points {
                let r = i as f64 / (w.reflectivity_points + 1) as f64;
                let cav = CavityParams {
                    transmission: 1.0 - r,
                    loss,
                    ..c
                };
                table.push(vec![
                    loss.into(),
                    r.into(),
                    self.model(cav.finesse())?.into(),
                    cav.escape_efficiency().into(),
                    self.model(cav.rate_gain())?.into(),
                ]);
            }
            let opt = self.model(optimal_outcoupler(loss, OUTCOUPLER_RANGE))?;
            optima.push(json!({
                "roundtrip_loss": loss,
                "optimal_transmission": opt.transmission,
                "gain_max": opt.rate_gain,
            }));
        }
        let opt = self.model(optimal_outcoupler(c.loss, OUTCOUPLER_RANGE))?;
        let mut s = self.summary();
        s.set("finesse", self.model(c.finesse())?);
        s.set("escape_efficiency", c.escape_efficiency());
        s.set("enhancement_factor", self.model(c.enhancement_factor())?);
        s.set("fsr_hz", c.fsr());
        s.set("linewidth_hz", self.model(c.linewidth())?);
        s.set("gain_at_t", self.model(c.rate_gain())?);
        s.set("gain_max", opt.rate_gain);
        s.set("optimal_transmission", opt.transmission);
        s.set("optima", optima);
        Ok((table, s))
    }

    fn pulse_enhancement(&self) -> Out {
        let w = &self.cfg.sweep;
        let c = self.cfg.cavity;
        let mut table = Table::new(&["duration_s", "detuning_hz", "enhancement"]);
        let mut peaks = Vec::new();
        for &d in &w.pulse_durations {
            let pulse = PulseSpec {
                duration_fwhm: d,
                ..self.cfg.pulse
            };
            for det in linspace(-w.detuning_span, w.detuning_span, w.detuning_points) {
                let e = self.model(c.effective_enhancement(&pulse, det))?;
                table.push(vec![d.into(), det.into(), e.into()]);
            }
            peaks.push(json!({
                "duration_s": d,
                "on_resonance": self.model(c.effective_enhancement(&pulse, 0.0))?,
            }));
        }
        let mut s = self.summary();
        s.set("enhancement_factor", self.model(c.enhancement_factor())?);
        s.set("linewidth_hz", self.model(c.linewidth())?);
        s.set("peaks", peaks);
        Ok((table, s))
    }

    fn echo(&self) -> Out {
        let w = &self.cfg.sweep;
        let timeline: &FieldTimeline = self
            .cfg
            .timeline
            .as_ref()
            .ok_or_else(|| CliError::Config("echo requires a `timeline` block".into()))?;
        let cloud = self.model(self.cfg.ensemble.sample(self.cfg.rng_seed))?;
        let tw = w.echo_write_time;
        let t_reph = self.model(timeline.without_drift().rephasing_time(tw))?;
        let grid = linspace(t_reph - w.echo_half_window, t_reph + w.echo_half_window, w.echo_points);
        let mut table = Table::new(&["duration_s", "time_s", "efficiency"]);
        let mut peaks = Vec::new();
        for &d in &w.pulse_durations {
            let pulse = PulseSpec {
                duration_fwhm: d,
                ..self.cfg.pulse
            };
            let profile = self.model(cloud.echo_profile(timeline, tw, &pulse, self.cfg.memory.p_int0, &grid))?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = profile.iter().copied().unzip();
            for (t, e) in profile {
                table.push(vec![d.into(), t.into(), e.into()]);
            }
            if let Some((at, peak, fwhm)) = peak_and_fwhm(&xs, &ys) {
                peaks.push(json!({
                    "duration_s": d,
                    "peak_time_s": at,
                    "peak_efficiency": peak,
                    "fwhm_s": fwhm,
                }));
            }
        }
        let mut s = self.summary();
        s.set("write_time_s", tw);
        s.set("rephasing_time_s", t_reph);
        s.set("n_atoms", cloud.len());
        s.set("peaks", peaks);
        Ok((table, s))
    }

    fn protocol_run(&self) -> Out {
        let w = &self.cfg.sweep;
        let sc = &self.cfg.schedule;
        let setup = ScalingSetup {
            max_modes: w.train_modes,
            mode_spacing: sc.mode_spacing,
            write_duration: sc.write_duration,
            gradient: sc.gradient,
            drift_rate: w.drift_rate,
        };
        let cloud = self.model(self.cfg.ensemble.sample(self.cfg.rng_seed))?;
        let points = self.model(coincidence_scaling(
            &self.cfg.memory,
            &setup,
            &cloud,
            &self.trial_spec(ReadoutPolicy::FeedForward),
        ))?;
        let mut table = Table::new(&["n_modes", "p_w_total", "p_wr_total", "g2_avg", "g2_stderr"]);
        for p in &points {
            let (g, ge) = p.g2_avg.map_or((f64::NAN, f64::NAN), |g| (g.value, g.stderr));
            table.push(vec![p.n_modes.into(), p.p_w_total.value.into(), p.p_wr_total.value.into(), g.into(), ge.into()]);
        }
        let mut s = self.summary();
        s.set("trials", self.cfg.trials);
        s.set("drift_rate_per_s", w.drift_rate);
        if let (Some(first), Some(last)) = (points.first(), points.last()) {
            s.set("p_w_ratio", last.p_w_total.value / first.p_w_total.value);
            s.set("p_wr_ratio", last.p_wr_total.value / first.p_wr_total.value);
        }
        Ok((table, s))
    }

    fn crosstalk(&self) -> Out {
        let schedule = self.schedule()?;
        let memory = self.cfg.memory.with_modes(schedule.n_modes);
        let x = self.model(crosstalk_matrix(&memory, &schedule, &self.trial_spec(ReadoutPolicy::FeedForward)))?;
        let mut table = Table::new(&["write_mode", "read_mode", "g2", "g2_stderr"]);
        for i in 0..x.n_modes {
            for j in 0..x.n_modes {
                let (g, ge) = x.get(i, j).map_or((f64::NAN, f64::NAN), |g| (g.value, g.stderr));
                table.push(vec![i.into(), j.into(), g.into(), ge.into()]);
            }
        }
        let mut s = self.summary();
        s.set("trials_per_column", self.cfg.trials);
        if let Some(d) = x.diagonal_average() {
            s.set("diagonal_g2", d.value);
            s.set("diagonal_g2_stderr", d.stderr);
        }
        if let Some(o) = x.off_diagonal_average() {
            s.set("off_diagonal_g2", o.value);
            s.set("off_diagonal_g2_stderr", o.stderr);
        }
        Ok((table, s))
    }

    fn storage_decay(&self) -> Out {
        let w = &self.cfg.sweep;
        let cav = self.cfg.memory;
        let bare = cav.with_beta_ratio(1.0);
        let mut table = Table::new(&["time_s", "g2_cavity", "g2_nocavity"]);
        for t in linspace(0.0, w.storage_max, w.storage_points) {
            let gc = self.model(cav.cross_correlation(t))?;
            let gn = self.model(bare.cross_correlation(t))?;
            table.push(vec![t.into(), gc.into(), gn.into()]);
        }
        let drop = |m: &muxmem_core::MemoryParams| -> Result<f64, CliError> {
            let e0 = self.model(m.cross_correlation(0.0))? - 1.0;
            let e1 = self.model(m.cross_correlation(m.tau_mem))? - 1.0;
            Ok(1.0 - e1 / e0)
        };
        let mut s = self.summary();
        s.set("cavity_gain_t0", self.model(muxmem_core::cavity_gain(&cav, &bare, 0.0))?);
        s.set("excess_drop_cavity", drop(&cav)?);
        s.set("excess_drop_nocavity", drop(&bare)?);
        s.set("tau_mem_s", cav.tau_mem);
        Ok((table, s))
    }

    fn repeater_rate(&self) -> Out {
        let w = &self.cfg.sweep;
        let base = self.cfg.link;
        let mut table = Table::new(&["distance_m", "n_modes", "repetition_rate_hz", "multiplexed_rate_hz", "gain"]);
        for &d in &w.distances {
            let single = LinkParams {
                distance: d,
                n_modes: 1,
                ..base
            };
            let one = self.model(multiplexed_rate(&single, w.per_mode_success))?;
            for &n in &w.mode_counts {
                let link = LinkParams { n_modes: n, ..single };
                let r = self.model(repetition_rate(&link))?;
                let m = self.model(multiplexed_rate(&link, w.per_mode_success))?;
                let gain = if one > 0.0 { m / one } else { f64::NAN };
                table.push(vec![d.into(), n.into(), r.into(), m.into(), gain.into()]);
            }
        }
        let mut s = self.summary();
        s.set("repetition_rate_hz", self.model(repetition_rate(&base))?);
        s.set("latency_immediate_s", self.model(readout_latency(&base, LatencyMode::ImmediateReversal))?);
        s.set(
            "latency_freeze_release_s",
            self.model(readout_latency(
                &base,
                LatencyMode::FreezeRelease {
                    dephasing_interval: w.dephasing_interval,
                },
            ))?,
        );
        let largest = w.mode_counts.iter().copied().max().unwrap_or(1);
        s.set("train_modes", largest);
        s.set(
            "train_storage_s",
            train_storage_requirement(largest, self.cfg.schedule.mode_spacing),
        );
        Ok((table, s))
    }
}
