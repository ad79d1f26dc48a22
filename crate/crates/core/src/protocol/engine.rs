use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Schedule;
use crate::error::{invalid, Error, Result};
use crate::model::MemoryParams;
use crate::rng::{substream, DOMAIN_TRIALS};

/// Trials tallied sequentially before merging.
const CHUNK: u64 = 1 << 12;

/// Which stored mode a trial reads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutPolicy {
    /// Even trials read the first heralded mode at its rephasing time; odd
    /// trials read modes in turn regardless of heralds, which supplies the
    /// unconditional read statistics.
    #[default]
    FeedForward,
    /// Every trial reads this mode.
    Fixed(u32),
}

/// Trial count, seed and parallelism of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSpec {
    pub n_trials: u64,
    pub seed: u64,
    pub policy: ReadoutPolicy,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
}

impl TrialSpec {
    pub fn new(n_trials: u64, seed: u64, policy: ReadoutPolicy) -> Self {
        Self {
            n_trials,
            seed,
            policy,
            workers: None,
        }
    }

    pub fn with_workers(self, workers: Option<usize>) -> Self {
        Self { workers, ..self }
    }
}

/// Read-photon splitting behind a virtual 50:50 beam splitter, for one
/// herald mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitCounts {
    /// Trials with a write click in this mode whose read was of this mode.
    pub heralded: u64,
    /// Photons in arm A.
    pub arm_a: u64,
    /// Photons in arm B.
    pub arm_b: u64,
    /// Sum over trials of `n_A * n_B`.
    pub both: u64,
}

/// Sufficient statistics of a batch of trials.
///
/// Mode-pair tables are row-major `[herald_mode * n_modes + read_mode]`.
/// Read tallies count photons rather than detector clicks (no dead time),
/// so `read_counts` can exceed `coincidence_counts`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountsTally {
    pub n_modes: usize,
    pub n_trials: u64,
    /// Write clicks per mode over all trials.
    pub write_counts: Vec<u64>,
    /// Trials with a write click in the herald mode and a read of the read mode.
    pub herald_counts: Vec<u64>,
    /// Read photons in those trials.
    pub read_counts: Vec<u64>,
    /// Sum of squared read photon numbers in those trials.
    pub read_sq_counts: Vec<u64>,
    /// Those trials with at least one read photon.
    pub coincidence_counts: Vec<u64>,
    /// Trials whose read mode was chosen without looking at heralds.
    pub unconditional_trials: Vec<u64>,
    pub unconditional_read_counts: Vec<u64>,
    pub unconditional_read_sq_counts: Vec<u64>,
    /// Feed-forward trials triggered by each herald mode.
    pub heralded_trials: Vec<u64>,
    pub split_read_counts: Vec<SplitCounts>,
}

impl CountsTally {
    pub fn empty(n_modes: usize) -> Self {
        let n2 = n_modes * n_modes;
        Self {
            n_modes,
            n_trials: 0,
            write_counts: vec![0; n_modes],
            herald_counts: vec![0; n2],
            read_counts: vec![0; n2],
            read_sq_counts: vec![0; n2],
            coincidence_counts: vec![0; n2],
            unconditional_trials: vec![0; n_modes],
            unconditional_read_counts: vec![0; n_modes],
            unconditional_read_sq_counts: vec![0; n_modes],
            heralded_trials: vec![0; n_modes],
            split_read_counts: vec![SplitCounts::default(); n_modes],
        }
    }

    pub fn cell(&self, herald: usize, read: usize) -> usize {
        herald * self.n_modes + read
    }

    /// Adds another tally of the same shape. Associative and commutative.
    pub fn merge(mut self, other: &Self) -> Self {
        debug_assert_eq!(self.n_modes, other.n_modes);
        fn add(a: &mut [u64], b: &[u64]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.n_trials += other.n_trials;
        add(&mut self.write_counts, &other.write_counts);
        add(&mut self.herald_counts, &other.herald_counts);
        add(&mut self.read_counts, &other.read_counts);
        add(&mut self.read_sq_counts, &other.read_sq_counts);
        add(&mut self.coincidence_counts, &other.coincidence_counts);
        add(&mut self.unconditional_trials, &other.unconditional_trials);
        add(&mut self.unconditional_read_counts, &other.unconditional_read_counts);
        add(&mut self.unconditional_read_sq_counts, &other.unconditional_read_sq_counts);
        add(&mut self.heralded_trials, &other.heralded_trials);
        for (a, b) in self.split_read_counts.iter_mut().zip(&other.split_read_counts) {
            a.heralded += b.heralded;
            a.arm_a += b.arm_a;
            a.arm_b += b.arm_b;
            a.both += b.both;
        }
        self
    }

    /// Checks the counting invariants; returns the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        let n = self.n_modes;
        for h in 0..n {
            if self.write_counts[h] > self.n_trials {
                return Err(format!("write_counts[{h}] exceeds n_trials"));
            }
            for r in 0..n {
                let c = self.cell(h, r);
                if self.coincidence_counts[c] > self.herald_counts[c] {
                    return Err(format!("coincidences exceed heralds in cell ({h}, {r})"));
                }
                if self.coincidence_counts[c] > self.read_counts[c] {
                    return Err(format!("coincidences exceed reads in cell ({h}, {r})"));
                }
                if self.herald_counts[c] > self.write_counts[h] {
                    return Err(format!("heralds exceed writes in cell ({h}, {r})"));
                }
            }
        }
        if self.heralded_trials.iter().sum::<u64>() > self.n_trials {
            return Err("heralded trials exceed n_trials".into());
        }
        if self.unconditional_trials.iter().sum::<u64>() > self.n_trials {
            return Err("unconditional trials exceed n_trials".into());
        }
        Ok(())
    }
}

/// Per-mode probabilities used inside a trial.
struct Plan {
    p: f64,
    eta_w: f64,
    /// Coherent read-photon probability given the spin wave exists.
    coherent: Vec<f64>,
    /// Thermal noise distribution when reading each mode.
    noise: Vec<Geometric>,
}

impl Plan {
    fn new(params: &MemoryParams, schedule: &Schedule) -> Result<Self> {
        let n = schedule.n_modes as usize;
        let mut coherent = Vec::with_capacity(n);
        let mut noise = Vec::with_capacity(n);
        for m in 0..n {
            let t = schedule.storage_time(m);
            if t < 0.0 {
                return Err(Error::NegativeTime(t));
            }
            let p_int = params.intrinsic_efficiency(t) * schedule.retrieval_factors[m];
            coherent.push(p_int * params.eta_r);
            let mean = params.noise_with(p_int);
            let geo = Geometric::new(1.0 / (1.0 + mean)).map_err(|e| invalid("noise_mean", e.to_string()))?;
            noise.push(geo);
        }
        Ok(Self {
            p: params.p,
            eta_w: params.eta_w,
            coherent,
            noise,
        })
    }

    fn read(&self, rng: &mut ChaCha8Rng, mode: usize, spin_wave: bool) -> u64 {
        let coherent = u64::from(spin_wave && rng.random::<f64>() < self.coherent[mode]);
        coherent + self.noise[mode].sample(rng)
    }
}

/// Simulates `spec.n_trials` write/read trials.
///
/// Per trial every mode holds a spin wave with probability `p` and heralds
/// it with probability `eta_w`. The read of mode `m` yields a coherent
/// photon with probability `p_int(t_m) eta_r` if that spin wave exists,
/// plus a thermally distributed number of noise photons whose mean is the
/// dephased-noise probability of the model. Trial `i` draws from its own
/// substream, so the tally depends only on the seed.
pub fn run_trials(params: &MemoryParams, schedule: &Schedule, spec: &TrialSpec) -> Result<CountsTally> {
    params.validate()?;
    if params.n_modes != schedule.n_modes {
        return Err(Error::Mismatch(format!(
            "memory has {} modes but schedule has {}",
            params.n_modes, schedule.n_modes
        )));
    }
    if spec.n_trials == 0 {
        return Err(invalid("n_trials", "must be >= 1"));
    }
    if let ReadoutPolicy::Fixed(j) = spec.policy {
        if j >= schedule.n_modes {
            return Err(invalid("read_mode", format!("{j} is not below {}", schedule.n_modes)));
        }
    }
    let plan = Plan::new(params, schedule)?;
    let n = schedule.n_modes as usize;
    let chunks = spec.n_trials.div_ceil(CHUNK);

    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut tally = CountsTally::empty(n);
                let end = ((c + 1) * CHUNK).min(spec.n_trials);
                let mut state = TrialState::new(n);
                for i in c * CHUNK..end {
                    run_one(&plan, spec, i, &mut state, &mut tally);
                }
                tally
            })
            .reduce(|| CountsTally::empty(n), |a, b| a.merge(&b))
    };

    let tally = match spec.workers {
        None => work(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(work),
    };
    Ok(tally)
}

struct TrialState {
    spin: Vec<bool>,
    click: Vec<bool>,
}

impl TrialState {
    fn new(n: usize) -> Self {
        Self {
            spin: vec![false; n],
            click: vec![false; n],
        }
    }
}

fn run_one(plan: &Plan, spec: &TrialSpec, index: u64, st: &mut TrialState, tally: &mut CountsTally) {
    let n = st.spin.len();
    let mut rng = substream(spec.seed, DOMAIN_TRIALS, index);
    tally.n_trials += 1;
    for m in 0..n {
        st.spin[m] = rng.random::<f64>() < plan.p;
        st.click[m] = st.spin[m] && rng.random::<f64>() < plan.eta_w;
        tally.write_counts[m] += u64::from(st.click[m]);
    }

    let (read_mode, unconditional) = match spec.policy {
        ReadoutPolicy::Fixed(j) => (Some(j as usize), true),
        ReadoutPolicy::FeedForward if index % 2 == 1 => (Some((index / 2) as usize % n), true),
        ReadoutPolicy::FeedForward => (st.click.iter().position(|&c| c), false),
    };
    let Some(r) = read_mode else { return };

    let photons = plan.read(&mut rng, r, st.spin[r]);
    if unconditional {
        tally.unconditional_trials[r] += 1;
        tally.unconditional_read_counts[r] += photons;
        tally.unconditional_read_sq_counts[r] += photons * photons;
        for h in (0..n).filter(|&h| st.click[h]) {
            record(tally, h, r, photons);
        }
    } else {
        tally.heralded_trials[r] += 1;
        record(tally, r, r, photons);
    }

    if st.click[r] {
        let a = (0..photons).filter(|_| rng.random::<bool>()).count() as u64;
        let split = &mut tally.split_read_counts[r];
        split.heralded += 1;
        split.arm_a += a;
        split.arm_b += photons - a;
        split.both += a * (photons - a);
    }
}

fn record(tally: &mut CountsTally, herald: usize, read: usize, photons: u64) {
    let c = tally.cell(herald, read);
    tally.herald_counts[c] += 1;
    tally.read_counts[c] += photons;
    tally.read_sq_counts[c] += photons * photons;
    tally.coincidence_counts[c] += u64::from(photons > 0);
}
