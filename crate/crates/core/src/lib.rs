//! Temporally multiplexed DLCZ quantum memory with cavity-enhanced noise
//! suppression: analytic noise model, cavity design, atomic-ensemble
//! dephasing simulation, Monte Carlo protocol trials and repeater-rate
//! bookkeeping.

// Range checks are written as `!(x > lo)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod constants;
pub mod ensemble;
mod error;
pub mod model;
pub mod protocol;
mod quad;
pub mod repeater;
pub mod rng;
pub mod stats;

pub use cavity::{optimal_outcoupler, spectral_overlap, CavityParams, OutcouplerOptimum, PulseShape, PulseSpec};
pub use ensemble::{sample_ensemble, AtomEnsemble, EnsembleSpec, FieldMoments, FieldTimeline, GradientSegment, PhaseState};
pub use error::{Error, Result};
pub use model::{cavity_gain, g2_vs_storage, max_modes, DecayShape, MemoryParams, ModeCapacity};
pub use protocol::{
    coincidence_scaling, crosstalk_matrix, estimate_statistics, heralded_autocorrelation, run_trials, CountsTally,
    CrosstalkMatrix, ModeEstimate, ReadoutPolicy, ReadoutTiming, ScalingPoint, ScalingSetup, Schedule, TrialSpec,
};
pub use repeater::{multiplexed_rate, readout_latency, repetition_rate, train_storage_requirement, LatencyMode, LinkParams};
pub use stats::Estimate;
