use muxmem_core::model::MemoryParams;
use muxmem_core::protocol::{
    crosstalk_matrix, estimate_cell, estimate_statistics, run_trials, ReadoutPolicy, ReadoutTiming, Schedule, TrialSpec,
};
use proptest::prelude::*;

fn schedule(n: u32) -> Schedule {
    let timing = ReadoutTiming::ImmediateAfterLast;
    let tl = Schedule::timeline_for(n, 800e-9, 1.0, timing);
    Schedule::build(n, 800e-9, 266e-9, &tl, timing).unwrap()
}

fn params() -> impl Strategy<Value = MemoryParams> {
    (0.01f64..0.2, 0.1f64..1.0, 0.1f64..1.0, 0.1f64..1.0, 1.0f64..40.0, 0.3f64..1.0, 1u32..8).prop_map(
        |(p, eta_w, eta_r, p_int0, beta_ratio, xi_eg, n_modes)| MemoryParams {
            p,
            eta_w,
            eta_r,
            p_int0,
            beta_ratio,
            xi_eg,
            n_modes,
            ..MemoryParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_are_conserved(m in params(), seed in any::<u64>(), ff in any::<bool>()) {
        let policy = if ff { ReadoutPolicy::FeedForward } else { ReadoutPolicy::Fixed(m.n_modes - 1) };
        let t = run_trials(&m, &schedule(m.n_modes), &TrialSpec::new(5000, seed, policy)).unwrap();
        prop_assert!(t.check().is_ok(), "{:?}", t.check());
        prop_assert_eq!(t.n_trials, 5000);
    }

    #[test]
    fn worker_count_never_changes_tallies(m in params(), seed in any::<u64>()) {
        let s = schedule(m.n_modes);
        let spec = TrialSpec::new(9000, seed, ReadoutPolicy::FeedForward);
        let a = run_trials(&m, &s, &spec.with_workers(Some(1))).unwrap();
        let b = run_trials(&m, &s, &spec.with_workers(Some(3))).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Storage decay is included in the model value through the actual
    /// storage time of the read mode.
    #[test]
    fn fixed_readout_converges_to_model(m in params(), seed in any::<u64>()) {
        let s = schedule(m.n_modes);
        let j = m.n_modes as usize / 2;
        let t = run_trials(&m, &s, &TrialSpec::new(300_000, seed, ReadoutPolicy::Fixed(j as u32))).unwrap();
        let e = estimate_cell(&t, j, j);
        let ts = s.storage_time(j);
        prop_assert!(e.p_w.unwrap().z_score(m.write_prob()) < 3.5);
        prop_assert!(e.p_r_given_w.unwrap().z_score(m.retrieval_given_write(ts).unwrap()) < 3.5);
        prop_assert!(e.g2.unwrap().z_score(m.cross_correlation(ts).unwrap()) < 3.5);
    }
}

#[test]
fn different_seeds_agree_statistically() {
    let m = MemoryParams { n_modes: 4, ..MemoryParams::default() };
    let s = schedule(4);
    let a = run_trials(&m, &s, &TrialSpec::new(200_000, 1, ReadoutPolicy::FeedForward)).unwrap();
    let b = run_trials(&m, &s, &TrialSpec::new(200_000, 2, ReadoutPolicy::FeedForward)).unwrap();
    assert_ne!(a, b);
    for (x, y) in estimate_statistics(&a).iter().zip(estimate_statistics(&b).iter()) {
        if x.herald_mode != x.read_mode {
            continue;
        }
        let (gx, gy) = (x.g2.unwrap(), y.g2.unwrap());
        let combined = gx.stderr.hypot(gy.stderr);
        assert!((gx.value - gy.value).abs() < 3.0 * combined, "{gx:?} {gy:?}");
    }
}

#[test]
fn off_diagonal_entries_are_uncorrelated() {
    let m = MemoryParams { n_modes: 3, ..MemoryParams::default() };
    let x = crosstalk_matrix(&m, &schedule(3), &TrialSpec::new(300_000, 11, ReadoutPolicy::FeedForward)).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let g = x.get(i, j).unwrap();
            if i != j {
                assert!(g.z_score(1.0) < 3.5, "({i},{j}) {g:?}");
            } else {
                assert!(g.value > 5.0);
            }
        }
    }
}
