use std::f64::consts::PI;

use muxmem_core::cavity::PulseSpec;
use muxmem_core::constants::RB87_SPIN_WAVE_ZEEMAN;
use muxmem_core::ensemble::{sample_ensemble, velocity_sigma, AtomEnsemble, FieldTimeline};
use muxmem_core::protocol::{ReadoutTiming, Schedule};
use muxmem_core::stats::peak_and_fwhm;

const SIGMA_Z: f64 = 2e-3;

fn still_cloud(seed: u64) -> AtomEnsemble {
    sample_ensemble(10_000, SIGMA_Z, 40e-6, 0.0, RB87_SPIN_WAVE_ZEEMAN, seed).unwrap().frozen()
}

#[test]
fn gaussian_dephasing_matches_closed_form() {
    let cloud = still_cloud(17);
    let g = 0.5;
    let tl = FieldTimeline::constant(g);
    let sigma_w = 2.0 * PI * RB87_SPIN_WAVE_ZEEMAN * g * 100.0 * SIGMA_Z;
    for t in [0.0, 0.2e-6, 0.5e-6, 1e-6, 2e-6] {
        let est = cloud.coherence_estimate(&tl, 0.0, t, 1.0).unwrap();
        let exact = (-(sigma_w * t).powi(2)).exp();
        assert!(est.z_score(exact) < 3.0, "t={t}: {est:?} vs {exact}");
    }
}

#[test]
fn motion_decays_as_gaussian() {
    let temperature = 40e-6;
    let k_sw = 1.0 / (velocity_sigma(temperature) * 72e-6);
    let cloud = sample_ensemble(10_000, SIGMA_Z, temperature, k_sw, RB87_SPIN_WAVE_ZEEMAN, 5).unwrap();
    let tl = FieldTimeline::constant(0.0);
    for t in [0.0, 20e-6, 50e-6, 72e-6, 100e-6] {
        let est = cloud.coherence_estimate(&tl, 0.0, t, 0.4).unwrap();
        let exact = 0.4 * (-(k_sw * velocity_sigma(temperature) * t).powi(2)).exp();
        assert!(est.z_score(exact) < 3.0, "t={t}: {est:?} vs {exact}");
    }
}

fn echo(cloud: &AtomEnsemble, duration: f64, t_rev: f64, tw: f64) -> (Vec<f64>, Vec<f64>) {
    let tl = FieldTimeline::reversal(1.0, t_rev);
    let grid: Vec<f64> = (0..=800).map(|i| 2.0 * t_rev - tw - 4e-6 + 8e-6 * f64::from(i) / 800.0).collect();
    let profile = cloud
        .echo_profile(&tl, tw, &PulseSpec::gaussian(duration), 0.4, &grid)
        .unwrap();
    profile.into_iter().unzip()
}

#[test]
fn echo_peaks_at_rephasing_time() {
    let cloud = sample_ensemble(2000, SIGMA_Z, 40e-6, 0.0, RB87_SPIN_WAVE_ZEEMAN, 3).unwrap();
    let (t_rev, tw) = (6e-6, 1e-6);
    let duration = 266e-9;
    let (xs, ys) = echo(&cloud, duration, t_rev, tw);
    let (at, _, _) = peak_and_fwhm(&xs, &ys).unwrap();
    let step = xs[1] - xs[0];
    assert!((at - (2.0 * t_rev - tw)).abs() <= step + duration / 2.0);
}

#[test]
fn longer_pulses_give_lower_wider_echoes() {
    let cloud = sample_ensemble(2000, SIGMA_Z, 40e-6, 0.0, RB87_SPIN_WAVE_ZEEMAN, 3).unwrap();
    let mut last: Option<(f64, f64)> = None;
    for d in [133e-9, 266e-9, 532e-9, 1064e-9] {
        let (xs, ys) = echo(&cloud, d, 6e-6, 2e-6);
        let (_, peak, width) = peak_and_fwhm(&xs, &ys).unwrap();
        if let Some((p, w)) = last {
            assert!(peak < p && width > w, "{d}: peak {peak} width {width} after {p} {w}");
        }
        last = Some((peak, width));
    }
}

#[test]
fn freeze_release_rephases_after_hold() {
    let (tw, tf, trel) = (0.4e-6, 4e-6, 30e-6);
    let tl = FieldTimeline::freeze_release(1.0, tf, trel);
    let t = tl.rephasing_time(tw).unwrap();
    assert!((t - (trel + (tf - tw))).abs() < 1e-15);
    let cloud = still_cloud(2);
    assert!((cloud.collective_efficiency(&tl, tw, t, 1.0).unwrap() - 1.0).abs() < 1e-9);
    assert!(cloud.collective_efficiency(&tl, tw, trel, 1.0).unwrap() < 0.01);
}

#[test]
fn drift_deficit_grows_along_readout_order() {
    let cloud = still_cloud(8);
    let timing = ReadoutTiming::ImmediateAfterLast;
    let programmed = Schedule::timeline_for(10, 800e-9, 5.0, timing);
    let schedule = Schedule::build(10, 800e-9, 266e-9, &programmed, timing).unwrap();
    let drifting = programmed.clone().with_drift(1e3);
    let deficit = |m: usize| {
        let (tw, tr) = (schedule.write_times[m], schedule.readout_times[m]);
        1.0 - cloud.collective_efficiency(&drifting, tw, tr, 1.0).unwrap()
            / cloud.collective_efficiency(&programmed, tw, tr, 1.0).unwrap()
    };
    let order = schedule.readout_order();
    let deficits: Vec<f64> = order.iter().map(|&m| deficit(m)).collect();
    assert!(deficits.windows(2).all(|w| w[1] >= w[0]), "{deficits:?}");
    assert!(deficits[deficits.len() - 1] > 0.05);
}
