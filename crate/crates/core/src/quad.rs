//! Adaptive Simpson quadrature.

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The interval is first split at every point in `breaks` that lies inside
/// it and then into `panels` equal pieces, so narrow features (a Lorentzian
/// line on a broad Gaussian) are not stepped over by the initial samples.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], panels: usize, rel_tol: f64) -> f64 {
    let mut nodes: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    // The tolerance is relative to the integral itself; a coarse guess can
    // overshoot narrow peaks badly, so rerun until the scale settles.
    let mut scale: f64 = nodes.windows(2).map(|w| simpson(&f, w[0], w[1]).0).sum::<f64>().abs();
    let mut sum = 0.0;
    for _ in 0..4 {
        sum = adaptive_sum(&f, &nodes, panels, rel_tol * scale.max(f64::MIN_POSITIVE));
        if sum.abs() >= 0.5 * scale {
            break;
        }
        scale = sum.abs();
    }
    sum
}

fn adaptive_sum<F: Fn(f64) -> f64>(f: &F, nodes: &[f64], panels: usize, abs_tol: f64) -> f64 {
    let per_panel = panels.max(1);
    let total_panels = (nodes.len() - 1) * per_panel;
    let mut sum = 0.0;
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / per_panel as f64;
        for k in 0..per_panel {
            let lo = w[0] + h * k as f64;
            let hi = if k + 1 == per_panel { w[1] } else { lo + h };
            let (whole, fm) = simpson(f, lo, hi);
            let (fa, fb) = (f(lo), f(hi));
            sum += refine(f, lo, hi, fa, fm, fb, whole, abs_tol / total_panels as f64, 48);
        }
    }
    sum
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)), fm)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, &[], 1, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian_on_wide_domain() {
        let g = 1e-3;
        let v = integrate(|x| 1.0 / (1.0 + (x / g).powi(2)), -1e3, 1e3, &[0.0], 8, 1e-10);
        let exact = 2.0 * g * (1e3 / g).atan();
        assert!((v - exact).abs() / exact < 1e-8);
    }
}
