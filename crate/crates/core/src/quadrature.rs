//! Composite Simpson quadrature on a mesh with knots at `u = ln m`, where
//! φ̃τ(x, ·) has derivative jumps. Several weight kernels are integrated
//! against one set of integrand samples.

use crate::abel::QuadSpec;
use crate::error::{convergence, Result};
use crate::types::ValueWithError;

/// Knots `ln m` are placed for `m <= KNOT_CAP`.
pub const KNOT_CAP: u64 = 10_000;

/// Coarsest Simpson panel width; level `r` uses `BASE_STEP / 2^r`.
const BASE_STEP: f64 = 0.25;

pub fn knot_cap_u() -> f64 {
    (KNOT_CAP as f64).ln()
}

/// `0`, every `ln m < t` with `2 <= m <= KNOT_CAP`, and `t`.
pub fn knots(t: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for m in 2..=KNOT_CAP {
        let u = (m as f64).ln();
        if u >= t {
            break;
        }
        out.push(u);
    }
    if t > 0.0 {
        out.push(t);
    }
    out
}

/// Nodes and weights of composite Simpson with panel width at most `h`
/// between consecutive knots.
fn simpson_mesh(knots: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![knots[0]];
    let mut weights = vec![0.0];
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let panels = ((b - a) / h).ceil().max(1.0) as usize;
        let step = (b - a) / (2 * panels) as f64;
        let w = step / 3.0;
        *weights.last_mut().unwrap() += w;
        for i in 1..=2 * panels {
            nodes.push(if i == 2 * panels { b } else { a + step * i as f64 });
            weights.push(if i == 2 * panels { w } else if i % 2 == 1 { 4.0 * w } else { 2.0 * w });
        }
    }
    (nodes, weights)
}

/// `∫_{knots[0]}^{knots.last} f(u) K_j(u) du` for each kernel `j`.
///
/// `kernels(u, out)` fills `out[j] = K_j(u)`. Panels are halved until every
/// kernel's integral moves by at most `tol * max(1, ∫|f K_j|)` between levels;
/// the Richardson-extrapolated value is returned with the last change as its
/// error estimate.
pub fn integrate_kernels<F, K>(
    mut f: F,
    kernels: K,
    n_kernels: usize,
    knots: &[f64],
    tol: f64,
    spec: &QuadSpec,
) -> Result<Vec<ValueWithError<f64>>>
where
    F: FnMut(f64) -> Result<f64>,
    K: Fn(f64, &mut [f64]),
{
    if knots.len() < 2 {
        return Ok(vec![ValueWithError::new(0.0, 0.0); n_kernels]);
    }
    let mut buf = vec![0.0; n_kernels];
    let mut previous: Option<Vec<f64>> = None;
    let mut last_gap = f64::INFINITY;
    for level in 0..=spec.max_refinements.max(1) {
        let h = BASE_STEP / (1u64 << level.min(60)) as f64;
        let (nodes, weights) = simpson_mesh(knots, h);
        let mut sums = vec![0.0; n_kernels];
        let mut scales = vec![0.0; n_kernels];
        for (&u, &w) in nodes.iter().zip(&weights) {
            let fu = f(u)?;
            kernels(u, &mut buf);
            for j in 0..n_kernels {
                let term = w * fu * buf[j];
                sums[j] += term;
                scales[j] += term.abs();
            }
        }
        if sums.iter().any(|v| !v.is_finite()) {
            return convergence("non-finite quadrature sum");
        }
        if let Some(prev) = previous {
            let mut done = true;
            last_gap = 0.0;
            for j in 0..n_kernels {
                let gap = (sums[j] - prev[j]).abs();
                let allowed = tol * scales[j].max(1.0);
                last_gap = f64::max(last_gap, gap / scales[j].max(1.0));
                done &= gap <= allowed;
            }
            if done {
                return Ok(sums
                    .iter()
                    .zip(&prev)
                    .map(|(&s, &p)| ValueWithError::new(s + (s - p) / 15.0, (s - p).abs()))
                    .collect());
            }
        }
        previous = Some(sums);
    }
    convergence(format!(
        "quadrature did not reach tol {tol:.1e} after {} refinements (last relative change {last_gap:.2e})",
        spec.max_refinements
    ))
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Cauchy kernel `d^{k-1} / (k-1)!` for `k >= 1` and `d >= 0`; the log-magnitude
/// form is used from `k >= 20` or `d >= 30`.
pub fn cauchy_kernel(k: usize, d: f64) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        return 1.0;
    }
    if d <= 0.0 {
        return 0.0;
    }
    if k >= 20 || d >= 30.0 {
        ((k - 1) as f64 * d.ln() - ln_factorial(k as u64 - 1)).exp()
    } else {
        d.powi(k as i32 - 1) / (1..k).map(|i| i as f64).product::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_layout() {
        let k = knots(2.0);
        assert_eq!(k.len(), 2 + 6); // 0, ln2..ln7, 2
        assert_eq!(k[0], 0.0);
        assert_eq!(*k.last().unwrap(), 2.0);
        assert!(k.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(knots(0.0), vec![0.0]);
        assert_eq!(knots(20.0).len(), KNOT_CAP as usize + 1);
    }

    #[test]
    fn mesh_weights_sum_to_length() {
        let k = knots(3.3);
        for &h in &[0.25, 0.01] {
            let (nodes, w) = simpson_mesh(&k, h);
            assert_eq!(nodes.len(), w.len());
            assert!((w.iter().sum::<f64>() - 3.3).abs() < 1e-13);
        }
    }

    #[test]
    fn polynomial_moments() {
        let spec = QuadSpec::default();
        let r = integrate_kernels(|u| Ok(u * u), |_, out| out[0] = 1.0, 1, &knots(2.0), 1e-12, &spec).unwrap();
        assert!((r[0].value - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn kernel_forms_agree() {
        for k in 1..30 {
            for &d in &[0.0f64, 0.3, 2.0, 29.0] {
                let direct = if k == 1 { 1.0 } else { d.powi(k as i32 - 1) / (1..k).map(|i| i as f64).product::<f64>() };
                let via = cauchy_kernel(k, d);
                assert!((via - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "k={k} d={d}");
            }
        }
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let spec = QuadSpec { max_refinements: 2, ..QuadSpec::default() };
        let r = integrate_kernels(|u| Ok((200.0 * u).sin()), |_, o| o[0] = 1.0, 1, &[0.0, 3.0], 1e-14, &spec);
        assert!(matches!(r, Err(crate::AuditError::Convergence(_))));
    }
}
