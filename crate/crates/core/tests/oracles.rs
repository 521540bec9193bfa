//! Cross-checks against independent reference computations written here in
//! plain quadrature, with no code shared with the library.

use zeta_audit::abel::{abel_zeta, frac_tail, phi, phi_tilde, QuadSpec};
use zeta_audit::expansion::{iterated_integral, r_tilde, ExpansionParams, PhiTilde};
use zeta_audit::oracle::{zeta_ref, zeta_ref_with, OracleConfig};
use zeta_audit::scanner::scan_phi_zeros;
use zeta_audit::{Horizon, StripPoint};

/// `[I_1, ..., I_k_max]` at `t` by repeated cumulative trapezoid sums.
fn nested_trapezoid(f: impl Fn(f64) -> f64, t: f64, k_max: usize, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let mut level: Vec<f64> = (0..=steps).map(|i| f(i as f64 * h)).collect();
    let mut out = Vec::new();
    for _ in 0..k_max {
        let mut next = vec![0.0; steps + 1];
        for i in 1..=steps {
            next[i] = next[i - 1] + 0.5 * h * (level[i - 1] + level[i]);
        }
        out.push(next[steps]);
        level = next;
    }
    out
}

/// Adaptive Simpson on `[a, b]`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

fn psi_ref(x: f64, tau: f64) -> f64 {
    -tau / ((1.0 - x).powi(2) + tau * tau)
}

/// ψ(x) + ∫₀^t {e^u} e^{-xu} sin(τu) du, split where `e^u` crosses an integer.
fn phi_direct(x: f64, tau: f64, t: f64) -> f64 {
    let mut total = psi_ref(x, tau);
    let mut m = 1.0f64;
    while m.ln() < t {
        let (a, b) = (m.ln(), (m + 1.0).ln().min(t));
        let f = move |u: f64| (u.exp() - m) * (-x * u).exp() * (tau * u).sin();
        total += adaptive_simpson(&f, a, b, 1e-14);
        m += 1.0;
    }
    total
}

#[test]
fn iterated_integrals_match_nested_trapezoid() {
    let f = |u: f64| (-0.5 * u).exp() * (3.0 * u).cos() + u;
    let t = 2.5;
    let reference = nested_trapezoid(f, t, 3, 400_000);
    for (k, want) in (1..=3).zip(reference) {
        let got = iterated_integral(k, t, f, &QuadSpec::default()).unwrap();
        assert!((got - want).abs() < 1e-8, "k = {k}: {got} vs {want}");
    }
}

#[test]
fn phi_tilde_second_integral_matches_nested_trapezoid() {
    let spec = QuadSpec::default();
    let field = PhiTilde::new(0.4, 0.5, 2.0, &spec).unwrap();
    let reference = nested_trapezoid(|u| field.eval(u), 2.0, 2, 200_000);
    let got = field.iterated(2, 2.0, &spec).unwrap();
    assert!((got[2].value - reference[1]).abs() < 1e-6, "{} vs {}", got[2].value, reference[1]);
    assert!((got[1].value - reference[0]).abs() < 1e-6);
}

#[test]
fn phi_tilde_matches_direct_integration() {
    let spec = QuadSpec::default();
    let got = phi_tilde(0.4, 0.5, 2.0, 3.0, &spec).unwrap();
    let want = psi_ref(0.5, 2.0) - psi_ref(0.4, 2.0) + phi_direct(0.4, 2.0, 3.0);
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn finite_horizon_agrees_across_the_segment_cap() {
    // Beyond `n_segments` the finite-horizon value comes from φ(∞) and the tail
    // expansion; below it, from summed segments. Both routes must agree.
    let p = StripPoint::new(0.3, 7.0).unwrap();
    let coarse = QuadSpec { n_segments: 2_000, ..QuadSpec::default() };
    let fine = QuadSpec::default();
    for t in [8.0, 9.5, 11.0] {
        let a = phi(p, Horizon::Finite(t), &coarse).unwrap();
        let b = phi(p, Horizon::Finite(t), &fine).unwrap();
        assert!((a.value - b.value).abs() < 1e-10, "t = {t}: {} vs {}", a.value, b.value);
        assert!((a.value - b.value).abs() <= a.err_estimate + b.err_estimate + 1e-13);
    }
    let direct = phi_direct(0.3, 7.0, 4.0);
    let lib = phi(p, Horizon::Finite(4.0), &fine).unwrap().value;
    assert!((lib - direct).abs() < 1e-10, "{lib} vs {direct}");
}

#[test]
fn finite_horizon_minus_tail_is_the_limit() {
    let spec = QuadSpec::default();
    for (x, tau) in [(0.4, 2.0), (0.7, 9.0)] {
        let p = StripPoint::new(x, tau).unwrap();
        let limit = phi(p, Horizon::Infinite, &spec).unwrap();
        for t in [1.0f64, 5.0, 20.0] {
            let finite = phi(p, Horizon::Finite(t), &spec).unwrap();
            let tail = frac_tail(t.exp(), p.s(), spec.em_order).unwrap();
            let gap = (finite.value - tail.value.im - limit.value).abs();
            let budget = 2.0 * (finite.err_estimate + tail.err_estimate + limit.err_estimate);
            assert!(gap <= budget, "x = {x}, t = {t}: gap {gap:e} > {budget:e}");
        }
    }
}

#[test]
fn doubling_segments_stays_within_error_bars() {
    let half = QuadSpec { n_segments: 50_000, ..QuadSpec::default() };
    let full = QuadSpec::default();
    for (x, tau) in [(0.2, 5.0), (0.5, 21.02204), (0.8, 1.0)] {
        let p = StripPoint::new(x, tau).unwrap();
        let a = phi(p, Horizon::Infinite, &half).unwrap();
        let b = phi(p, Horizon::Infinite, &full).unwrap();
        assert!((a.value - b.value).abs() <= a.err_estimate.max(b.err_estimate), "{x}, {tau}");
        let za = abel_zeta(p, &half).unwrap();
        let zb = abel_zeta(p, &full).unwrap();
        assert!((za.value - zb.value).norm() <= za.err_estimate.max(zb.err_estimate), "{x}, {tau}");
    }
}

#[test]
fn normalized_remainder_survives_grid_refinement() {
    let p = ExpansionParams::new(0.4, Some(0.5), 0.6, 2.0, Some(2.0)).unwrap();
    let base = r_tilde(&p, 8, &QuadSpec::default()).unwrap();
    let finer = r_tilde(&p, 8, &QuadSpec { abs_tol: 1e-12, ..QuadSpec::default() }).unwrap();
    assert!((base - finer).abs() < 1e-6, "{base} vs {finer}");
}

#[test]
fn refinement_is_stable() {
    let p = StripPoint::new(0.35, 12.0).unwrap();
    let base = abel_zeta(p, &QuadSpec::default()).unwrap();
    for (n, m) in [(20_000, 2), (20_000, 6), (400_000, 4), (100_000, 2)] {
        let spec = QuadSpec { n_segments: n, em_order: m, ..QuadSpec::default() };
        let v = abel_zeta(p, &spec).unwrap();
        let diff = (v.value - base.value).norm();
        assert!(diff < 1e-10, "N = {n}, M = {m}: diff {diff:e}");
        assert!(diff <= v.err_estimate + base.err_estimate, "N = {n}, M = {m}: diff {diff:e} exceeds error bars");
    }
    // Without tail corrections the remainder at N = 1e5 is ~1e-7; that must be
    // reported, not returned.
    let bare = QuadSpec { em_order: 0, ..QuadSpec::default() };
    assert!(matches!(abel_zeta(p, &bare), Err(zeta_audit::AuditError::Convergence(_))));
}

#[test]
fn oracle_is_self_consistent() {
    for (x, tau) in [(0.5, 14.134725), (0.2, 3.0), (0.9, 40.0)] {
        let s = StripPoint::new(x, tau).unwrap().s();
        let base = zeta_ref(s, 1e-12).unwrap();
        let n0 = 64usize.max((4.0 * tau).ceil() as usize);
        for cfg in [
            OracleConfig { terms: Some(2 * n0), ..OracleConfig::default() },
            OracleConfig { em_order: 8, ..OracleConfig::default() },
        ] {
            let v = zeta_ref_with(s, 1e-12, &cfg).unwrap();
            assert!((v.value - base.value).norm() < 1e-12, "{s}: {cfg:?}");
        }
    }
}

#[test]
fn scan_sign_pattern_matches_oracle() {
    let tau = 2.0;
    let report = scan_phi_zeros(tau, 0.05, 0.95, 181, &QuadSpec::default()).unwrap();
    let mut library_changes = 0;
    let mut oracle_changes = 0;
    let mut prev: Option<(f64, f64)> = None;
    for sample in &report.samples {
        let s = StripPoint::new(sample.x, tau).unwrap().s();
        let oracle = (zeta_ref(s, 1e-12).unwrap().value / s).im;
        assert!((oracle - sample.phi).abs() < 1e-8, "x = {}", sample.x);
        if let Some((p_lib, p_or)) = prev {
            library_changes += usize::from(p_lib * sample.phi < 0.0);
            oracle_changes += usize::from(p_or * oracle < 0.0);
        }
        prev = Some((sample.phi, oracle));
    }
    assert_eq!(library_changes, oracle_changes);
    assert_eq!(report.zero_count, 0);
    assert!(report.oracle_zero_xs.is_empty());
}
