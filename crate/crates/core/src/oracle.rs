//! Reference evaluation of ζ(s) by direct Euler–Maclaurin summation.
//!
//! Nothing here touches the fractional-part machinery of [`crate::abel`];
//! the two routes are compared against each other by the audits, so they
//! must not share an evaluation path.

use num_complex::Complex64;

use crate::error::{domain, AuditError, Result};
use crate::types::{check_finite, ComplexValue, ValueWithError};

/// Even-index Bernoulli numbers B_2, B_4, ..., B_18.
const BERNOULLI_EVEN: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// The error model needs the first omitted coefficient, so the order stops one short of the table.
pub const MAX_EM_ORDER: usize = BERNOULLI_EVEN.len() - 1;

const SAFETY_FACTOR: f64 = 10.0;

/// Grid spacing used when bracketing critical-line zeros.
pub const ZERO_SCAN_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Number of explicit terms N; `None` picks `max(32, ceil(4 |Im s|))`.
    pub terms: Option<usize>,
    /// Number of Bernoulli correction terms M.
    pub em_order: usize,
    /// N is doubled until the error model certifies `tol`, but never past this cap.
    pub max_terms: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { terms: None, em_order: 6, max_terms: 1 << 20 }
    }
}

impl OracleConfig {
    pub fn default_terms(s: ComplexValue) -> usize {
        32usize.max((4.0 * s.im.abs()).ceil() as usize)
    }
}

/// ζ(s) for Re(s) > 0, s ≠ 1, with `err_estimate <= tol`.
pub fn zeta_ref(s: ComplexValue, tol: f64) -> Result<ValueWithError<ComplexValue>> {
    zeta_ref_with(s, tol, &OracleConfig::default())
}

pub fn zeta_ref_with(
    s: ComplexValue,
    tol: f64,
    config: &OracleConfig,
) -> Result<ValueWithError<ComplexValue>> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return domain("non-finite argument");
    }
    if s.re <= 0.0 {
        return domain(format!("Re(s) = {} must be positive", s.re));
    }
    if s == Complex64::new(1.0, 0.0) {
        return domain("pole at s = 1");
    }
    if tol.is_nan() || tol <= 0.0 {
        return domain(format!("tol = {tol} must be positive"));
    }
    if config.em_order > MAX_EM_ORDER {
        return domain(format!("em_order {} exceeds {MAX_EM_ORDER}", config.em_order));
    }

    let mut n = config.terms.unwrap_or_else(|| OracleConfig::default_terms(s)).max(2);
    loop {
        let (value, truncation, roundoff) = euler_maclaurin(s, n, config.em_order)?;
        let err = truncation + roundoff;
        if err <= tol {
            return Ok(ValueWithError::new(value, err));
        }
        // More terms only shrink the truncation part.
        if n >= config.max_terms || roundoff > tol {
            return Err(AuditError::Convergence(format!(
                "oracle error model gives {err:.3e} > tol {tol:.3e} at N = {n}"
            )));
        }
        n = (2 * n).min(config.max_terms);
    }
}

/// One Euler–Maclaurin evaluation with N explicit terms and M corrections.
/// Returns the value, the modelled truncation error and the roundoff model.
fn euler_maclaurin(s: ComplexValue, n: usize, m: usize) -> Result<(ComplexValue, f64, f64)> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k in 1..n {
        let term = (-s * (k as f64).ln()).exp();
        abs_sum += term.norm();
        sum += term;
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    sum += n_pow * nf / (s - 1.0) + n_pow * 0.5;

    // j-th correction: B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    let mut rising = s;
    let mut factorial = 2.0;
    let mut n_scale = n_pow / nf;
    let mut omitted = 0.0;
    for j in 1..=m + 1 {
        let term = rising * n_scale * (BERNOULLI_EVEN[j - 1] / factorial);
        if j <= m {
            sum += term;
        } else {
            omitted = term.norm();
        }
        let a = (2 * j - 1) as f64;
        rising = rising * (s + a) * (s + a + 1.0);
        factorial *= (2 * j + 1) as f64 * (2 * j + 2) as f64;
        n_scale /= nf * nf;
    }
    let value = check_finite(sum, "zeta_ref")?;
    // exp(-s ln k) inherits a relative error of about |s| ln k / 2 ulps from its argument.
    let roundoff = f64::EPSILON * (abs_sum + 1.0) * (2.0 + 0.5 * s.norm() * ln_n);
    Ok((value, SAFETY_FACTOR * omitted, roundoff))
}

fn critical_abs2(tau: f64, tol: f64) -> Result<f64> {
    Ok(zeta_ref(Complex64::new(0.5, tau), tol)?.value.norm_sqr())
}

/// Golden-section minimisation of `f` on `[a, b]`.
pub(crate) fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Every critical-line zero in `[tau_lo, tau_hi]` whose refined |ζ| falls below `tol`,
/// in ascending order. The second element is the smallest |ζ| encountered.
pub fn critical_line_zeros(tau_lo: f64, tau_hi: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    if !(tau_lo > 0.0 && tau_hi > tau_lo && tau_hi.is_finite()) {
        return domain(format!("need 0 < tau_lo < tau_hi, got [{tau_lo}, {tau_hi}]"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return domain(format!("tol = {tol} must be positive"));
    }
    let eval_tol = (tol * 1e-3).max(1e-13);
    let steps = ((tau_hi - tau_lo) / ZERO_SCAN_STEP).ceil().max(2.0) as usize;
    let h = (tau_hi - tau_lo) / steps as f64;
    let taus: Vec<f64> = (0..=steps).map(|i| tau_lo + h * i as f64).collect();
    let vals = taus
        .iter()
        .map(|&t| critical_abs2(t, eval_tol))
        .collect::<Result<Vec<_>>>()?;

    let mut zeros: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    for i in 0..vals.len() {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if !(vals[i] <= left && vals[i] <= right) {
            continue;
        }
        let a = taus[i.saturating_sub(1)];
        let b = taus[(i + 1).min(taus.len() - 1)];
        let (tau, f) = golden_section(|t| critical_abs2(t, eval_tol), a, b, 1e-13 * b)?;
        let abs = f.sqrt();
        best = best.min(abs);
        if abs < tol && zeros.last().is_none_or(|&z| (tau - z).abs() > 1e-9) {
            zeros.push(tau);
        }
    }
    Ok((zeros, best))
}

/// Locate a zero of ζ(1/2 + iτ) with τ in `[tau_lo, tau_hi]` and |ζ| < `tol`.
pub fn find_zero_on_critical_line(tau_lo: f64, tau_hi: f64, tol: f64) -> Result<f64> {
    let (zeros, best_abs) = critical_line_zeros(tau_lo, tau_hi, tol)?;
    zeros
        .first()
        .copied()
        .ok_or(AuditError::NoZeroFound { lo: tau_lo, hi: tau_hi, best_abs })
}
