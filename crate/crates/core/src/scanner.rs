//! Zero scans of x ↦ φτ(x) along a horizontal line, and the oracle-backed
//! audits of the identity φτ(x) = Im(ζ(s)/s) and of the reflection symmetry.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abel::{phi_infinity, QuadSpec};
use crate::audit::{AuditRecord, ClaimId};
use crate::error::{domain, AuditError, Result};
use crate::oracle::{golden_section, zeta_ref};
use crate::types::{StripPoint, ValueWithError};

/// Tolerance of the identity audit.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Requested accuracy of oracle evaluations inside this module.
const ORACLE_EVAL_TOL: f64 = 1e-12;
/// A scan is abandoned when more than this fraction of grid points fail.
const MAX_GAP_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub zero_tol: f64,
    pub merge_radius: f64,
    pub x_resolution: f64,
    /// |ζ| threshold for listing oracle zeros on the scanned line.
    pub oracle_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { zero_tol: 1e-8, merge_radius: 1e-6, x_resolution: 1e-9, oracle_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub x: f64,
    pub phi: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanZero {
    pub x: f64,
    /// |φτ| at `x`.
    pub residual: f64,
    pub err_estimate: f64,
    /// |φτ| dipped below `zero_tol` without a sign change.
    pub tangent: bool,
    /// The zero is established independently of rounding: either a sign change
    /// whose endpoint values exceed their error estimates, or a touch whose
    /// residual plus error stays below `zero_tol`; and in both cases
    /// `err_estimate < 0.1 zero_tol`.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub tau: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub steps: usize,
    pub samples: Vec<ScanSample>,
    /// Grid points whose evaluation failed.
    pub gaps: Vec<f64>,
    pub zeros: Vec<ScanZero>,
    pub zero_count: usize,
    pub oracle_zero_xs: Vec<f64>,
}

impl ScanReport {
    pub fn certified_count(&self) -> usize {
        self.zeros.iter().filter(|z| z.certified).count()
    }
}

/// φτ(x) with τ < 0 redirected through oddness.
fn phi_line(x: f64, tau: f64, spec: &QuadSpec) -> Result<ValueWithError<f64>> {
    let v = phi_infinity(StripPoint::new(x, tau.abs())?, spec)?;
    Ok(if tau < 0.0 { ValueWithError::new(-v.value, v.err_estimate) } else { v })
}

pub fn scan_phi_zeros(tau: f64, x_min: f64, x_max: f64, steps: usize, spec: &QuadSpec) -> Result<ScanReport> {
    scan_phi_zeros_with(tau, x_min, x_max, steps, spec, &ScanOptions::default())
}

pub fn scan_phi_zeros_with(
    tau: f64,
    x_min: f64,
    x_max: f64,
    steps: usize,
    spec: &QuadSpec,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if !(0.0 < x_min && x_min < x_max && x_max < 1.0) {
        return domain(format!("need 0 < x_min < x_max < 1, got ({x_min}, {x_max})"));
    }
    if steps < 2 {
        return domain(format!("steps = {steps} must be >= 2"));
    }
    if !(tau != 0.0 && tau.is_finite()) {
        return domain("tau must be finite and nonzero");
    }
    spec.validate()?;
    let h = (x_max - x_min) / (steps - 1) as f64;
    let grid: Vec<f64> = (0..steps)
        .map(|i| if i == steps - 1 { x_max } else { x_min + h * i as f64 })
        .collect();

    let evaluated: Vec<Result<ValueWithError<f64>>> = grid.par_iter().map(|&x| phi_line(x, tau, spec)).collect();
    let mut samples = Vec::with_capacity(steps);
    let mut gaps = Vec::new();
    let mut first_error = None;
    for (&x, r) in grid.iter().zip(evaluated) {
        match r {
            Ok(v) => samples.push(ScanSample { x, phi: v.value, err: v.err_estimate }),
            Err(e) => {
                gaps.push(x);
                first_error.get_or_insert(e);
            }
        }
    }
    if gaps.len() as f64 > MAX_GAP_RATIO * steps as f64 {
        return Err(first_error.unwrap_or_else(|| AuditError::Convergence("scan failed".into())));
    }

    let zeros = locate_zeros(&samples, tau, spec, opts)?;
    let zeros: Vec<ScanZero> = zeros.into_iter().filter(|z| z.x > x_min && z.x < x_max).collect();
    let oracle_zero_xs = oracle_zeros_on_line(tau, &grid, opts.oracle_tol)?;
    Ok(ScanReport {
        tau,
        x_min,
        x_max,
        steps,
        samples,
        gaps,
        zero_count: zeros.len(),
        zeros,
        oracle_zero_xs,
    })
}

fn locate_zeros(samples: &[ScanSample], tau: f64, spec: &QuadSpec, opts: &ScanOptions) -> Result<Vec<ScanZero>> {
    let eval = |x: f64| phi_line(x, tau, spec);
    let mut found: Vec<ScanZero> = Vec::new();

    for (i, s) in samples.iter().enumerate() {
        if s.phi == 0.0 {
            found.push(ScanZero {
                x: s.x,
                residual: 0.0,
                err_estimate: s.err,
                tangent: false,
                certified: s.err < 0.1 * opts.zero_tol,
            });
            continue;
        }
        if let Some(next) = samples.get(i + 1) {
            if next.phi != 0.0 && s.phi.signum() != next.phi.signum() {
                found.push(bisect(&eval, *s, *next, opts)?);
                continue;
            }
        }
        // Same sign on both sides: a touch, or a pair of crossings between samples.
        if i == 0 || i + 1 >= samples.len() {
            if s.phi.abs() < opts.zero_tol {
                found.push(touch(s.x, s.phi, s.err, opts));
            }
            continue;
        }
        let (a, b) = (samples[i - 1], samples[i + 1]);
        let sign = s.phi.signum();
        if a.phi.signum() != sign || b.phi.signum() != sign {
            continue;
        }
        if !(s.phi.abs() <= a.phi.abs() && s.phi.abs() <= b.phi.abs()) {
            continue;
        }
        if s.phi.abs() >= opts.zero_tol && !parabola_may_reach_zero(a, *s, b, opts.zero_tol) {
            continue;
        }
        let (xm, fm) = golden_section(|x| Ok(sign * eval(x)?.value), a.x, b.x, opts.x_resolution)?;
        let at = eval(xm)?;
        if fm < 0.0 {
            let mid = ScanSample { x: xm, phi: at.value, err: at.err_estimate };
            found.push(bisect(&eval, a, mid, opts)?);
            found.push(bisect(&eval, mid, b, opts)?);
        } else if fm < opts.zero_tol {
            found.push(touch(xm, at.value, at.err_estimate, opts));
        }
    }

    found.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut merged: Vec<ScanZero> = Vec::new();
    for z in found {
        match merged.last_mut() {
            Some(last) if (z.x - last.x).abs() <= opts.merge_radius => {
                if last.tangent && !z.tangent {
                    *last = z;
                }
            }
            _ => merged.push(z),
        }
    }
    Ok(merged)
}

fn touch(x: f64, phi: f64, err: f64, opts: &ScanOptions) -> ScanZero {
    ScanZero {
        x,
        residual: phi.abs(),
        err_estimate: err,
        tangent: true,
        certified: phi.abs() + err < opts.zero_tol && err < 0.1 * opts.zero_tol,
    }
}

/// Whether the parabola through three same-signed samples dips to within `tol` of zero.
fn parabola_may_reach_zero(a: ScanSample, m: ScanSample, b: ScanSample, tol: f64) -> bool {
    let (h1, h2) = (m.x - a.x, b.x - m.x);
    let d1 = (m.phi - a.phi) / h1;
    let d2 = (b.phi - m.phi) / h2;
    let curv = (d2 - d1) / (h1 + h2); // half the second derivative
    if curv == 0.0 {
        return false;
    }
    let slope = d1 + curv * h1; // derivative at m
    let vertex = m.phi - slope * slope / (4.0 * curv);
    vertex.signum() != m.phi.signum() || vertex.abs() < tol
}

fn bisect<F>(eval: &F, lo: ScanSample, hi: ScanSample, opts: &ScanOptions) -> Result<ScanZero>
where
    F: Fn(f64) -> Result<ValueWithError<f64>>,
{
    let certified_bracket = lo.phi.abs() > lo.err && hi.phi.abs() > hi.err;
    let (mut a, mut b) = (lo, hi);
    let mut err = lo.err.max(hi.err);
    while b.x - a.x > opts.x_resolution {
        let xm = 0.5 * (a.x + b.x);
        let v = eval(xm)?;
        err = err.max(v.err_estimate);
        let m = ScanSample { x: xm, phi: v.value, err: v.err_estimate };
        if m.phi == 0.0 {
            a = m;
            b = m;
            break;
        }
        if m.phi.signum() == a.phi.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a.x + b.x);
    let residual = eval(x)?.value.abs();
    Ok(ScanZero {
        x,
        residual,
        err_estimate: err,
        tangent: false,
        certified: certified_bracket && err < 0.1 * opts.zero_tol,
    })
}

/// x-positions on the grid's span where |ζ(x + iτ)| falls below `tol`.
fn oracle_zeros_on_line(tau: f64, grid: &[f64], tol: f64) -> Result<Vec<f64>> {
    let abs_zeta = |x: f64| -> Result<f64> { Ok(zeta_ref(Complex64::new(x, tau), ORACLE_EVAL_TOL)?.value.norm()) };
    let vals = grid.par_iter().map(|&x| abs_zeta(x)).collect::<Result<Vec<_>>>()?;
    let mut out: Vec<f64> = Vec::new();
    for i in 0..vals.len() {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if !(vals[i] <= left && vals[i] <= right) {
            continue;
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (x, f) = golden_section(abs_zeta, a, b, 1e-12)?;
        if f < tol && out.last().is_none_or(|&p| (x - p).abs() > 1e-9) {
            out.push(x);
        }
    }
    Ok(out)
}

/// One record per τ: zero_count against the claimed maximum of one.
///
/// The verdict is pass when at most one zero is found, fail when at least two
/// zeros are certified, and inconclusive otherwise. Scan failures are recorded
/// as inconclusive rather than raised.
pub fn audit_proposition(tau_list: &[f64], spec: &QuadSpec) -> Vec<AuditRecord> {
    audit_proposition_on(tau_list, 0.05, 0.95, 1801, spec)
}

pub fn audit_proposition_on(tau_list: &[f64], x_min: f64, x_max: f64, steps: usize, spec: &QuadSpec) -> Vec<AuditRecord> {
    tau_list
        .iter()
        .map(|&tau| match scan_phi_zeros(tau, x_min, x_max, steps, spec) {
            Ok(report) => proposition_record(&report),
            Err(e) => AuditRecord::new(
                ClaimId::Prop1,
                [("tau", tau), ("scan_failed", 1.0), ("error_code", error_code(&e))],
                0.0,
                1.0,
                1.0,
                0.5,
                f64::MAX,
            ),
        })
        .collect()
}

fn error_code(e: &AuditError) -> f64 {
    match e {
        AuditError::Domain(_) => 2.0,
        _ => 3.0,
    }
}

pub fn proposition_record(report: &ScanReport) -> AuditRecord {
    let count = report.zero_count;
    let certified = report.certified_count();
    let residual = count.saturating_sub(1) as f64;
    // A violation counts as established only with two certified zeros.
    let err = if certified >= 2 { 0.0 } else { residual };
    let matched = report
        .oracle_zero_xs
        .iter()
        .filter(|&&xo| report.zeros.iter().any(|z| (z.x - xo).abs() <= 1e-3))
        .count();
    let mut params: Vec<(String, f64)> = vec![
        ("tau".into(), report.tau),
        ("x_min".into(), report.x_min),
        ("x_max".into(), report.x_max),
        ("steps".into(), report.steps as f64),
        ("zero_count".into(), count as f64),
        ("certified_count".into(), certified as f64),
        ("tangent_count".into(), report.zeros.iter().filter(|z| z.tangent).count() as f64),
        ("oracle_zero_count".into(), report.oracle_zero_xs.len() as f64),
        ("oracle_zeros_matched".into(), matched as f64),
        ("gap_count".into(), report.gaps.len() as f64),
    ];
    for (i, z) in report.zeros.iter().enumerate() {
        params.push((format!("zero_{i}_x"), z.x));
    }
    AuditRecord::new(ClaimId::Prop1, params, count as f64, 1.0, residual, 0.5, err)
}

/// |ζ(x + iτ)| and |ζ(1 - x + iτ)| must fall on the same side of `tol`.
pub fn reflection_check(x: f64, tau: f64, tol: f64) -> Result<AuditRecord> {
    let p = StripPoint::new(x, tau)?;
    if tol.is_nan() || tol <= 0.0 {
        return domain("tol must be positive");
    }
    let a = zeta_ref(p.s(), ORACLE_EVAL_TOL)?;
    let b = zeta_ref(p.reflected().s(), ORACLE_EVAL_TOL)?;
    let (lhs, rhs) = (a.value.norm(), b.value.norm());
    let agree = (lhs < tol) == (rhs < tol);
    let residual = if agree { 0.0 } else { lhs.max(rhs) };
    Ok(AuditRecord::new(
        ClaimId::Reflection,
        [("x", x), ("tau", tau)],
        lhs,
        rhs,
        residual,
        tol,
        a.err_estimate + b.err_estimate,
    ))
}

/// φτ(x) through the Abel route against Im(ζ(s)/s) through the oracle.
pub fn identity_residual(p: StripPoint, spec: &QuadSpec) -> Result<AuditRecord> {
    let lhs = phi_infinity(p, spec)?;
    let z = zeta_ref(p.s(), ORACLE_EVAL_TOL)?;
    let rhs = (z.value / p.s()).im;
    Ok(AuditRecord::equality(
        ClaimId::Identity,
        [("x", p.x()), ("tau", p.tau())],
        lhs.value,
        rhs,
        IDENTITY_TOL,
        lhs.err_estimate + z.err_estimate / p.s().norm(),
    ))
}
