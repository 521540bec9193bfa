//! The expansion of hτ(z, x, t) in iterated integrals of φ̃τ(x, ·), its
//! remainders R and R̃, and the quantitative bounds they are estimated with.
//!
//! Iterated integrals use the Cauchy form
//! `∫_{t,k} g = ∫₀^t g(u) (t-u)^{k-1} / (k-1)! du`, so every `k` costs one
//! weighted integral over the same samples of φ̃.

use serde::{Deserialize, Serialize};

use crate::abel::{psi_unchecked, PhiCurve, QuadSpec};
use crate::audit::{AuditRecord, ClaimId};
use crate::error::{domain, AuditError, Result};
use crate::quadrature::{self, cauchy_kernel, integrate_kernels, knot_cap_u, knots, ln_factorial};
use crate::summation::CompensatedSum;
use crate::types::{StripPoint, ValueWithError};

/// Largest `n` accepted by [`r_tilde`].
pub const R_TILDE_CAP: usize = 40;
/// Largest `n` accepted by [`audit_bound_iterated`].
pub const BOUND_AUDIT_CAP: usize = 12;
/// Extent and spacing of the grid on which sup |φ̃| is sampled.
pub const SUP_SAMPLE_END: f64 = 50.0;
pub const SUP_SAMPLE_STEP: f64 = 0.01;

/// The tuple `(x, γ, y, z = y - x, τ, β)` with `0 < x < γ < y < 1`, `τ > 0`, `β > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    x: f64,
    gamma: f64,
    y: f64,
    z: f64,
    tau: f64,
    beta: f64,
}

impl ExpansionParams {
    /// `gamma` defaults to the midpoint of `(x, y)` and `beta` to 2.
    pub fn new(x: f64, gamma: Option<f64>, y: f64, tau: f64, beta: Option<f64>) -> Result<Self> {
        let gamma = gamma.unwrap_or(0.5 * (x + y));
        let beta = beta.unwrap_or(2.0);
        if !(0.0 < x && x < gamma && gamma < y && y < 1.0) {
            return domain(format!("need 0 < x < gamma < y < 1, got ({x}, {gamma}, {y})"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("tau = {tau} must be positive"));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return domain(format!("beta = {beta} must exceed 1"));
        }
        Ok(Self { x, gamma, y, z: y - x, tau, beta })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn as_params(&self) -> [(&'static str, f64); 5] {
        [("x", self.x), ("gamma", self.gamma), ("y", self.y), ("tau", self.tau), ("beta", self.beta)]
    }
}

/// One summand `z^k e^{-zt} ∫_{t,k} φ̃` in sign/log-magnitude form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceTerm {
    pub k: usize,
    pub log_magnitude: f64,
    pub sign: i8,
}

impl TraceTerm {
    fn new(k: usize, log_prefactor: f64, integral: f64) -> Self {
        let sign = if integral < 0.0 { -1 } else { 1 };
        Self { k, log_magnitude: log_prefactor + integral.abs().ln(), sign }
    }

    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log_magnitude.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTrace {
    pub n: usize,
    pub t: f64,
    /// Exactly `n + 1` entries, `k = 0..=n`.
    pub terms: Vec<TraceTerm>,
    pub partial_sum: f64,
    pub remainder: f64,
    pub err_estimate: f64,
}

/// φ̃τ(x, ·) = ψτ(γ) - ψτ(x) + φτ(x, ·) for one `(x, γ, τ)`.
#[derive(Debug, Clone)]
pub struct PhiTilde {
    curve: PhiCurve,
    offset: f64,
    gamma: f64,
}

impl PhiTilde {
    pub fn new(x: f64, gamma: f64, tau: f64, spec: &QuadSpec) -> Result<Self> {
        if !(0.0 < x && x < gamma && gamma < 1.0) {
            return domain(format!("need 0 < x < gamma < 1, got x = {x}, gamma = {gamma}"));
        }
        let p = StripPoint::new(x, tau)?;
        let curve = PhiCurve::new(p, spec)?;
        Ok(Self { offset: psi_unchecked(gamma, tau) - psi_unchecked(x, tau), curve, gamma })
    }

    pub fn x(&self) -> f64 {
        self.curve.point().x()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.curve.point().tau()
    }

    /// φ̃τ(x, u).
    pub fn eval(&self, u: f64) -> f64 {
        self.offset + self.curve.eval(u)
    }

    /// φ̃τ(x, ∞) = ψτ(γ) - ψτ(x) + φτ(x).
    pub fn at_infinity(&self) -> ValueWithError<f64> {
        let inf = self.curve.at_infinity();
        ValueWithError::new(self.offset + inf.value, inf.err_estimate)
    }

    pub fn phi_at_infinity(&self) -> ValueWithError<f64> {
        self.curve.at_infinity()
    }

    /// The integrand handed to the quadratures: exact up to the last knot
    /// `ln KNOT_CAP`, the cell mean beyond it. The ripple dropped there has
    /// zero mean over each cell and amplitude below `|s| e^{-(1+x)u} / 12`.
    fn quadrature_sample(&self, u: f64) -> f64 {
        if u < knot_cap_u() {
            self.eval(u)
        } else {
            self.offset + self.curve.eval_cell_mean(u)
        }
    }

    fn base_error(&self) -> f64 {
        self.curve.at_infinity().err_estimate
    }

    /// `∫_{t,k} φ̃` for every `k = 0..=k_max`, sharing one set of samples.
    pub fn iterated(&self, k_max: usize, t: f64, spec: &QuadSpec) -> Result<Vec<ValueWithError<f64>>> {
        if !(t >= 0.0 && t.is_finite()) {
            return domain(format!("t = {t} must be finite and >= 0"));
        }
        let mut out = vec![ValueWithError::new(self.eval(t), self.base_error())];
        if k_max == 0 {
            return Ok(out);
        }
        let ints = integrate_kernels(
            |u| Ok(self.quadrature_sample(u)),
            |u, buf| {
                for (j, slot) in buf.iter_mut().enumerate() {
                    *slot = cauchy_kernel(j + 1, t - u);
                }
            },
            k_max,
            &knots(t),
            spec.abs_tol,
            spec,
        )?;
        for (j, v) in ints.into_iter().enumerate() {
            let k = j + 1;
            // The samples' own error integrates against a kernel of mass t^k / k!.
            let carried = self.base_error() * (k as f64 * t.max(1e-300).ln() - ln_factorial(k as u64)).exp();
            out.push(ValueWithError::new(v.value, v.err_estimate + carried));
        }
        Ok(out)
    }
}

/// `∫_{t,k} f` through the Cauchy single-integral form, with knots at `ln m`.
///
/// `k = 0` returns `f(t)`.
pub fn iterated_integral<F>(k: usize, t: f64, f: F, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(iterated_integral_with_error(k, t, f, spec)?.value)
}

pub fn iterated_integral_with_error<F>(k: usize, t: f64, f: F, spec: &QuadSpec) -> Result<ValueWithError<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be finite and >= 0"));
    }
    if k == 0 {
        return Ok(ValueWithError::new(f(t), 0.0));
    }
    let r = integrate_kernels(
        |u| Ok(f(u)),
        |u, buf| buf[0] = cauchy_kernel(k, t - u),
        1,
        &knots(t),
        spec.abs_tol,
        spec,
    )?;
    Ok(r[0])
}

/// Evaluation engine for one [`ExpansionParams`]; builds φ̃ once.
#[derive(Debug, Clone)]
pub struct Expansion {
    params: ExpansionParams,
    field: PhiTilde,
    spec: QuadSpec,
}

impl Expansion {
    pub fn new(params: ExpansionParams, spec: &QuadSpec) -> Result<Self> {
        let field = PhiTilde::new(params.x, params.gamma, params.tau, spec)?;
        Ok(Self { params, field, spec: *spec })
    }

    pub fn params(&self) -> &ExpansionParams {
        &self.params
    }

    pub fn phi_tilde(&self) -> &PhiTilde {
        &self.field
    }

    /// hτ(z, x, t) = e^{-zt} φ̃(t) + z ∫₀^t e^{-zμ} φ̃(μ) dμ.
    pub fn h_direct(&self, t: f64) -> Result<ValueWithError<f64>> {
        h_direct_with_z(&self.field, self.params.z, t, &self.spec)
    }

    /// Partial sum of the iterated-integral series and the remainder R(t, n)
    /// evaluated from its own definition.
    pub fn h_series(&self, t: f64, n: usize) -> Result<ExpansionTrace> {
        if n < 1 {
            return domain("series order n must be >= 1");
        }
        let z = self.params.z;
        let ints = self.field.iterated(n, t, &self.spec)?;
        let mut terms = Vec::with_capacity(n + 1);
        let mut sum = CompensatedSum::new();
        let mut err = 0.0;
        for (k, v) in ints.iter().enumerate() {
            let log_pre = k as f64 * z.ln() - z * t;
            let term = TraceTerm::new(k, log_pre, v.value);
            sum.add(term.value());
            err += log_pre.exp() * v.err_estimate;
            terms.push(term);
        }
        let remainder = self.remainder(t, n)?;
        Ok(ExpansionTrace {
            n,
            t,
            terms,
            partial_sum: sum.value(),
            remainder: remainder.value,
            err_estimate: err + remainder.err_estimate,
        })
    }

    /// R(t, n) = z^{n+1} ∫₀^t e^{-zμ} ∫_{μ,n} φ̃ dμ by nested quadrature.
    pub fn remainder(&self, t: f64, n: usize) -> Result<ValueWithError<f64>> {
        if !(t >= 0.0 && t.is_finite()) {
            return domain(format!("t = {t} must be finite and >= 0"));
        }
        let z = self.params.z;
        let mut inner_err: f64 = 0.0;
        let outer = integrate_kernels(
            |mu| {
                let v = self.field.iterated(n, mu, &self.spec)?[n];
                inner_err = inner_err.max(v.err_estimate);
                Ok(v.value)
            },
            |mu, buf| buf[0] = (-z * mu).exp(),
            1,
            &knots(t),
            // The inner values are only good to their own tolerance.
            100.0 * self.spec.abs_tol,
            &self.spec,
        )?;
        let scale = z.powi(n as i32 + 1);
        Ok(ValueWithError::new(scale * outer[0].value, scale * (outer[0].err_estimate + t * inner_err)))
    }

    /// R̃(n) = h(z, x, n/(βz)) - e^{-n/β} Σ_{k=0}^n z^k ∫_{n/(βz),k} φ̃.
    pub fn r_tilde(&self, n: usize) -> Result<ValueWithError<f64>> {
        Ok(self.r_tilde_trace(n)?.1)
    }

    /// R̃(n) together with the log-domain trace of the finite sum.
    pub fn r_tilde_trace(&self, n: usize) -> Result<(ExpansionTrace, ValueWithError<f64>)> {
        if n < 1 {
            return domain("n must be >= 1");
        }
        if n > R_TILDE_CAP {
            return Err(AuditError::CapExceeded(format!("n = {n} exceeds {R_TILDE_CAP}")));
        }
        let z = self.params.z;
        let t = n as f64 / (self.params.beta * z);
        let h = self.h_direct(t)?;
        let ints = self.field.iterated(n, t, &self.spec)?;
        let mut terms = Vec::with_capacity(n + 1);
        let mut sum = CompensatedSum::new();
        let mut err = h.err_estimate;
        let log_decay = -(n as f64) / self.params.beta;
        for (k, v) in ints.iter().enumerate() {
            let log_pre = k as f64 * z.ln() + log_decay;
            let term = TraceTerm::new(k, log_pre, v.value);
            sum.add(term.value());
            err += log_pre.exp() * v.err_estimate;
            terms.push(term);
        }
        let value = h.value - sum.value();
        let trace = ExpansionTrace { n, t, terms, partial_sum: sum.value(), remainder: value, err_estimate: err };
        Ok((trace, ValueWithError::new(value, err)))
    }

    /// ω = (x² / z) [ψτ(x) - ψτ(γ)].
    pub fn omega(&self) -> f64 {
        omega(&self.params)
    }
}

pub(crate) fn h_direct_with_z(field: &PhiTilde, z: f64, t: f64, spec: &QuadSpec) -> Result<ValueWithError<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be finite and >= 0"));
    }
    let boundary = (-z * t).exp() * field.eval(t);
    if z == 0.0 {
        return Ok(ValueWithError::new(boundary, field.base_error()));
    }
    let int = integrate_kernels(
        |u| Ok(field.quadrature_sample(u)),
        |u, buf| buf[0] = (-z * u).exp(),
        1,
        &knots(t),
        spec.abs_tol,
        spec,
    )?;
    Ok(ValueWithError::new(
        boundary + z * int[0].value,
        field.base_error() * 2.0 + z * int[0].err_estimate,
    ))
}

pub fn h_direct(p: &ExpansionParams, t: f64, spec: &QuadSpec) -> Result<ValueWithError<f64>> {
    Expansion::new(*p, spec)?.h_direct(t)
}

pub fn h_series(p: &ExpansionParams, t: f64, n: usize, spec: &QuadSpec) -> Result<ExpansionTrace> {
    Expansion::new(*p, spec)?.h_series(t, n)
}

pub fn r_tilde(p: &ExpansionParams, n: usize, spec: &QuadSpec) -> Result<f64> {
    Ok(Expansion::new(*p, spec)?.r_tilde(n)?.value)
}

pub fn omega(p: &ExpansionParams) -> f64 {
    p.x * p.x / p.z * (psi_unchecked(p.x, p.tau) - psi_unchecked(p.gamma, p.tau))
}

/// `[n^n e^{-n} / n!] / [1 / √(2πn)]`, computed in the log domain.
pub fn stirling_ratio(n: u64) -> Result<f64> {
    if n == 0 {
        return domain("stirling_ratio needs n >= 1");
    }
    let nf = n as f64;
    let log = nf * nf.ln() - nf - ln_factorial(n) + 0.5 * (2.0 * std::f64::consts::PI * nf).ln();
    Ok(log.exp())
}

/// One `(μ, n)` sample of the iterated-integral bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub mu: f64,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedBoundAudit {
    /// Worst `(μ, n)` pair of `|∫_{μ,n+1} φ̃| <= μ^{n+1} / (x (n+1)!)`.
    pub bound: AuditRecord,
    /// Sampled sup |φ̃| against `1/x`.
    pub premise: AuditRecord,
    pub samples: Vec<BoundSample>,
}

/// Checks `|∫_{μ,n+1} φ̃| <= (1/x) μ^{n+1}/(n+1)!` over `mu_list × 0..=n_max`,
/// and samples the premise sup |φ̃| < 1/x on `[0, 50]`.
pub fn audit_bound_iterated(
    x: f64,
    gamma: f64,
    tau: f64,
    mu_list: &[f64],
    n_max: usize,
    spec: &QuadSpec,
) -> Result<IteratedBoundAudit> {
    if n_max > BOUND_AUDIT_CAP {
        return domain(format!("n_max = {n_max} exceeds {BOUND_AUDIT_CAP}"));
    }
    if mu_list.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return domain("every mu must be finite and >= 0");
    }
    let field = PhiTilde::new(x, gamma, tau, spec)?;

    let mut samples = Vec::new();
    for &mu in mu_list {
        let ints = field.iterated(n_max + 1, mu, spec)?;
        for n in 0..=n_max {
            let k = n + 1;
            let rhs = if mu == 0.0 { 0.0 } else { ((k as f64) * mu.ln() - ln_factorial(k as u64)).exp() / x };
            samples.push(BoundSample { mu, n, lhs: ints[k].value.abs(), rhs, err_estimate: ints[k].err_estimate });
        }
    }
    let worst = samples
        .iter()
        .copied()
        .max_by(|a, b| (a.lhs - a.rhs).total_cmp(&(b.lhs - b.rhs)))
        .unwrap_or(BoundSample { mu: 0.0, n: 0, lhs: 0.0, rhs: 0.0, err_estimate: 0.0 });

    let premise = sup_premise(&field, spec.abs_tol);
    let mut bound = AuditRecord::upper_bound(
        ClaimId::Eq6,
        [("x", x), ("gamma", gamma), ("tau", tau), ("worst_mu", worst.mu), ("worst_n", worst.n as f64)],
        worst.lhs,
        worst.rhs,
        spec.abs_tol,
        worst.err_estimate,
    );
    bound = bound
        .with_param("pairs", samples.len() as f64)
        .with_param("sup_phi_tilde", premise.lhs)
        .with_param("inv_x", 1.0 / x);
    Ok(IteratedBoundAudit { bound, premise, samples })
}

fn sup_premise(field: &PhiTilde, tol: f64) -> AuditRecord {
    let steps = (SUP_SAMPLE_END / SUP_SAMPLE_STEP).round() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let u = i as f64 * SUP_SAMPLE_STEP;
        let v = field.eval(u).abs();
        if v > best.1 {
            best = (u, v);
        }
    }
    let x = field.x();
    AuditRecord::upper_bound(
        ClaimId::SupBound,
        [("x", x), ("gamma", field.gamma()), ("tau", field.tau()), ("argmax_u", best.0), ("u_max", SUP_SAMPLE_END)],
        best.1,
        1.0 / x,
        tol,
        field.base_error(),
    )
}

/// Whether [`audit_tail_under_zero_hypothesis`] assumes φτ(x) = 0 or subtracts the actual value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    Hypothesis,
    Shifted,
}

/// Checks `φ̃τ(x, t) - shift <= ψτ(γ) - ψτ(x) + e^{-xt}/x` for each `t`, where
/// `shift` is φτ(x) in [`TailMode::Shifted`] and 0 otherwise. The record
/// carries the worst `t`.
pub fn audit_tail_under_zero_hypothesis(
    x: f64,
    gamma: f64,
    tau: f64,
    t_list: &[f64],
    mode: TailMode,
    spec: &QuadSpec,
) -> Result<AuditRecord> {
    if t_list.is_empty() {
        return domain("t_list is empty");
    }
    if t_list.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return domain("every t must be finite and >= 0");
    }
    let field = PhiTilde::new(x, gamma, tau, spec)?;
    let phi_inf = field.phi_at_infinity();
    let shift = match mode {
        TailMode::Hypothesis => 0.0,
        TailMode::Shifted => phi_inf.value,
    };
    let base = psi_unchecked(gamma, tau) - psi_unchecked(x, tau);
    let (mut worst_t, mut worst_lhs, mut worst_rhs) = (t_list[0], f64::NEG_INFINITY, 0.0);
    for &t in t_list {
        let lhs = field.eval(t) - shift;
        let rhs = base + (-x * t).exp() / x;
        if lhs - rhs > worst_lhs - worst_rhs {
            (worst_t, worst_lhs, worst_rhs) = (t, lhs, rhs);
        }
    }
    let mode_flag = if mode == TailMode::Shifted { 1.0 } else { 0.0 };
    Ok(AuditRecord::upper_bound(
        ClaimId::TailBound,
        [
            ("x", x),
            ("gamma", gamma),
            ("tau", tau),
            ("worst_t", worst_t),
            ("shifted", mode_flag),
            ("phi_inf_abs", phi_inf.value.abs()),
        ],
        worst_lhs,
        worst_rhs,
        spec.abs_tol,
        phi_inf.err_estimate * 2.0,
    ))
}

/// φτ(y, t) against ψτ(y) - ψτ(γ) + hτ(z, x, t), one record per `t`.
pub fn audit_eq3(p: &ExpansionParams, t_list: &[f64], tolerance: f64, spec: &QuadSpec) -> Result<Vec<AuditRecord>> {
    let engine = Expansion::new(*p, spec)?;
    let y_curve = PhiCurve::new(StripPoint::new(p.y, p.tau)?, spec)?;
    t_list
        .iter()
        .map(|&t| {
            let h = engine.h_direct(t)?;
            let lhs = y_curve.eval(t);
            let rhs = psi_unchecked(p.y, p.tau) - psi_unchecked(p.gamma, p.tau) + h.value;
            let err = h.err_estimate + y_curve.at_infinity().err_estimate;
            Ok(AuditRecord::equality(ClaimId::Eq3, with_t(p, t), lhs, rhs, tolerance, err))
        })
        .collect()
}

/// hτ against the order-`n` partial sum plus R(t, n) for each `n`, followed by
/// one record for the induction step `R(t, n-1) - R(t, n) = e^{-zt} zⁿ ∫_{t,n} φ̃`
/// at the largest `n`.
pub fn audit_eq4(
    p: &ExpansionParams,
    t: f64,
    n_list: &[usize],
    tolerance: f64,
    spec: &QuadSpec,
) -> Result<Vec<AuditRecord>> {
    let engine = Expansion::new(*p, spec)?;
    let h = engine.h_direct(t)?;
    let mut out = Vec::new();
    for &n in n_list {
        let trace = engine.h_series(t, n)?;
        let rhs = trace.partial_sum + trace.remainder;
        out.push(
            AuditRecord::equality(ClaimId::Eq4, with_t(p, t), h.value, rhs, tolerance, h.err_estimate + trace.err_estimate)
                .with_param("n", n as f64),
        );
    }
    if let Some(&n) = n_list.iter().max() {
        let n = n.max(1);
        let prev = engine.remainder(t, n - 1)?;
        let next = engine.remainder(t, n)?;
        let i_n = engine.field.iterated(n, t, spec)?[n];
        let z = p.z;
        let rhs = (-z * t).exp() * z.powi(n as i32) * i_n.value;
        out.push(
            AuditRecord::equality(
                ClaimId::Eq4,
                with_t(p, t),
                prev.value - next.value,
                rhs,
                tolerance,
                prev.err_estimate + next.err_estimate + i_n.err_estimate,
            )
            .with_param("n", n as f64)
            .with_param("induction_step", 1.0),
        );
    }
    Ok(out)
}

/// |R̃(n)| must shrink along `n_list`. The residual is the largest increase
/// between consecutive entries.
pub fn audit_eq7_trend(p: &ExpansionParams, n_list: &[usize], spec: &QuadSpec) -> Result<AuditRecord> {
    if n_list.len() < 2 {
        return domain("the trend audit needs at least two values of n");
    }
    let engine = Expansion::new(*p, spec)?;
    let values = n_list.iter().map(|&n| engine.r_tilde(n)).collect::<Result<Vec<_>>>()?;
    let mut params: Vec<(String, f64)> = p.as_params().iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for (n, v) in n_list.iter().zip(&values) {
        params.push((format!("r_tilde_{n}"), v.value));
    }
    let (mut worst, mut worst_pair, mut err) = (f64::NEG_INFINITY, (0.0, 0.0), 0.0);
    for w in values.windows(2) {
        let increase = w[1].value.abs() - w[0].value.abs();
        if increase > worst {
            worst = increase;
            worst_pair = (w[1].value.abs(), w[0].value.abs());
            err = w[0].err_estimate + w[1].err_estimate;
        }
    }
    Ok(AuditRecord::upper_bound(ClaimId::Eq7Trend, params, worst_pair.0, worst_pair.1, spec.abs_tol, err))
}

fn with_t(p: &ExpansionParams, t: f64) -> Vec<(&'static str, f64)> {
    let mut v = p.as_params().to_vec();
    v.push(("t", t));
    v
}

pub use quadrature::KNOT_CAP;

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec { n_segments: 20_000, ..QuadSpec::default() }
    }

    fn params() -> ExpansionParams {
        ExpansionParams::new(0.4, Some(0.5), 0.6, 2.0, None).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ExpansionParams::new(0.4, Some(0.3), 0.6, 2.0, None).is_err());
        assert!(ExpansionParams::new(0.4, None, 1.2, 2.0, None).is_err());
        assert!(ExpansionParams::new(0.4, None, 0.6, -2.0, None).is_err());
        assert!(matches!(ExpansionParams::new(0.4, None, 0.6, 2.0, Some(1.0)), Err(AuditError::Domain(_))));
        let p = ExpansionParams::new(0.4, None, 0.6, 2.0, None).unwrap();
        assert!((p.gamma() - 0.5).abs() < 1e-15);
        assert_eq!(p.beta(), 2.0);
        assert!((p.z() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn iterated_integral_pins() {
        let s = QuadSpec::default();
        assert!((iterated_integral(3, 2.0, |_| 1.0, &s).unwrap() - 8.0 / 6.0).abs() < 1e-12);
        assert!((iterated_integral(2, 1.0, |u| u, &s).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(iterated_integral(0, 1.7, |u| u * u, &s).unwrap(), 1.7 * 1.7);
    }

    #[test]
    fn constant_kernel_pins() {
        let s = QuadSpec::default();
        for k in 0..=10usize {
            for &t in &[0.5f64, 1.0, 3.0, 5.0] {
                let exact = t.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
                let got = iterated_integral(k, t, |_| 1.0, &s).unwrap();
                assert!((got - exact).abs() < 1e-10 * exact.max(1.0), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn h_direct_edge_cases() {
        let s = spec();
        let e = Expansion::new(params(), &s).unwrap();
        let h0 = e.h_direct(0.0).unwrap().value;
        assert!((h0 - psi_unchecked(0.5, 2.0)).abs() < 1e-15);
        let z0 = h_direct_with_z(e.phi_tilde(), 0.0, 1.5, &s).unwrap().value;
        assert!((z0 - e.phi_tilde().eval(1.5)).abs() < 1e-15);
    }

    #[test]
    fn omega_values() {
        let p = ExpansionParams::new(0.5, Some(0.6), 0.7, 1.0, None).unwrap();
        assert!((omega(&p) - 0.077_586_206_9).abs() < 1e-10);
        assert!(omega(&params()) > 0.0);
    }

    #[test]
    fn omega_second_pin() {
        // x = 0.3, γ = 0.5, z = 0.2 (y = 0.5 is excluded by γ < y, so pin the formula).
        let value = 0.09 / 0.2 * (psi_unchecked(0.3, 1.0) - psi_unchecked(0.5, 1.0));
        assert!((value - 0.057_986_577_2).abs() < 1e-10);
    }

    #[test]
    fn omega_vanishes_as_gamma_approaches_x() {
        let p = ExpansionParams::new(0.2, Some(0.2 + 1e-9), 0.4, 1.0, None).unwrap();
        assert!(omega(&p).abs() < 1e-9);
    }

    #[test]
    fn stirling() {
        assert!((stirling_ratio(1).unwrap() - 0.922_137).abs() < 1e-6);
        assert!((stirling_ratio(10).unwrap() - 0.991_704).abs() < 1e-6);
        let mut prev = 0.0;
        for n in 1..=50 {
            let r = stirling_ratio(n).unwrap();
            assert!(r > prev && r < 1.0, "n={n}");
            prev = r;
        }
        assert!(stirling_ratio(0).is_err());
        assert!(stirling_ratio(1000).unwrap() < 1.0);
    }

    #[test]
    fn r_tilde_caps() {
        let e = Expansion::new(params(), &spec()).unwrap();
        assert!(matches!(e.r_tilde(41), Err(AuditError::CapExceeded(_))));
        assert!(e.r_tilde(0).is_err());
    }

    #[test]
    fn bound_audit_rejects_large_order() {
        assert!(audit_bound_iterated(0.4, 0.5, 2.0, &[1.0], 13, &spec()).is_err());
    }

    #[test]
    fn tail_bound_at_zero() {
        let rec = audit_tail_under_zero_hypothesis(0.4, 0.5, 2.0, &[0.0], TailMode::Hypothesis, &spec()).unwrap();
        assert!(rec.passed());
        assert!((rec.lhs - psi_unchecked(0.5, 2.0)).abs() < 1e-15);
    }
}
