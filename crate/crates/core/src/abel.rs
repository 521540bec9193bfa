//! ζ(s) and the auxiliary functions ψτ, φτ, φ̃τ through the fractional-part
//! integral `∫₁^∞ {v} v^{-1-s} dv`.
//!
//! All integrals are taken in the `v = e^u` variable, where each integer
//! segment `[n, n+1]` has a closed form and the oscillation `sin(τu)` is
//! absorbed into `v^{-s}`. The tail beyond `n_segments` is an order-`M`
//! expansion in periodized Bernoulli polynomials. There is no numerical
//! quadrature in this module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bernoulli;
use crate::error::{convergence, domain, Result};
use crate::summation::CompensatedComplexSum;
use crate::types::{check_finite, check_finite_real, ComplexValue, Horizon, StripPoint, ValueWithError};

pub const MAX_EM_ORDER: usize = 6;
pub const MIN_SEGMENTS: usize = 16;

/// Segment and tail configuration, plus the refinement budget used by the
/// quadratures in [`crate::expansion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub n_segments: usize,
    pub em_order: usize,
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { n_segments: 100_000, em_order: 4, abs_tol: 1e-10, max_refinements: 12 }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_segments < MIN_SEGMENTS {
            return domain(format!("n_segments = {} is below {MIN_SEGMENTS}", self.n_segments));
        }
        if self.em_order > MAX_EM_ORDER {
            return domain(format!("em_order = {} exceeds {MAX_EM_ORDER}", self.em_order));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return domain(format!("abs_tol = {} must be positive", self.abs_tol));
        }
        Ok(())
    }
}

/// ψτ(x) = -τ / ((1-x)² + τ²).
pub fn psi(x: f64, tau: f64) -> Result<f64> {
    StripPoint::new(x, tau)?;
    Ok(psi_unchecked(x, tau))
}

#[inline]
pub(crate) fn psi_unchecked(x: f64, tau: f64) -> f64 {
    let d = 1.0 - x;
    -tau / (d * d + tau * tau)
}

/// Complex `e^w - 1` without cancellation for small `|w|`.
fn expm1_complex(w: Complex64) -> Complex64 {
    let em1 = w.re.exp_m1();
    let (sin, cos) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    Complex64::new(em1 * cos - 2.0 * half * half, (em1 + 1.0) * sin)
}

/// Number of binomial-series coefficients kept per `s`.
const SERIES_TERMS: usize = 64;

/// Evaluates segment moments for one fixed `s`.
///
/// With `v = n(1+w)` the segment integral is `n^{1-s} ∫₀^δ w (1+w)^{-1-s} dw`.
/// For small `δ (|s|+1)` the inner integral is summed as the binomial series
/// `Σ_j C(-1-s, j) δ^{j+2} / (j+2)`, whose coefficients are tabulated once; the
/// closed form loses about `log10(1/δ)` digits to cancellation there.
#[derive(Debug, Clone)]
struct SegmentKernel {
    s: Complex64,
    series_limit: f64,
    coeffs: Vec<Complex64>,
    mags: Vec<f64>,
}

impl SegmentKernel {
    fn new(s: Complex64) -> Self {
        let mut coeffs = Vec::with_capacity(SERIES_TERMS);
        let mut c = Complex64::new(1.0, 0.0);
        for j in 0..SERIES_TERMS {
            if j > 0 {
                c = c * (-s - j as f64) / j as f64;
            }
            coeffs.push(c / (j + 2) as f64);
        }
        let mags = coeffs.iter().map(|c| c.norm()).collect();
        Self { s, series_limit: 0.5 / (s.norm() + 1.0), coeffs, mags }
    }

    /// Series length needed at `delta`, never above `current`.
    fn terms_for(&self, delta: f64, mut current: usize) -> usize {
        let floor = 1e-18 * self.mags[0];
        while current > 1 && self.mags[current - 1] * delta.powi(current as i32 - 1) < floor {
            current -= 1;
        }
        current
    }

    fn unit_moment(&self, delta: f64, terms: usize) -> Complex64 {
        if delta <= self.series_limit {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in self.coeffs[..terms].iter().rev() {
                acc = acc * delta + c;
            }
            acc * (delta * delta)
        } else {
            let s = self.s;
            let l = delta.ln_1p();
            let a = Complex64::new(1.0, 0.0) - s;
            let first = if a == Complex64::new(0.0, 0.0) {
                Complex64::new(l, 0.0)
            } else {
                expm1_complex(a * l) / a
            };
            first + expm1_complex(-s * l) / s
        }
    }

    #[inline]
    fn segment(&self, n: u64, v_hi: f64, terms: usize) -> Complex64 {
        let nf = n as f64;
        let scale = ((Complex64::new(1.0, 0.0) - self.s) * nf.ln()).exp();
        scale * self.unit_moment((v_hi - nf) / nf, terms)
    }

    fn segment_auto(&self, n: u64, v_hi: f64) -> Complex64 {
        let delta = (v_hi - n as f64) / n as f64;
        self.segment(n, v_hi, self.terms_for(delta, SERIES_TERMS))
    }

    /// Whole segments `1..upto`, returning their compensated sum and `Σ |segment|`;
    /// `each` sees every running partial sum.
    fn sum_whole(&self, upto: u64, mut each: impl FnMut(Complex64)) -> (Complex64, f64) {
        let mut acc = CompensatedComplexSum::new();
        let mut abs_sum = 0.0;
        let mut terms = SERIES_TERMS;
        for n in 1..upto {
            let delta = 1.0 / n as f64;
            if delta <= self.series_limit {
                terms = self.terms_for(delta, terms);
            }
            let seg = self.segment(n, n as f64 + 1.0, terms);
            abs_sum += seg.re.abs() + seg.im.abs();
            acc.add(seg);
            each(acc.value());
        }
        (acc.value(), abs_sum)
    }
}

/// Exact `∫_n^{v_hi} (v - n) v^{-1-s} dv` for `n < v_hi <= n + 1` (default `v_hi = n + 1`).
///
/// `s = 1` is accepted through its limit form; `s = 0` is rejected.
pub fn segment_moment(n: u64, s: ComplexValue, v_hi: Option<f64>) -> Result<ComplexValue> {
    if n == 0 {
        return domain("segment index must be >= 1");
    }
    if s.re.is_nan() || s.re <= 0.0 {
        return domain(format!("Re(s) = {} must be positive", s.re));
    }
    let nf = n as f64;
    let v_hi = v_hi.unwrap_or(nf + 1.0);
    if !(v_hi > nf && v_hi <= nf + 1.0) {
        return domain(format!("v_hi = {v_hi} must lie in ({n}, {}]", n + 1));
    }
    Ok(segment_unchecked(n, s, v_hi))
}

fn segment_unchecked(n: u64, s: Complex64, v_hi: f64) -> Complex64 {
    SegmentKernel::new(s).segment_auto(n, v_hi)
}

/// `∫_{v0}^∞ {v} v^{-1-s} dv` by `order` integrations by parts against the
/// periodized Bernoulli polynomials. The error estimate bounds the dropped
/// remainder integral (one further integration by parts, then a sup bound).
pub fn frac_tail(v0: f64, s: ComplexValue, order: usize) -> Result<ValueWithError<ComplexValue>> {
    if !(v0 >= 2.0 && v0.is_finite()) {
        return domain(format!("tail start v0 = {v0} must be finite and >= 2"));
    }
    if s.re.is_nan() || s.re <= 0.0 {
        return domain(format!("Re(s) = {} must be positive", s.re));
    }
    if order > MAX_EM_ORDER {
        return domain(format!("tail order {order} exceeds {MAX_EM_ORDER}"));
    }
    let one = Complex64::new(1.0, 0.0);
    let v0_pow = (-s * v0.ln()).exp(); // v0^{-s}
    let mut value = v0_pow / (2.0 * s);

    // k-th term: -B̃_{k+1}(v0)/(k+1)! · (s+1)_{k-1} · v0^{-s-k}
    let mut rising = one; // (s+1)_{k-1}
    let mut factorial = 1.0; // (k+1)!
    let mut v_scale = v0_pow; // v0^{-s-k+1}
    for k in 1..=order {
        factorial *= (k + 1) as f64;
        v_scale /= v0;
        value -= rising * v_scale * (bernoulli::periodic(k + 1, v0) / factorial);
        rising *= s + k as f64;
    }
    // rising = (s+1)_order here
    let decay = v0.powf(-(s.re + order as f64 + 1.0));
    let next = bernoulli::periodic(order + 2, v0).abs() / (factorial * (order + 2) as f64);
    let err = next * rising.norm() * decay
        + bernoulli::sup_scaled(order + 2) * (rising * (s + (order + 1) as f64)).norm() * decay
            / (s.re + order as f64 + 1.0);
    let value = check_finite(value, "frac_tail")?;
    Ok(ValueWithError::new(value, check_finite_real(err, "frac_tail error bound")?))
}

/// Sum of the first `upto - 1` whole segments, i.e. `∫₁^{upto} {v} v^{-1-s} dv`,
/// along with `Σ |segment|` for the roundoff model.
fn whole_segments(s: Complex64, upto: u64) -> (Complex64, f64) {
    SegmentKernel::new(s).sum_whole(upto, |_| {})
}

/// Documented, non-rigorous roundoff model for a compensated sum of segment
/// moments: each term carries a relative error of a few ulps plus the error of
/// `exp((1-s) ln n)` for the largest `n`.
fn roundoff_model(s: Complex64, abs_sum: f64, n_max: f64) -> f64 {
    let rel = f64::EPSILON * (8.0 + (Complex64::new(1.0, 0.0) - s).norm() * n_max.ln().max(1.0));
    rel * abs_sum
}

fn certify_segments(s: Complex64, spec: &QuadSpec) -> Result<()> {
    spec.validate()?;
    if (spec.n_segments as f64) < 10.0 * s.norm() {
        return convergence(format!(
            "n_segments = {} cannot certify the tail at |s| = {:.3} (need >= 10|s|)",
            spec.n_segments,
            s.norm()
        ));
    }
    Ok(())
}

/// `∫₁^∞ {v} v^{-1-s} dv` split as whole segments up to `n_segments` plus the tail.
fn full_integral(s: Complex64, spec: &QuadSpec) -> Result<ValueWithError<Complex64>> {
    certify_segments(s, spec)?;
    let n = spec.n_segments as u64;
    let (body, abs_sum) = whole_segments(s, n);
    let tail = frac_tail(n as f64, s, spec.em_order)?;
    if tail.err_estimate > spec.abs_tol {
        return convergence(format!(
            "tail bound {:.3e} exceeds abs_tol {:.3e} at N = {n}",
            tail.err_estimate, spec.abs_tol
        ));
    }
    let value = check_finite(body + tail.value, "segment sum")?;
    Ok(ValueWithError::new(value, tail.err_estimate + roundoff_model(s, abs_sum, n as f64)))
}

/// ζ(s) = s/(s-1) - s ∫₁^∞ {v} v^{-1-s} dv on the open critical strip.
pub fn abel_zeta(p: StripPoint, spec: &QuadSpec) -> Result<ValueWithError<ComplexValue>> {
    let s = p.s();
    let integral = full_integral(s, spec)?;
    let lead = s / (s - 1.0);
    let value = check_finite(lead - s * integral.value, "abel_zeta")?;
    let err = s.norm() * integral.err_estimate + 4.0 * f64::EPSILON * (lead.norm() + value.norm());
    Ok(ValueWithError::new(value, err))
}

/// A sample of φτ(x, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub x: f64,
    pub tau: f64,
    pub t: Horizon,
    pub value: f64,
    pub err_estimate: f64,
}

/// φτ(x, t) = ψτ(x) + ∫₀^t {e^u} e^{-xu} sin(τu) du, with `t = ∞` giving φτ(x).
///
/// In the `v` variable the integral is `-Im ∫₁^{e^t} {v} v^{-1-s} dv`. For
/// `e^t` beyond `n_segments` the value is `φτ(x) + Im(tail(e^t))`, so the cost
/// never exceeds `O(n_segments)`.
pub fn phi(p: StripPoint, t: Horizon, spec: &QuadSpec) -> Result<PhiPoint> {
    let (value, err_estimate) = match t {
        Horizon::Finite(t) if !(t >= 0.0 && t.is_finite()) => {
            return domain(format!("t = {t} must be finite and >= 0"));
        }
        Horizon::Finite(0.0) => (psi_unchecked(p.x(), p.tau()), 0.0),
        Horizon::Finite(t) => {
            spec.validate()?;
            let v = t.exp();
            if v <= spec.n_segments as f64 {
                let (j, abs_sum) = partial_integral(p.s(), v);
                (psi_unchecked(p.x(), p.tau()) - j.im, roundoff_model(p.s(), abs_sum, v))
            } else {
                let inf = phi_infinity(p, spec)?;
                let tail = frac_tail(v, p.s(), spec.em_order)?;
                (inf.value + tail.value.im, inf.err_estimate + tail.err_estimate)
            }
        }
        Horizon::Infinite => {
            let inf = phi_infinity(p, spec)?;
            (inf.value, inf.err_estimate)
        }
    };
    Ok(PhiPoint {
        x: p.x(),
        tau: p.tau(),
        t,
        value: check_finite_real(value, "phi")?,
        err_estimate,
    })
}

/// φτ(x) = lim_{t→∞} φτ(x, t).
pub fn phi_infinity(p: StripPoint, spec: &QuadSpec) -> Result<ValueWithError<f64>> {
    let integral = full_integral(p.s(), spec)?;
    let value = psi_unchecked(p.x(), p.tau()) - integral.value.im;
    Ok(ValueWithError::new(value, integral.err_estimate + f64::EPSILON * value.abs()))
}

/// `∫₁^v {w} w^{-1-s} dw` for `1 <= v`, by whole segments plus one partial one.
fn partial_integral(s: Complex64, v: f64) -> (Complex64, f64) {
    let floor = v.floor() as u64;
    let kernel = SegmentKernel::new(s);
    let (mut j, mut abs_sum) = kernel.sum_whole(floor.max(1), |_| {});
    if v > floor as f64 {
        let seg = kernel.segment_auto(floor, v);
        abs_sum += seg.re.abs() + seg.im.abs();
        j += seg;
    }
    (j, abs_sum)
}

/// φ̃τ(x, t) = ψτ(γ) - ψτ(x) + φτ(x, t).
pub fn phi_tilde(x: f64, gamma: f64, tau: f64, t: f64, spec: &QuadSpec) -> Result<f64> {
    if !(0.0 < x && x < gamma && gamma < 1.0) {
        return domain(format!("need 0 < x < gamma < 1, got x = {x}, gamma = {gamma}"));
    }
    let p = StripPoint::new(x, tau)?;
    let phi = phi(p, Horizon::finite(t)?, spec)?;
    Ok(psi_unchecked(gamma, tau) - psi_unchecked(x, tau) + phi.value)
}

/// φτ(x, ·) for one strip point, with prefix sums over the segments so that
/// every finite-`t` evaluation costs `O(1)`.
#[derive(Debug, Clone)]
pub struct PhiCurve {
    point: StripPoint,
    kernel: SegmentKernel,
    psi: f64,
    /// `prefix[k] = ∫₁^{k+1} {v} v^{-1-s} dv`.
    prefix: Vec<Complex64>,
    at_infinity: ValueWithError<f64>,
    em_order: usize,
}

impl PhiCurve {
    pub fn new(p: StripPoint, spec: &QuadSpec) -> Result<Self> {
        certify_segments(p.s(), spec)?;
        let s = p.s();
        let n = spec.n_segments;
        let kernel = SegmentKernel::new(s);
        let mut prefix = Vec::with_capacity(n);
        prefix.push(Complex64::new(0.0, 0.0));
        let (total, abs_sum) = kernel.sum_whole(n as u64, |partial| prefix.push(partial));
        let tail = frac_tail(n as f64, s, spec.em_order)?;
        if tail.err_estimate > spec.abs_tol {
            return convergence(format!("tail bound {:.3e} exceeds abs_tol", tail.err_estimate));
        }
        let psi = psi_unchecked(p.x(), p.tau());
        let value = check_finite_real(psi - (total + tail.value).im, "phi curve")?;
        let err = tail.err_estimate + roundoff_model(s, abs_sum, n as f64);
        Ok(Self {
            point: p,
            kernel,
            psi,
            prefix,
            at_infinity: ValueWithError::new(value, err),
            em_order: spec.em_order,
        })
    }

    pub fn point(&self) -> StripPoint {
        self.point
    }

    pub fn at_infinity(&self) -> ValueWithError<f64> {
        self.at_infinity
    }

    /// φτ(x, t) for finite `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.psi;
        }
        let v = t.exp();
        let n = self.prefix.len() as f64;
        if v <= n {
            let floor = v.floor() as u64;
            let mut j = self.prefix[floor as usize - 1];
            if v > floor as f64 {
                j += self.kernel.segment_auto(floor, v);
            }
            self.psi - j.im
        } else {
            self.at_infinity.value + self.tail(v).im
        }
    }

    /// The leading, non-periodic part of φτ(x, t) - φτ(x): `Im(e^{-st} / (2s))`
    /// added to φτ(x). Differs from [`Self::eval`] by a mean-zero ripple of size
    /// `O(|s| e^{-(1+x)t})`.
    pub fn eval_cell_mean(&self, t: f64) -> f64 {
        let s = self.point.s();
        self.at_infinity.value + ((-s * t).exp() / (2.0 * s)).im
    }

    fn tail(&self, v: f64) -> Complex64 {
        // v > n_segments >= 16 and em_order <= 6 were validated at construction.
        frac_tail(v, self.point.s(), self.em_order).map(|t| t.value).unwrap_or_default()
    }
}
