//! Bernoulli numbers, Bernoulli polynomials and their periodized versions.

use std::f64::consts::PI;

/// Largest polynomial order supported by [`polynomial`].
pub const MAX_ORDER: usize = 18;

/// B_0 ..= B_18 with the convention B_1 = -1/2.
const NUMBERS: [f64; MAX_ORDER + 1] = [
    1.0,
    -1.0 / 2.0,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
];

pub fn number(k: usize) -> f64 {
    NUMBERS[k]
}

/// Bernoulli polynomial B_k(x), evaluated by Horner's rule on the binomial expansion.
pub fn polynomial(k: usize, x: f64) -> f64 {
    assert!(k <= MAX_ORDER, "Bernoulli order {k} exceeds {MAX_ORDER}");
    // B_k(x) = sum_j C(k, j) B_j x^(k-j); iterate from the x^k coefficient down.
    let mut acc = 0.0;
    let mut binom = 1.0;
    for (j, b) in NUMBERS.iter().enumerate().take(k + 1) {
        acc = acc * x + binom * b;
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Fractional part `v - floor(v)`.
#[inline]
pub fn frac(v: f64) -> f64 {
    v - v.floor()
}

/// Periodized polynomial B̃_k(v) = B_k({v}).
pub fn periodic(k: usize, v: f64) -> f64 {
    polynomial(k, frac(v))
}

/// Upper bound on sup |B̃_k| / k! over the real line.
///
/// For k >= 2 this is 2 ζ(k) / (2π)^k, with ζ(k) bounded by ζ(2).
pub fn sup_scaled(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 0.5,
        _ => 2.0 * (PI * PI / 6.0) / (2.0 * PI).powi(k as i32),
    }
}
