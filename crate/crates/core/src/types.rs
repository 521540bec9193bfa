//! Value types shared across the evaluation modules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, AuditError, Result};

/// Complex number carrying `s` points and zeta values.
pub type ComplexValue = Complex64;

/// A point `s = x + iτ` of the open critical strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    x: f64,
    tau: f64,
}

impl StripPoint {
    pub fn new(x: f64, tau: f64) -> Result<Self> {
        if !(x.is_finite() && tau.is_finite()) {
            return domain(format!("non-finite strip point ({x}, {tau})"));
        }
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("x = {x} is outside the open interval (0, 1)"));
        }
        if tau == 0.0 {
            return domain("tau must be nonzero");
        }
        Ok(Self { x, tau })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn s(&self) -> ComplexValue {
        Complex64::new(self.x, self.tau)
    }

    /// Mirror image `1 - x + iτ` across the critical line.
    pub fn reflected(&self) -> Self {
        Self { x: 1.0 - self.x, tau: self.tau }
    }
}

/// A computed quantity together with a non-negative error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueWithError<T> {
    pub value: T,
    pub err_estimate: f64,
}

impl<T> ValueWithError<T> {
    pub fn new(value: T, err_estimate: f64) -> Self {
        debug_assert!(err_estimate >= 0.0);
        Self { value, err_estimate }
    }
}

/// Upper limit of the `u`-integral defining φτ(x, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn finite(t: f64) -> Result<Self> {
        if t.is_finite() && t >= 0.0 {
            Ok(Horizon::Finite(t))
        } else {
            domain(format!("t = {t} must be finite and >= 0"))
        }
    }
}

impl From<f64> for Horizon {
    /// `f64::INFINITY` maps to [`Horizon::Infinite`].
    fn from(t: f64) -> Self {
        if t == f64::INFINITY {
            Horizon::Infinite
        } else {
            Horizon::Finite(t)
        }
    }
}

pub(crate) fn check_finite(z: ComplexValue, what: &str) -> Result<ComplexValue> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(AuditError::Convergence(format!("non-finite intermediate in {what}")))
    }
}

pub(crate) fn check_finite_real(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(AuditError::Convergence(format!("non-finite intermediate in {what}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_guard() {
        assert!(StripPoint::new(0.5, 1.0).is_ok());
        assert!(matches!(StripPoint::new(1.5, 1.0), Err(AuditError::Domain(_))));
        assert!(matches!(StripPoint::new(0.0, 1.0), Err(AuditError::Domain(_))));
        assert!(matches!(StripPoint::new(0.5, 0.0), Err(AuditError::Domain(_))));
        assert!(StripPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn horizon_from_infinity() {
        assert_eq!(Horizon::from(f64::INFINITY), Horizon::Infinite);
        assert_eq!(Horizon::from(2.0), Horizon::Finite(2.0));
        assert!(Horizon::finite(-1.0).is_err());
    }
}
