//! Verdict records emitted by every audit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    /// φτ(x) = Im(ζ(s)/s).
    Identity,
    /// φτ(y, t) = ψτ(y) - ψτ(γ) + hτ(z, x, t).
    Eq3,
    /// hτ as a finite sum of iterated integrals plus the remainder R.
    Eq4,
    /// |∫_{μ,n+1} φ̃| <= μ^{n+1} / (x (n+1)!).
    Eq6,
    /// R̃(n) shrinking with n.
    Eq7Trend,
    /// φ̃τ(x, t) <= ψτ(γ) - ψτ(x) + e^{-xt}/x when φτ(x) = 0.
    TailBound,
    /// sup |φ̃τ(x, ·)| < 1/x.
    SupBound,
    /// At most one zero of φτ on (0, 1).
    Prop1,
    /// Zeros of ζ mirror across Re(s) = 1/2.
    Reflection,
}

impl ClaimId {
    pub const ALL: [ClaimId; 9] = [
        ClaimId::Identity,
        ClaimId::Eq3,
        ClaimId::Eq4,
        ClaimId::Eq6,
        ClaimId::Eq7Trend,
        ClaimId::TailBound,
        ClaimId::SupBound,
        ClaimId::Prop1,
        ClaimId::Reflection,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimId::Identity => "identity",
            ClaimId::Eq3 => "eq3",
            ClaimId::Eq4 => "eq4",
            ClaimId::Eq6 => "eq6",
            ClaimId::Eq7Trend => "eq7_trend",
            ClaimId::TailBound => "tail_bound",
            ClaimId::SupBound => "sup_bound",
            ClaimId::Prop1 => "prop1",
            ClaimId::Reflection => "reflection",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClaimId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClaimId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown claim '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Pass when the residual is within tolerance; fail only when the residual
    /// exceeds tolerance and dwarfs the error estimate; otherwise inconclusive.
    pub fn judge(residual: f64, tolerance: f64, err_estimate: f64) -> Self {
        if residual <= tolerance {
            Verdict::Pass
        } else if err_estimate < 0.1 * residual {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub claim_id: ClaimId,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub err_estimate: f64,
    pub verdict: Verdict,
}

impl AuditRecord {
    /// Builds a record whose verdict follows [`Verdict::judge`]. Negative or
    /// non-finite residuals and estimates are clamped so the invariants hold.
    pub fn new<K: Into<String>>(
        claim_id: ClaimId,
        params: impl IntoIterator<Item = (K, f64)>,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
        err_estimate: f64,
    ) -> Self {
        let residual = if residual.is_nan() { f64::MAX } else { residual.clamp(0.0, f64::MAX) };
        let err_estimate = if err_estimate.is_nan() { f64::MAX } else { err_estimate.clamp(0.0, f64::MAX) };
        Self {
            claim_id,
            params: params.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            lhs,
            rhs,
            residual,
            tolerance,
            err_estimate,
            verdict: Verdict::judge(residual, tolerance, err_estimate),
        }
    }

    /// Record for an equality claim: residual = |lhs - rhs|.
    pub fn equality<K: Into<String>>(
        claim_id: ClaimId,
        params: impl IntoIterator<Item = (K, f64)>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        err_estimate: f64,
    ) -> Self {
        Self::new(claim_id, params, lhs, rhs, (lhs - rhs).abs(), tolerance, err_estimate)
    }

    /// Record for an inequality `lhs <= rhs`: residual is the violation `max(0, lhs - rhs)`.
    pub fn upper_bound<K: Into<String>>(
        claim_id: ClaimId,
        params: impl IntoIterator<Item = (K, f64)>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        err_estimate: f64,
    ) -> Self {
        Self::new(claim_id, params, lhs, rhs, lhs - rhs, tolerance, err_estimate)
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
