//! Numerical audit laboratory for the Abel-summation representation of ζ(s).

pub mod abel;
pub mod audit;
pub mod bernoulli;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod scanner;
pub mod summation;
pub mod types;

pub use error::{AuditError, Result};
pub use types::{ComplexValue, Horizon, StripPoint, ValueWithError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/representation.md")]
    mod representation {}
    #[doc = include_str!("../../../book/src/phi.md")]
    mod phi {}
    #[doc = include_str!("../../../book/src/expansion.md")]
    mod expansion {}
    #[doc = include_str!("../../../book/src/scanning.md")]
    mod scanning {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
