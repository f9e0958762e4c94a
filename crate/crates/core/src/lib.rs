//! Exact computation of `c(a,b)`, the least `c` such that `φ(a!)·φ(b!)` divides
//! `φ(c!)`, together with the ratio `r(a,b) = c(a,b)/(a+b)`, finite verifiers for
//! the number-theoretic bounds surrounding it, and reproducible experiment scans.
//!
//! Everything is carried in factored form: `φ(n!)` is never materialised as a big
//! integer, only as a vector of prime exponents.

pub mod cli;
pub mod dickson;
pub mod error;
pub mod experiments;
pub mod phi_factorial;
pub mod primes;
pub mod rational;
pub mod valuations;
pub mod verifiers;

pub use error::{Error, Result};
pub use phi_factorial::{PairResult, PhiFactorialTable};
pub use primes::PrimeTable;
pub use valuations::{ExponentVec, SignedExponentVec};
pub use verifiers::VerificationReport;
