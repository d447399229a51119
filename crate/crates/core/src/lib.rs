//! Computable pieces of noncommutative dynamics over a matrix algebra:
//! moment polynomials of a completely positive contraction, the generator
//! semigroup with its expectation onto the algebra, Gram positivity, and a
//! finite-horizon dilation model with numerical verification of its defining
//! identities.

pub mod algebra;
pub mod checks;
pub mod dilation;
pub mod error;
pub mod expectation;
pub mod moments;
pub mod report;
pub mod rng;
pub mod words;

pub use algebra::{CMatrix, Channel};
pub use error::{Error, Result};
pub use expectation::{FiniteSection, Generator};
pub use report::{CheckRecord, Report};
pub use words::{IndexTuple, Word};
