//! Exact biased-Fourier analysis of Boolean juntas, the generalized Russo
//! formula, and junta learning from several biased example oracles.
//!
//! Variables are 0-based throughout.

pub mod boolfn;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod learner;
pub mod measure;
pub mod poly;
pub mod russo;
pub mod sampling;
pub mod subsets;

pub use boolfn::{DenseFunction, Junta, PartialAssignment, Sign};
pub use error::{Error, Result};
pub use measure::BiasVector;
pub use poly::DyadicPolynomial;
