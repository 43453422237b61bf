//! Koenigs functions, limit conditional law and invariant measure of the
//! continuous-time Markov branching process whose particles live an
//! exponential time with rate `K` and are replaced by a Poisson(`λ`) number
//! of offspring.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its arguments; file formats, the command line and parallel
//! execution live in the `koenigs` companion crate.
//!
//! Layout:
//!
//! * [`specfun`]: `Ein`, `Ei`, Lambert W, Stirling numbers, partial Bell
//!   polynomials, factorial polynomials and harmonic numbers.
//! * [`series`]: truncated Taylor expansions in the derivative convention.
//! * [`model`]: the branching model itself (pgf, generator, criticality).
//! * [`koenigs`]: every construction of the Koenigs functions.
//! * [`oracle`]: quadrature and ODE ground truth, functional-equation residuals.
//! * [`montecarlo`]: event-driven simulation of the process.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod extended;
pub mod koenigs;
pub(crate) mod math;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod series;
pub mod specfun;
pub mod summation;

pub use error::{Error, Result};
pub use model::{BranchingModel, Criticality, CriticalityKind};
pub use series::{Center, Evaluation, TaylorExpansion};

/// Default truncation order of every series construction.
pub const DEFAULT_ORDER: usize = 80;
