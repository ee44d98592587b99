//! Orthogonal polynomials defined by hypergeometric-type equations
//! `σ(s) y'' + τ(s) y' + λ y = 0`, their associated special functions and
//! ladder operators, and the Schrödinger-type potentials they generate.
//!
//! Exact identities are checked over the rationals ([`exactpoly`],
//! [`polygen`], [`ladder`], [`classical`]); weighted integrals and spectra
//! are numerical ([`quad`], [`schrodinger`]).

pub mod classical;
pub mod error;
pub mod exactpoly;
pub mod ladder;
pub mod polygen;
pub mod quad;
pub mod samples;
pub mod schrodinger;
pub mod suites;
pub mod system;

pub use error::{Error, Result};
pub use exactpoly::{Rational, RationalPoly};
pub use system::{CaseTag, Cutoff, HyperSystem};
