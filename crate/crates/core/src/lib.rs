//! Exact-arithmetic tools for comparing entanglement transformations of
//! bipartite pure states given by their Schmidt coefficients: plain LOCC
//! (majorization), catalysis, and collective multiple-copy conversion.

pub mod catalysis;
pub mod error;
pub mod majorization;
pub mod multicopy;
pub mod outcome;
pub mod rational;
pub mod region;
pub mod spectrum;
pub mod witness;

pub use error::{Error, Result};
pub use outcome::Tri;
pub use rational::{format_rational, parse_rational, Rational};
pub use spectrum::{RunLengthSpectrum, SpectrumVector};
