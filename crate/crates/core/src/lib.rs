//! Certified evaluation of pseudo-polynomials at primes, exponential sums
//! over primes with Type I/II decompositions, Vaaler smoothing, the
//! exponent calculus for small fractional parts `||xi floor(f(p))||`, and
//! desk-scale experiment drivers.

pub mod bounds;
pub mod config;
pub mod error;
pub mod exp_sums;
pub mod experiments;
pub mod fit;
pub mod fourier_smoothing;
pub mod primes;
pub mod pseudo_poly;
pub mod real;
mod summation;

pub use config::{OutputFormat, Precision, RunConfig, SieveConfig};
pub use error::{Error, Result};
pub use pseudo_poly::{parse_pseudo_poly, CertifiedReal, Distance, Phase, PseudoPolynomial, Term};
pub use real::{Interval, Real};
