//! Multiplicative monotone convolution of probability measures on the half-line
//! and on the unit circle.
//!
//! Measures are handled through their moment generating series
//! `psi(z) = sum m_n z^n` and `eta = psi / (1 + psi)`. The two convolutions are
//! compositions of eta-transforms:
//!
//! * `mconv`: `eta_{mu1 ⟳ mu2} = eta_1 ∘ eta_2`;
//! * `mconv0`: `eta(z) = eta_1(eta_2(a z) / a)` with `a = m_1(mu1)`, falling
//!   back to `eta_1(eta_2'(0) z)` when `a = 0`.
//!
//! The crate also provides an independent operator-model oracle, convolution
//! semigroups driven by a generator, and root extraction for divisibility chains.

pub mod acceptance;
pub mod convolution;
pub mod error;
pub mod io;
pub mod measures;
pub mod operator_model;
pub mod sampling;
pub mod semigroup;
pub mod series;

pub use convolution::{ConvolutionPair, Operation};
pub use error::{Error, Result};
pub use measures::{Atom, AtomicMeasure, Domain, Measure, PointDomain, TransformPoint};
pub use series::{MomentSequence, TruncatedSeries};

pub use num_complex::Complex64;
pub use sampling::DEFAULT_SEED;
