//! Roots of measures under `mconv` / `mconv0` by halving.

use num_complex::Complex64;

use crate::convolution::{convolve_etas, Operation, CENTER_TOL};
use crate::error::{Error, Result};
use crate::series::{eta_from_moments, moments_from_eta, nth_root, MomentSequence, TruncatedSeries};

/// Recomposition tolerance on eta coefficients, absolute up to modulus 1 and
/// relative above.
pub const RECOMPOSITION_TOL: f64 = 1e-9;

/// Which square root of the linear coefficient each halving uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    #[default]
    Principal,
    /// The root `|l|^{1/2} e^{i (arg l + 2 pi k) / 2}`.
    Winding(i64),
}

impl BranchPolicy {
    fn winding(&self) -> i64 {
        match self {
            BranchPolicy::Principal => 0,
            BranchPolicy::Winding(k) => *k,
        }
    }
}

/// One level of a divisibility chain: the measure `mu_{1/2^level}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLevel {
    pub level: usize,
    pub eta: TruncatedSeries,
    pub moments: MomentSequence,
    /// Largest eta coefficient error of `level ∘ level` against `level - 1`,
    /// relative for coefficients of modulus above 1.
    pub recomposition_error: f64,
}

/// `mu_{1/2}, mu_{1/4}, ..., mu_{1/2^depth}`, preceded by `mu` itself as level 0.
///
/// For `mconv0` each halving normalizes the first moment `b` to one
/// (`eta(z) -> eta(z / b)`), takes the root with linear coefficient 1 and
/// rescales by a square root of `b`.
pub fn divisibility_chain(
    mu: &MomentSequence,
    depth: usize,
    op: Operation,
    policy: BranchPolicy,
) -> Result<Vec<ChainLevel>> {
    if mu.first().norm() <= CENTER_TOL {
        return Err(Error::ZeroFirstMoment);
    }
    let one = Complex64::new(1.0, 0.0);
    let eta0 = eta_from_moments(mu);
    let mut levels = vec![ChainLevel { level: 0, moments: mu.clone(), eta: eta0, recomposition_error: 0.0 }];
    for level in 1..=depth {
        let prev = &levels[level - 1].eta;
        let b = prev.coeff(1);
        let branch = nth_root(b, 2, policy.winding());
        let eta = match op {
            Operation::Mconv => prev.compositional_root(2, branch)?,
            Operation::Mconv0 => prev.dilate(one / b).compositional_root(2, one)?.dilate(branch),
        };
        let back = convolve_etas(op, &eta, &eta)?;
        let error = (0..=prev.order())
            .map(|k| (back.coeff(k) - prev.coeff(k)).norm() / prev.coeff(k).norm().max(1.0))
            .fold(0.0, f64::max);
        if error.is_nan() || error > RECOMPOSITION_TOL {
            return Err(Error::RecompositionFailure { level, error });
        }
        levels.push(ChainLevel { level, moments: moments_from_eta(&eta), eta, recomposition_error: error });
    }
    Ok(levels)
}
