//! The pair operation on `(distribution, centering constant)` and the two
//! induced convolutions, at series level and pointwise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{AtomicMeasure, Domain, Measure, PointDomain, TransformPoint};
use crate::series::{eta_from_moments, moments_from_eta, MomentSequence, TruncatedSeries};

/// Centering constants at or below this modulus use the derivative branch.
pub const CENTER_TOL: f64 = 1e-12;
/// Tolerance for an intermediate point leaving the transform domain.
pub const ESCAPE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    /// Centering constants 1.
    Mconv,
    /// Centering constants equal to first moments.
    Mconv0,
}

impl Operation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Operation::Mconv => "mconv",
            Operation::Mconv0 => "mconv0",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mconv" => Ok(Operation::Mconv),
            "mconv0" => Ok(Operation::Mconv0),
            other => Err(Error::Parse(format!("unknown operation `{other}` (expected mconv or mconv0)"))),
        }
    }
}

/// A distribution together with its centering constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionPair {
    pub dist: MomentSequence,
    pub c: Complex64,
}

impl ConvolutionPair {
    pub fn new(dist: MomentSequence, c: Complex64) -> Self {
        Self { dist, c }
    }
}

/// `eta(z) = eta1(eta2(c1 z) / c1)`, or `eta1(eta2'(0) z)` when `c1` vanishes.
pub fn convolve_eta(eta1: &TruncatedSeries, c1: Complex64, eta2: &TruncatedSeries) -> Result<TruncatedSeries> {
    let order = eta1.order().min(eta2.order());
    let eta1 = eta1.with_order(order);
    let inner = if c1.norm() > CENTER_TOL {
        // [eta2(c1 z) / c1]_k = eta2_k c1^(k-1)
        let mut pow = Complex64::new(1.0, 0.0);
        TruncatedSeries::from_fn(order, |k| {
            if k == 0 {
                return eta2.coeff(0) / c1;
            }
            let v = eta2.coeff(k) * pow;
            pow *= c1;
            v
        })
    } else {
        TruncatedSeries::monomial(eta2.coeff(1), 1, order)
    };
    eta1.compose(&inner)
}

/// `(mu1, c1) ⟳ (mu2, c2)`: the distribution of `x1 x2` with constant `c1 c2`.
/// The result is truncated at the smallest of `order` and the input orders.
pub fn convolve_pair(p1: &ConvolutionPair, p2: &ConvolutionPair, order: usize) -> ConvolutionPair {
    let order = order.min(p1.dist.order()).min(p2.dist.order());
    let eta1 = eta_from_moments(&p1.dist.truncate(order));
    let eta2 = eta_from_moments(&p2.dist.truncate(order));
    let eta = convolve_eta(&eta1, p1.c, &eta2).expect("eta transforms have zero constant term");
    ConvolutionPair { dist: moments_from_eta(&eta), c: p1.c * p2.c }
}

/// `mu1 ⟳ mu2`: composition of eta-transforms.
pub fn mconv(m1: &MomentSequence, m2: &MomentSequence, order: usize) -> MomentSequence {
    let one = Complex64::new(1.0, 0.0);
    convolve_pair(&ConvolutionPair::new(m1.clone(), one), &ConvolutionPair::new(m2.clone(), one), order).dist
}

/// `mu1 ⟳₀ mu2`: both centering constants are first moments.
pub fn mconv0(m1: &MomentSequence, m2: &MomentSequence, order: usize) -> MomentSequence {
    let p1 = ConvolutionPair::new(m1.clone(), m1.first());
    let p2 = ConvolutionPair::new(m2.clone(), m2.first());
    convolve_pair(&p1, &p2, order).dist
}

pub fn convolve(op: Operation, m1: &MomentSequence, m2: &MomentSequence, order: usize) -> MomentSequence {
    match op {
        Operation::Mconv => mconv(m1, m2, order),
        Operation::Mconv0 => mconv0(m1, m2, order),
    }
}

/// Series-level convolution on eta-transforms. For `mconv0` the centering
/// constant is `eta1'(0)`, the first moment of the left factor.
pub fn convolve_etas(op: Operation, eta1: &TruncatedSeries, eta2: &TruncatedSeries) -> Result<TruncatedSeries> {
    let c1 = match op {
        Operation::Mconv => Complex64::new(1.0, 0.0),
        Operation::Mconv0 => eta1.coeff(1),
    };
    convolve_eta(eta1, c1, eta2)
}

/// Pointwise eta-transform of `mu1 ⟳ mu2` or `mu1 ⟳₀ mu2`, exact over the atoms.
pub fn eval_convolved_eta(mu1: &Measure, mu2: &Measure, op: Operation, z: &TransformPoint) -> Result<Complex64> {
    if mu1.domain() != mu2.domain() {
        return Err(Error::DomainMismatch(format!(
            "cannot convolve a {} measure with a {} measure",
            mu1.domain(),
            mu2.domain()
        )));
    }
    let expected = mu1.domain().point_domain();
    if z.domain() != expected {
        return Err(Error::DomainMismatch(format!("{} measures are evaluated on {expected:?}", mu1.domain())));
    }
    let zv = z.z();
    let w = match op {
        Operation::Mconv => mu2.eta_at(zv)?,
        Operation::Mconv0 => {
            let alpha = mu1.first_moment();
            if alpha.norm() > CENTER_TOL {
                mu2.eta_at(alpha * zv)? / alpha
            } else {
                mu2.first_moment() * zv
            }
        }
    };
    check_escape(expected, zv, w)?;
    mu1.eta_at(w)
}

fn check_escape(domain: PointDomain, z: Complex64, w: Complex64) -> Result<()> {
    let escaped = match domain {
        // The slit plane is open with a ray as complement; conjugation symmetry
        // forces w into the same closed half-plane as z, so landing on the ray,
        // or crossing it, is the only way out.
        PointDomain::Omega => w.re > ESCAPE_TOL && w.im * z.im <= 0.0,
        PointDomain::Disk => w.norm() >= 1.0 + ESCAPE_TOL,
    };
    if escaped || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::DomainEscape(format!("intermediate point {w} for z = {z}")));
    }
    Ok(())
}

/// Outcome of the support bound checks for a half-line convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport {
    /// `beta1 beta2`, with `beta_j = max(sup supp mu_j, 1)`.
    pub upper_bound: f64,
    /// `alpha1 alpha2`, with `alpha_j = min(inf supp mu_j, 1)`.
    pub lower_bound: f64,
    /// `max_n |m_n|^{1/n}` over the result.
    pub max_root: f64,
    /// First `n` with `|m_n|^{1/n} > upper_bound + tol`, if any.
    pub upper_violation: Option<usize>,
    /// `|m_N|^{1/N}` for the last computed moment.
    pub last_root: f64,
    /// Whether `|m_N|^{1/N} >= sup supp mu2`. Advisory: finite `N` underestimates
    /// the support supremum, so this is only meaningful on closed-form examples.
    pub lower_witness: bool,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.upper_violation.is_none()
    }
}

/// Tolerance of the upper support bound.
pub const SUPPORT_TOL: f64 = 1e-6;

/// Checks `|m_n|^{1/n} <= beta1 beta2` for every moment of `result`, the
/// convolution of two half-line measures.
pub fn support_bounds_check(
    mu1: &AtomicMeasure,
    mu2: &AtomicMeasure,
    result: &MomentSequence,
) -> Result<SupportReport> {
    if mu1.domain() != Domain::HalfLine || mu2.domain() != Domain::HalfLine {
        return Err(Error::DomainMismatch("support bounds apply to half-line measures".into()));
    }
    let (lo1, hi1) = mu1.support_range();
    let (lo2, hi2) = mu2.support_range();
    let upper_bound = hi1.max(1.0) * hi2.max(1.0);
    let lower_bound = lo1.min(1.0) * lo2.min(1.0);
    let mut max_root = 0.0f64;
    let mut upper_violation = None;
    let mut last_root = 0.0;
    for n in 1..=result.order() {
        let root = result.get(n).norm().powf(1.0 / n as f64);
        max_root = max_root.max(root);
        if upper_violation.is_none() && root > upper_bound + SUPPORT_TOL {
            upper_violation = Some(n);
        }
        last_root = root;
    }
    Ok(SupportReport {
        upper_bound,
        lower_bound,
        max_root,
        upper_violation,
        last_root,
        lower_witness: last_root >= hi2,
    })
}
