//! Generators of monotone convolution semigroups.
//!
//! A generator is split as `B(z) = a + b(z)` with `b(0) = 0`:
//!
//! * half-line: `b(z) = z sum_j w_j / (1 - z t_j)` and `a` real;
//! * circle: `B(z) = i beta - sum_j w_j (zeta_j + z) / (zeta_j - z)`, so
//!   `a = B(0) = i beta - rho(T)` and `b(z) = -sum_j w_j 2 z / (zeta_j - z)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{canonical_angle, Atom, Domain};
use crate::series::TruncatedSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sign-condition violations below this margin are reported.
pub const VALIDATION_TOL: f64 = 1e-12;
/// Bisection tolerance for the interior fixed point.
pub const BISECTION_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorHalfLine {
    a: f64,
    nu: Vec<Atom>,
}

impl GeneratorHalfLine {
    /// `nu` is a finite nonnegative measure on `[0, inf)`, possibly empty.
    pub fn new(a: f64, nu: Vec<Atom>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidGenerator(format!("a = {a} is not finite")));
        }
        for at in &nu {
            if !at.position.is_finite() || !at.weight.is_finite() || at.position < 0.0 || at.weight < 0.0 {
                return Err(Error::InvalidGenerator(format!(
                    "nu atoms need position >= 0 and weight >= 0, got {at:?}"
                )));
            }
        }
        Ok(Self { a, nu })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn nu(&self) -> &[Atom] {
        &self.nu
    }

    fn centered(&self, z: Complex64) -> Complex64 {
        z * self.nu.iter().map(|at| at.weight / (ONE - z * at.position)).sum::<Complex64>()
    }

    fn centered_series(&self, eta: &TruncatedSeries) -> Result<TruncatedSeries> {
        let order = eta.order();
        let mut acc = TruncatedSeries::zero(order);
        for at in &self.nu {
            let denom = &TruncatedSeries::constant(ONE, order) - &eta.scale(Complex64::new(at.position, 0.0));
            acc = &acc + &denom.reciprocal()?.scale(Complex64::new(at.weight, 0.0));
        }
        Ok(eta.mul_series(&acc))
    }

    /// `B` on the negative axis.
    fn real_b(&self, x: f64) -> f64 {
        self.a + x * self.nu.iter().map(|at| at.weight / (1.0 - x * at.position)).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorCircle {
    /// `B(z) = i beta - sum_j w_j (zeta_j + z) / (zeta_j - z)`, atoms as angles.
    Herglotz { beta: f64, rho: Vec<Atom> },
    /// `B(z) = z^n - 1`.
    PowerMinusOne { n: u32 },
}

impl GeneratorCircle {
    pub fn herglotz(beta: f64, rho: Vec<Atom>) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidGenerator(format!("beta = {beta} is not finite")));
        }
        let mut rho = rho;
        for at in &mut rho {
            if !at.position.is_finite() || !at.weight.is_finite() || at.weight < 0.0 {
                return Err(Error::InvalidGenerator(format!("rho atoms need weight >= 0, got {at:?}")));
            }
            at.position = canonical_angle(at.position);
        }
        Ok(GeneratorCircle::Herglotz { beta, rho })
    }

    pub fn power_minus_one(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGenerator("z^n - 1 needs n >= 1".into()));
        }
        Ok(GeneratorCircle::PowerMinusOne { n })
    }

    fn a(&self) -> Complex64 {
        match self {
            GeneratorCircle::Herglotz { beta, rho } => {
                Complex64::new(-rho.iter().map(|at| at.weight).sum::<f64>(), *beta)
            }
            GeneratorCircle::PowerMinusOne { .. } => -ONE,
        }
    }

    fn centered(&self, z: Complex64) -> Complex64 {
        match self {
            GeneratorCircle::Herglotz { rho, .. } => -rho
                .iter()
                .map(|at| {
                    let zeta = Complex64::from_polar(1.0, at.position);
                    2.0 * z * at.weight / (zeta - z)
                })
                .sum::<Complex64>(),
            GeneratorCircle::PowerMinusOne { n } => z.powu(*n),
        }
    }

    fn centered_series(&self, eta: &TruncatedSeries) -> Result<TruncatedSeries> {
        let order = eta.order();
        match self {
            GeneratorCircle::Herglotz { rho, .. } => {
                let mut acc = TruncatedSeries::zero(order);
                for at in rho {
                    let zeta = Complex64::from_polar(1.0, at.position);
                    let denom = &TruncatedSeries::constant(zeta, order) - eta;
                    acc = &acc + &denom.reciprocal()?.scale(Complex64::new(-2.0 * at.weight, 0.0));
                }
                Ok(eta.mul_series(&acc))
            }
            GeneratorCircle::PowerMinusOne { n } => Ok(eta.powi(*n as usize)),
        }
    }
}

/// A generator given only pointwise, as the full `B`. Validated on sample grids
/// and usable for pointwise flows only.
#[derive(Clone)]
pub struct CallableGenerator {
    domain: Domain,
    b: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl CallableGenerator {
    pub fn new(domain: Domain, b: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { domain, b: Arc::new(b) }
    }
}

impl fmt::Debug for CallableGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableGenerator").field("domain", &self.domain).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum Generator {
    HalfLine(GeneratorHalfLine),
    Circle(GeneratorCircle),
    Callable(CallableGenerator),
}

impl From<GeneratorHalfLine> for Generator {
    fn from(g: GeneratorHalfLine) -> Self {
        Generator::HalfLine(g)
    }
}

impl From<GeneratorCircle> for Generator {
    fn from(g: GeneratorCircle) -> Self {
        Generator::Circle(g)
    }
}

impl Generator {
    pub fn domain(&self) -> Domain {
        match self {
            Generator::HalfLine(_) => Domain::HalfLine,
            Generator::Circle(_) => Domain::Circle,
            Generator::Callable(c) => c.domain,
        }
    }

    /// `a = B(0)`.
    pub fn a(&self) -> Complex64 {
        match self {
            Generator::HalfLine(g) => Complex64::new(g.a, 0.0),
            Generator::Circle(g) => g.a(),
            Generator::Callable(c) => (c.b)(ZERO),
        }
    }

    /// `b(z) = B(z) - B(0)`.
    pub fn centered(&self, z: Complex64) -> Complex64 {
        match self {
            Generator::HalfLine(g) => g.centered(z),
            Generator::Circle(g) => g.centered(z),
            Generator::Callable(c) => (c.b)(z) - (c.b)(ZERO),
        }
    }

    /// `B(z)`.
    pub fn full(&self, z: Complex64) -> Complex64 {
        match self {
            Generator::Callable(c) => (c.b)(z),
            _ => self.a() + self.centered(z),
        }
    }

    /// `b(eta)` as a truncated series, for `eta` with zero constant term.
    pub fn centered_series(&self, eta: &TruncatedSeries) -> Result<TruncatedSeries> {
        match self {
            Generator::HalfLine(g) => g.centered_series(eta),
            Generator::Circle(g) => g.centered_series(eta),
            Generator::Callable(_) => {
                Err(Error::InvalidGenerator("a callable generator has no series expansion; use pointwise flows".into()))
            }
        }
    }
}

/// Result of checking a generator's sign conditions on a sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorReport {
    pub samples: usize,
    /// Sample points where the sign condition fails, with the margin there.
    pub violations: Vec<(Complex64, f64)>,
    /// Smallest `Im B` (half-line, over the upper half-plane) or `-Re B`
    /// (circle, over the disk).
    pub worst_margin: f64,
    /// Largest `|B(conj z) - conj B(z)|` (half-line only).
    pub symmetry_residual: f64,
}

impl GeneratorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.symmetry_residual <= VALIDATION_TOL * 1e3
    }
}

/// 200 sample points: 10 radii times 20 angles.
fn sample_grid(domain: Domain) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(200);
    for i in 0..10 {
        for j in 0..20 {
            let z = match domain {
                Domain::HalfLine => {
                    let r = 0.05 * 400f64.powf(i as f64 / 9.0);
                    Complex64::from_polar(r, PI * (j as f64 + 0.5) / 20.0)
                }
                Domain::Circle => {
                    let r = 0.99 * i as f64 / 9.0;
                    Complex64::from_polar(r, 2.0 * PI * j as f64 / 20.0)
                }
            };
            out.push(z);
        }
    }
    out
}

/// Checks `Im B >= 0` on the upper half-plane and `B(conj z) = conj B(z)` for
/// half-line generators, `Re B <= 0` on the disk for circle generators.
pub fn validate_generator(g: &Generator) -> GeneratorReport {
    let grid = sample_grid(g.domain());
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    let mut symmetry = 0.0f64;
    for &z in &grid {
        let b = g.full(z);
        let margin = match g.domain() {
            Domain::HalfLine => {
                let bc = g.full(z.conj());
                symmetry = symmetry.max((bc - b.conj()).norm() / b.norm().max(1.0));
                b.im
            }
            Domain::Circle => -b.re,
        };
        worst = worst.min(margin);
        if margin < -VALIDATION_TOL || !margin.is_finite() {
            violations.push((z, margin));
        }
    }
    GeneratorReport { samples: grid.len(), violations, worst_margin: worst, symmetry_residual: symmetry }
}

/// Position of the attracting fixed point of a half-line semigroup, read off
/// the sign of `B` on `(-inf, 0)`, where `B` is increasing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification {
    /// `B <= 0` on `(-inf, 0)`.
    DenjoyWolffZero,
    /// `B >= 0` on `(-inf, 0)`; this includes positive constants.
    DenjoyWolffInfinity,
    /// `B` changes sign at this negative point.
    InteriorFixedPoint(f64),
}

pub fn classify_halfline_generator(g: &GeneratorHalfLine) -> Classification {
    // B(0-) = a; B(-inf) = -inf if nu has an atom at 0, else a - sum w/t.
    if g.a <= 0.0 {
        return Classification::DenjoyWolffZero;
    }
    let mass_at_zero: f64 = g.nu.iter().filter(|at| at.position == 0.0).map(|at| at.weight).sum();
    if mass_at_zero == 0.0 {
        let at_infinity = g.a - g.nu.iter().map(|at| at.weight / at.position).sum::<f64>();
        if at_infinity >= 0.0 {
            return Classification::DenjoyWolffInfinity;
        }
    }
    let mut lo = -1.0;
    while g.real_b(lo) >= 0.0 {
        lo *= 2.0;
    }
    let mut hi = lo / 2.0;
    if g.real_b(hi) < 0.0 {
        hi = 0.0;
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if g.real_b(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Classification::InteriorFixedPoint(0.5 * (lo + hi))
}
