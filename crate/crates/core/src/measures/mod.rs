//! Finitely atomic probability measures on the half-line `[0, inf)` and on the
//! unit circle, with exact transform evaluation.
//!
//! For a measure on the half-line the transforms are evaluated on the slit plane
//! `C \ [0, inf)`; for a measure on the circle, on the open unit disk.
//! The Haar measure of the circle is not atomic and is represented by
//! [`Measure::Haar`]; all of its transforms vanish identically.

mod inversion;
mod prony;

pub use inversion::{cauchy_from_psi, poisson_density, stieltjes_density, DEFAULT_EPSILON, DEFAULT_RADIUS};
pub use prony::{prony_recover, HANKEL_RANK_TOL};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MomentSequence;

/// Weights must sum to one within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Minimum distance of a transform point from the boundary of its domain.
pub const POINT_TOL: f64 = 1e-12;
/// `|1 - z t|` below this is reported as a pole.
pub const POLE_TOL: f64 = 1e-14;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    HalfLine,
    Circle,
}

impl Domain {
    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::HalfLine => "half_line",
            Domain::Circle => "circle",
        }
    }

    /// The region where transforms of measures on this domain are evaluated.
    pub fn point_domain(&self) -> PointDomain {
        match self {
            Domain::HalfLine => PointDomain::Omega,
            Domain::Circle => PointDomain::Disk,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point mass. `position` is a nonnegative real on the half-line and an
/// angle in `[0, 2 pi)` on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(position: f64, weight: f64) -> Self {
        Self { position, weight }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    domain: Domain,
    /// Sorted by position, merged, weights summing to one.
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Validates and canonicalizes a list of atoms: circle angles are reduced to
    /// `[0, 2 pi)` and atoms within [`MERGE_TOL`] of each other are merged.
    pub fn new(domain: Domain, atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for a in &mut atoms {
            if !a.position.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom {a:?}")));
            }
            if a.weight <= 0.0 {
                return Err(Error::InvalidMeasure(format!("weight {} is not positive", a.weight)));
            }
            match domain {
                Domain::HalfLine => {
                    if a.position < 0.0 {
                        return Err(Error::InvalidMeasure(format!(
                            "position {} is negative on the half-line",
                            a.position
                        )));
                    }
                    a.position = a.position.max(0.0);
                }
                Domain::Circle => a.position = canonical_angle(a.position),
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if a.position - last.position <= MERGE_TOL => last.weight += a.weight,
                _ => merged.push(a),
            }
        }
        if domain == Domain::Circle && merged.len() > 1 {
            let first = merged[0];
            let last = merged[merged.len() - 1];
            if first.position + TAU - last.position <= MERGE_TOL {
                merged[0].weight += last.weight;
                merged.pop();
            }
        }
        Ok(Self { domain, atoms: merged })
    }

    pub fn half_line(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(Domain::HalfLine, atoms.into_iter().map(|(p, w)| Atom::new(p, w)))
    }

    /// Circle measure from `(angle, weight)` pairs.
    pub fn circle(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(Domain::Circle, atoms.into_iter().map(|(p, w)| Atom::new(p, w)))
    }

    pub fn dirac(domain: Domain, position: f64) -> Result<Self> {
        Self::new(domain, [Atom::new(position, 1.0)])
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The atom location as a complex number: `t` or `e^{i theta}`.
    pub fn point(&self, atom: &Atom) -> Complex64 {
        match self.domain {
            Domain::HalfLine => Complex64::new(atom.position, 0.0),
            Domain::Circle => Complex64::from_polar(1.0, atom.position),
        }
    }

    fn points(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.atoms.iter().map(|a| (self.point(a), a.weight))
    }

    /// Smallest and largest atom position (half-line measures).
    pub fn support_range(&self) -> (f64, f64) {
        let lo = self.atoms.first().map_or(0.0, |a| a.position);
        let hi = self.atoms.last().map_or(0.0, |a| a.position);
        (lo, hi)
    }

    pub fn moments(&self, order: usize) -> MomentSequence {
        let mut out = vec![Complex64::new(0.0, 0.0); order];
        for (p, w) in self.points() {
            let mut pow = ONE;
            for m in out.iter_mut() {
                pow *= p;
                *m += pow * w;
            }
        }
        MomentSequence::new(out)
    }

    pub fn first_moment(&self) -> Complex64 {
        self.points().map(|(p, w)| p * w).sum()
    }

    /// `psi(z) = sum_j w_j z t_j / (1 - z t_j)` without checking the domain of `z`.
    pub(crate) fn psi_at(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in self.points() {
            let zt = z * p;
            let denom = ONE - zt;
            if denom.norm() < POLE_TOL {
                return Err(Error::PoleHit(denom.norm()));
            }
            acc += zt / denom * w;
        }
        Ok(acc)
    }

    /// Cauchy transform `G(w) = sum_j w_j / (w - t_j)` of a half-line measure.
    pub fn eval_cauchy(&self, w: Complex64) -> Result<Complex64> {
        if self.domain != Domain::HalfLine {
            return Err(Error::DomainMismatch("the Cauchy transform is defined for half-line measures".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            let d = w - a.position;
            if d.norm() <= POLE_TOL {
                return Err(Error::PoleHit(d.norm()));
            }
            acc += a.weight / d;
        }
        Ok(acc)
    }

    /// Smoothed density on a grid via the Cauchy transform.
    pub fn stieltjes_density(&self, grid: &[f64], epsilon: f64) -> Result<Vec<f64>> {
        if self.domain != Domain::HalfLine {
            return Err(Error::DomainMismatch("Stieltjes inversion needs a half-line measure".into()));
        }
        Ok(stieltjes_density(|w| self.eval_cauchy(w).unwrap_or(Complex64::new(0.0, 0.0)), grid, epsilon))
    }
}

/// Reduces an angle to `[0, 2 pi)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A probability measure on the half-line or the circle.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    /// Normalized arclength on the circle.
    Haar,
}

impl From<AtomicMeasure> for Measure {
    fn from(m: AtomicMeasure) -> Self {
        Measure::Atomic(m)
    }
}

impl Measure {
    pub fn domain(&self) -> Domain {
        match self {
            Measure::Atomic(m) => m.domain(),
            Measure::Haar => Domain::Circle,
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicMeasure> {
        match self {
            Measure::Atomic(m) => Some(m),
            Measure::Haar => None,
        }
    }

    pub fn moments(&self, order: usize) -> MomentSequence {
        match self {
            Measure::Atomic(m) => m.moments(order),
            Measure::Haar => MomentSequence::new(vec![Complex64::new(0.0, 0.0); order]),
        }
    }

    pub fn first_moment(&self) -> Complex64 {
        match self {
            Measure::Atomic(m) => m.first_moment(),
            Measure::Haar => Complex64::new(0.0, 0.0),
        }
    }

    pub(crate) fn psi_at(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Measure::Atomic(m) => m.psi_at(z),
            Measure::Haar => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    pub(crate) fn eta_at(&self, z: Complex64) -> Result<Complex64> {
        let psi = self.psi_at(z)?;
        Ok(psi / (ONE + psi))
    }

    fn check_point(&self, p: &TransformPoint) -> Result<()> {
        if self.domain().point_domain() != p.domain() {
            return Err(Error::DomainMismatch(format!(
                "a {} measure is evaluated on {:?}, got a point of {:?}",
                self.domain(),
                self.domain().point_domain(),
                p.domain()
            )));
        }
        Ok(())
    }

    /// `psi_mu(z)`, exact over the atoms.
    pub fn eval_psi(&self, p: &TransformPoint) -> Result<Complex64> {
        self.check_point(p)?;
        self.psi_at(p.z())
    }

    /// `eta_mu(z) = psi / (1 + psi)`.
    pub fn eval_eta(&self, p: &TransformPoint) -> Result<Complex64> {
        self.check_point(p)?;
        self.eta_at(p.z())
    }

    /// Poisson-smoothed density on the circle at radius `r`.
    pub fn poisson_density(&self, angles: &[f64], r: f64) -> Result<Vec<f64>> {
        if self.domain() != Domain::Circle {
            return Err(Error::DomainMismatch("Poisson inversion needs a circle measure".into()));
        }
        let mut err = None;
        let out = poisson_density(
            |z| {
                self.psi_at(z).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                })
            },
            angles,
            r,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointDomain {
    /// The slit plane `C \ [0, inf)`.
    Omega,
    /// The open unit disk.
    Disk,
}

/// A validated evaluation point for transforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformPoint {
    z: Complex64,
    domain: PointDomain,
}

impl TransformPoint {
    pub fn new(z: Complex64, domain: PointDomain) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidPoint(format!("{z} is not finite")));
        }
        match domain {
            PointDomain::Omega => {
                let dist = distance_to_ray(z);
                if dist <= POINT_TOL {
                    return Err(Error::InvalidPoint(format!("{z} lies on [0, inf) (distance {dist:e})")));
                }
            }
            PointDomain::Disk => {
                if z.norm() >= 1.0 - POINT_TOL {
                    return Err(Error::InvalidPoint(format!("|{z}| is not below 1")));
                }
            }
        }
        Ok(Self { z, domain })
    }

    pub fn omega(z: Complex64) -> Result<Self> {
        Self::new(z, PointDomain::Omega)
    }

    pub fn disk(z: Complex64) -> Result<Self> {
        Self::new(z, PointDomain::Disk)
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn domain(&self) -> PointDomain {
        self.domain
    }
}

/// Euclidean distance from `z` to the ray `[0, inf)`.
pub fn distance_to_ray(z: Complex64) -> f64 {
    if z.re >= 0.0 {
        z.im.abs()
    } else {
        z.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_point() -> AtomicMeasure {
        AtomicMeasure::half_line([(0.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(AtomicMeasure::half_line([(1.0, 0.5)]).is_err());
        assert!(AtomicMeasure::half_line([(-1.0, 1.0)]).is_err());
        assert!(AtomicMeasure::half_line([(1.0, 1.5), (2.0, -0.5)]).is_err());
        assert!(AtomicMeasure::half_line(std::iter::empty()).is_err());

        let m = AtomicMeasure::half_line([(1.0, 0.25), (1.0 + 1e-13, 0.25), (3.0, 0.5)]).unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.atoms()[0].weight - 0.5).abs() < 1e-15);

        let m = AtomicMeasure::circle([(-PI / 2.0, 0.5), (7.0 * PI, 0.5)]).unwrap();
        let pos: Vec<f64> = m.atoms().iter().map(|a| a.position).collect();
        assert!((pos[0] - PI).abs() < 1e-12 && (pos[1] - 1.5 * PI).abs() < 1e-12);

        // wrap-around merge at 0 ~ 2 pi
        let m = AtomicMeasure::circle([(1e-13, 0.5), (-1e-13, 0.5)]).unwrap();
        assert_eq!(m.atoms().len(), 1);
    }

    #[test]
    fn moment_examples() {
        let d1 = AtomicMeasure::dirac(Domain::HalfLine, 1.0).unwrap();
        assert!(d1.moments(6).as_slice().iter().all(|&m| m == c(1.0, 0.0)));

        let m = two_point().moments(12);
        for n in 1..=12 {
            assert!((m.get(n) - c(2f64.powi(n as i32 - 1), 0.0)).norm() < 1e-12);
        }

        let m = AtomicMeasure::circle([(0.0, 0.5), (PI, 0.5)]).unwrap().moments(9);
        for n in 1..=9 {
            let expected = (1.0 + (-1f64).powi(n as i32)) / 2.0;
            assert!((m.get(n) - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn psi_examples() {
        let z = TransformPoint::disk(c(0.3, -0.6)).unwrap();
        assert_eq!(Measure::Haar.eval_psi(&z).unwrap(), c(0.0, 0.0));
        assert_eq!(Measure::Haar.eval_eta(&z).unwrap(), c(0.0, 0.0));

        let mu: Measure = two_point().into();
        let psi = mu.eval_psi(&TransformPoint::omega(c(-1.0, 0.0)).unwrap()).unwrap();
        assert!((psi - c(-1.0 / 3.0, 0.0)).norm() < 1e-15);

        let d1: Measure = AtomicMeasure::dirac(Domain::HalfLine, 1.0).unwrap().into();
        for z in [c(-2.0, 0.0), c(0.5, 0.5), c(3.0, -1e-3)] {
            let p = TransformPoint::omega(z).unwrap();
            assert!((d1.eval_psi(&p).unwrap() - z / (1.0 - z)).norm() < 1e-13);
            // eta of delta_1 is the identity
            assert!((d1.eval_eta(&p).unwrap() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn point_validation_and_domain_mismatch() {
        assert!(TransformPoint::omega(c(2.0, 0.0)).is_err());
        assert!(TransformPoint::omega(c(0.0, 0.0)).is_err());
        assert!(TransformPoint::omega(c(2.0, 1e-6)).is_ok());
        assert!(TransformPoint::disk(c(0.6, 0.8)).is_err());
        let mu: Measure = two_point().into();
        let p = TransformPoint::disk(c(0.1, 0.0)).unwrap();
        assert!(matches!(mu.eval_psi(&p), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn pole_detection() {
        let m = AtomicMeasure::dirac(Domain::HalfLine, 2.0).unwrap();
        assert!(matches!(m.psi_at(c(0.5, 0.0)), Err(Error::PoleHit(_))));
        assert!(matches!(m.eval_cauchy(c(2.0, 0.0)), Err(Error::PoleHit(_))));
    }

    #[test]
    fn cauchy_examples() {
        let d2 = AtomicMeasure::dirac(Domain::HalfLine, 2.0).unwrap();
        let i = c(0.0, 1.0);
        assert!((d2.eval_cauchy(i).unwrap() - 1.0 / (i - 2.0)).norm() < 1e-15);
        assert!((two_point().eval_cauchy(c(3.0, 0.0)).unwrap() - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        let d0 = AtomicMeasure::dirac(Domain::HalfLine, 0.0).unwrap();
        assert_eq!(d0.eval_cauchy(c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn cauchy_psi_bridge() {
        let mu = AtomicMeasure::half_line([(0.0, 0.2), (0.7, 0.3), (2.5, 0.5)]).unwrap();
        for w in [c(-1.0, 0.5), c(4.0, 2.0), c(0.3, -0.1), c(-3.0, 0.0)] {
            let g = mu.eval_cauchy(w).unwrap();
            let psi = mu.psi_at(1.0 / w).unwrap();
            assert!((psi - (w * g - 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn halfline_argument_bound() {
        let mu: Measure = AtomicMeasure::half_line([(0.0, 0.1), (0.4, 0.3), (1.7, 0.4), (5.0, 0.2)]).unwrap().into();
        for r in [0.05, 0.3, 1.0, 2.5, 10.0] {
            for k in 1..20 {
                let theta = PI * k as f64 / 20.0;
                let z = Complex64::from_polar(r, theta);
                let eta = mu.eval_eta(&TransformPoint::omega(z).unwrap()).unwrap();
                let eta_bar = mu.eval_eta(&TransformPoint::omega(z.conj()).unwrap()).unwrap();
                assert!((eta_bar - eta.conj()).norm() < 1e-12);
                assert!(eta.arg() >= theta - 1e-12 && eta.arg() <= PI + 1e-12);
            }
        }
    }

    #[test]
    fn circle_schur_bound() {
        let mu: Measure = AtomicMeasure::circle([(0.3, 0.2), (2.0, 0.5), (4.4, 0.3)]).unwrap().into();
        for r in [0.0, 0.2, 0.5, 0.9, 0.999] {
            for k in 0..24 {
                let z = Complex64::from_polar(r, TAU * k as f64 / 24.0);
                let eta = mu.eval_eta(&TransformPoint::disk(z).unwrap()).unwrap();
                assert!(eta.norm() <= z.norm() + 1e-14);
            }
        }
    }

    /// Taylor coefficients of `eval_psi` at 0, extracted by the trapezoidal
    /// rule on a circle (discrete Cauchy integral), agree with the moments.
    #[test]
    fn taylor_coefficients_match_moments() {
        let mu = AtomicMeasure::half_line([(0.0, 0.25), (0.5, 0.25), (1.5, 0.5)]).unwrap();
        let radius = 0.3;
        let samples = 256;
        let moments = mu.moments(12);
        for n in 1..=12 {
            let mut acc = c(0.0, 0.0);
            for j in 0..samples {
                let theta = TAU * (j as f64 + 0.5) / samples as f64;
                let z = Complex64::from_polar(radius, theta);
                acc += mu.psi_at(z).unwrap() * Complex64::from_polar(1.0, -(n as f64) * theta);
            }
            let coeff = acc / samples as f64 / radius.powi(n as i32);
            assert!((coeff - moments.get(n)).norm() < 1e-8, "n = {n}");
        }
    }
}
