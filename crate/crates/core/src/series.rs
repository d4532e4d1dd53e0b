//! Truncated formal power series over the complex numbers.
//!
//! A [`TruncatedSeries`] of order `N` holds the coefficients `c_0..=c_N` of a
//! power series modulo `z^(N+1)`. Every operation is exact in this quotient
//! algebra apart from floating-point roundoff: coefficient `n` of a result only
//! ever depends on coefficients `0..=n` of the inputs.
//!
//! The moment generating series `psi(z) = sum m_n z^n` and its companion
//! `eta = psi / (1 + psi)` live here, together with the composition,
//! compositional inverse and compositional root used to convolve and divide
//! distributions.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 32;

/// Coefficients with modulus at or below this are treated as zero when a
/// structural condition (vanishing constant term, invertible linear term) is
/// checked.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Tolerance for `branch^n == lambda` in [`TruncatedSeries::compositional_root`].
pub const BRANCH_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    /// `c_0..=c_N`; length is always `order + 1`.
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// The zero series of the given order.
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order + 1] }
    }

    /// The constant series `c`.
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The identity series `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(ONE, 1, order)
    }

    /// `c z^k`, or zero when `k > order`.
    pub fn monomial(c: Complex64, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// Builds a series from its constant term and the coefficients `c_1..=c_N`.
    /// The order is `higher.len()`.
    pub fn new(constant: Complex64, higher: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(higher.len() + 1);
        coeffs.push(constant);
        coeffs.extend_from_slice(higher);
        Self { coeffs }
    }

    /// Builds a series from the full coefficient vector `c_0..=c_N`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn from_dense(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least c_0");
        Self { coeffs }
    }

    /// Builds a series from the real coefficients `c_0..=c_N`.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_dense(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Series whose coefficient `n` is `f(n)`, for `n` in `0..=order`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self { coeffs: (0..=order).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Coefficient of `z^n`; zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    /// The coefficients `c_1..=c_N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs[1..]
    }

    /// The coefficients `c_0..=c_N`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, c: Complex64) {
        self.coeffs[n] = c;
    }

    /// Re-truncates (or zero-extends) to the given order.
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_fn(order, |n| self.coeff(n))
    }

    /// `c * self`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    /// `f(c z)`: coefficient `n` is multiplied by `c^n`.
    pub fn dilate(&self, c: Complex64) -> Self {
        let mut pow = ONE;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| {
                let out = a * pow;
                pow *= c;
                out
            })
            .collect();
        Self { coeffs }
    }

    /// `z f'(z)`.
    pub fn euler_derivative(&self) -> Self {
        Self::from_fn(self.order(), |n| self.coeffs[n] * n as f64)
    }

    /// Cauchy product, truncated at the smaller of the two orders.
    pub fn mul_series(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![ZERO; order + 1];
        for (i, &a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `self^k` in the truncated algebra.
    pub fn powi(&self, k: usize) -> Self {
        let mut acc = Self::constant(ONE, self.order());
        for _ in 0..k {
            acc = acc.mul_series(self);
        }
        acc
    }

    /// Multiplicative inverse `1 / self`; requires an invertible constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() <= STRUCTURAL_TOL {
            return Err(Error::SingularLinearTerm(c0.norm()));
        }
        let inv0 = c0.inv();
        let order = self.order();
        let mut out = vec![ZERO; order + 1];
        out[0] = inv0;
        for n in 1..=order {
            let mut acc = ZERO;
            for i in 1..=n {
                acc += self.coeffs[i] * out[n - i];
            }
            out[n] = -acc * inv0;
        }
        Ok(Self { coeffs: out })
    }

    /// `self / other`; `other` must have an invertible constant term.
    pub fn div_series(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_series(&other.reciprocal()?))
    }

    /// Evaluates the truncated polynomial at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Largest coefficientwise modulus of `self - other` over the common order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Composition `self ∘ inner`, truncated at the smaller order.
    ///
    /// Uses Horner's scheme in the truncated algebra. `inner` must have a zero
    /// constant term; its linear term may vanish.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let g0 = inner.constant_term();
        if g0.norm() > STRUCTURAL_TOL {
            return Err(Error::NonzeroConstantTerm(g0.norm()));
        }
        let order = self.order().min(inner.order());
        let mut g = inner.with_order(order);
        g.coeffs[0] = ZERO;
        Ok(self.compose_unchecked(&g, order))
    }

    fn compose_unchecked(&self, g: &Self, order: usize) -> Self {
        let mut acc = Self::constant(self.coeff(order), order);
        for k in (0..order).rev() {
            // acc * g has valuation >= 1, so only coefficients 1..=order matter.
            acc = acc.mul_series(g);
            acc.coeffs[0] += self.coeffs[k];
        }
        acc
    }

    /// The `n`-fold self-composition `f ∘ f ∘ ... ∘ f` (`n >= 1`).
    pub fn iterate(&self, n: usize) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.norm() > STRUCTURAL_TOL {
            return Err(Error::NonzeroConstantTerm(c0.norm()));
        }
        let mut f = self.clone();
        f.coeffs[0] = ZERO;
        let mut acc = Self::identity(f.order());
        for _ in 0..n {
            acc = f.compose_unchecked(&acc, f.order());
        }
        Ok(acc)
    }

    /// The series `g` with `f ∘ g = g ∘ f = z`, solved order by order.
    pub fn compositional_inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.norm() > STRUCTURAL_TOL {
            return Err(Error::NonzeroConstantTerm(c0.norm()));
        }
        let lambda = self.coeff(1);
        if lambda.norm() <= STRUCTURAL_TOL {
            return Err(Error::SingularLinearTerm(lambda.norm()));
        }
        let order = self.order();
        let inv_lambda = lambda.inv();
        let mut f = self.clone();
        f.coeffs[0] = ZERO;
        let mut g = Self::monomial(inv_lambda, 1, order);
        for n in 2..=order {
            // With g_n = 0, [z^n] f∘g collects every term except lambda * g_n.
            let fg = f.with_order(n).compose_unchecked(&g.with_order(n), n);
            g.coeffs[n] = -fg.coeffs[n] * inv_lambda;
        }
        Ok(g)
    }

    /// The `n`-th compositional root: `g` with `g^{∘n} = f` and `g'(0) = branch`.
    ///
    /// `branch` must be an `n`-th root of `f'(0)`. Given the branch the root is
    /// unique; its coefficients are found by a triangular recursion in which
    /// `[z^k] g^{∘n}` is affine in `g_k` with slope
    /// `sum_{j<n} branch^j * branch^(k (n-1-j))`.
    pub fn compositional_root(&self, n: usize, branch: Complex64) -> Result<Self> {
        assert!(n >= 1, "root index must be positive");
        let c0 = self.constant_term();
        if c0.norm() > STRUCTURAL_TOL {
            return Err(Error::NonzeroConstantTerm(c0.norm()));
        }
        let lambda = self.coeff(1);
        if lambda.norm() <= STRUCTURAL_TOL {
            return Err(Error::ZeroLinearTerm);
        }
        let residual = (branch.powu(n as u32) - lambda).norm();
        if residual > BRANCH_TOL {
            return Err(Error::BadBranch { residual });
        }
        let order = self.order();
        let mut g = Self::monomial(branch, 1, order);
        for k in 2..=order {
            let bk = branch.powu(k as u32);
            let slope: Complex64 = (0..n).map(|j| branch.powu(j as u32) * bk.powu((n - 1 - j) as u32)).sum();
            if slope.norm() <= STRUCTURAL_TOL {
                return Err(Error::Resonance { order: k });
            }
            let gk = g.with_order(k);
            let mut acc = Self::identity(k);
            for _ in 0..n {
                acc = gk.compose_unchecked(&acc, k);
            }
            g.coeffs[k] = (self.coeffs[k] - acc.coeffs[k]) / slope;
        }
        Ok(g)
    }

    /// Writes the series as CSV with columns `n,re,im`, one row per coefficient
    /// `c_0..=c_N`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "re", "im"])?;
        for (n, c) in self.coeffs.iter().enumerate() {
            wtr.write_record([n.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a series written by [`TruncatedSeries::write_csv`]. Missing rows are
    /// zero; the order is the largest `n` present.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str> {
                rec.get(i).map(str::trim).ok_or_else(|| Error::Parse(format!("missing column {i}")))
            };
            let n: usize = field(0)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let re: f64 = field(1)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let im: f64 = field(2)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            entries.push((n, Complex64::new(re, im)));
        }
        let order = entries.iter().map(|&(n, _)| n).max().ok_or_else(|| Error::Parse("empty series".into()))?;
        let mut s = Self::zero(order);
        for (n, c) in entries {
            s.coeffs[n] = c;
        }
        Ok(s)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |n| self.coeffs[n] + rhs.coeffs[n])
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |n| self.coeffs[n] - rhs.coeffs[n])
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.mul_series(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-ONE)
    }
}

/// Moments `m_1..=m_N` of a distribution; `m_0 = 1` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    moments: Vec<Complex64>,
}

impl MomentSequence {
    /// Wraps `m_1..=m_N`.
    pub fn new(moments: Vec<Complex64>) -> Self {
        Self { moments }
    }

    pub fn from_real(moments: &[f64]) -> Self {
        Self::new(moments.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Moments `f(1)..=f(order)`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self::new((1..=order).map(f).collect())
    }

    pub fn order(&self) -> usize {
        self.moments.len()
    }

    /// `m_n`, with `m_0 = 1`. Panics beyond the order.
    pub fn get(&self, n: usize) -> Complex64 {
        if n == 0 {
            ONE
        } else {
            self.moments[n - 1]
        }
    }

    /// The first moment `m_1` (zero for an order-0 sequence).
    pub fn first(&self) -> Complex64 {
        self.moments.first().copied().unwrap_or(ZERO)
    }

    /// `m_1..=m_N`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.moments
    }

    /// Moments of the pushforward under `x -> c x`: `m_n c^n`.
    pub fn dilate(&self, c: Complex64) -> Self {
        let mut pow = ONE;
        Self::new(
            self.moments
                .iter()
                .map(|&m| {
                    pow *= c;
                    m * pow
                })
                .collect(),
        )
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.moments[..order.min(self.order())].to_vec())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.moments.iter().zip(&other.moments).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Writes the moments as CSV with columns `n,re,im` for `n = 1..=N`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "re", "im"])?;
        for (i, m) in self.moments.iter().enumerate() {
            wtr.write_record([(i + 1).to_string(), fmt_f64(m.re), fmt_f64(m.im)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `psi(z) = sum_{n>=1} m_n z^n`.
pub fn psi_from_moments(m: &MomentSequence) -> TruncatedSeries {
    TruncatedSeries::new(ZERO, m.as_slice())
}

/// Reads the moments back off a psi-series.
pub fn moments_from_psi(psi: &TruncatedSeries) -> MomentSequence {
    MomentSequence::new(psi.coeffs().to_vec())
}

/// `eta = psi / (1 + psi)`. The constant term of `psi` is taken to be zero.
pub fn eta_from_psi(psi: &TruncatedSeries) -> TruncatedSeries {
    debug_assert!(psi.constant_term().norm() <= STRUCTURAL_TOL);
    let mut p = psi.clone();
    p.set_coeff(0, ZERO);
    let denom = &TruncatedSeries::constant(ONE, p.order()) + &p;
    // The denominator has unit constant term and is always invertible.
    let mut eta = p.div_series(&denom).expect("1 + psi is invertible");
    eta.set_coeff(0, ZERO);
    eta
}

/// `psi = eta / (1 - eta)`, the inverse of [`eta_from_psi`]. The constant term
/// of `eta` is taken to be zero.
pub fn psi_from_eta(eta: &TruncatedSeries) -> TruncatedSeries {
    debug_assert!(eta.constant_term().norm() <= STRUCTURAL_TOL);
    let mut e = eta.clone();
    e.set_coeff(0, ZERO);
    let denom = &TruncatedSeries::constant(ONE, e.order()) - &e;
    let mut psi = e.div_series(&denom).expect("1 - eta is invertible");
    psi.set_coeff(0, ZERO);
    psi
}

pub fn eta_from_moments(m: &MomentSequence) -> TruncatedSeries {
    eta_from_psi(&psi_from_moments(m))
}

pub fn moments_from_eta(eta: &TruncatedSeries) -> MomentSequence {
    moments_from_psi(&psi_from_eta(eta))
}

/// The `n`-th root of `lambda` on the branch `arg(lambda)/n + 2 pi winding / n`.
/// `winding = 0` is the principal root.
pub fn nth_root(lambda: Complex64, n: usize, winding: i64) -> Complex64 {
    let (r, theta) = lambda.to_polar();
    let angle = (theta + 2.0 * std::f64::consts::PI * winding as f64) / n as f64;
    Complex64::from_polar(r.powf(1.0 / n as f64), angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// `z / (1 - a z)` to the given order.
    fn mobius(a: f64, order: usize) -> TruncatedSeries {
        TruncatedSeries::from_fn(order, |n| if n == 0 { ZERO } else { c(a.powi(n as i32 - 1)) })
    }

    /// Independent Lagrange-inversion oracle on plain coefficient vectors:
    /// `[z^n] g = (1/n) [w^(n-1)] (w / f(w))^n`.
    fn lagrange_inverse(f: &[Complex64], order: usize) -> Vec<Complex64> {
        // h(w) = f(w) / w, then phi = 1 / h.
        let h: Vec<Complex64> = (0..order).map(|i| f.get(i + 1).copied().unwrap_or(ZERO)).collect();
        let mut phi = vec![ZERO; order];
        phi[0] = h[0].inv();
        for n in 1..order {
            let mut acc = ZERO;
            for i in 1..=n {
                acc += h[i] * phi[n - i];
            }
            phi[n] = -acc / h[0];
        }
        let mut out = vec![ZERO; order + 1];
        let mut pow = vec![ZERO; order];
        pow[0] = ONE;
        for n in 1..=order {
            let mut next = vec![ZERO; order];
            for i in 0..order {
                for j in 0..order - i {
                    next[i + j] += pow[i] * phi[j];
                }
            }
            pow = next;
            out[n] = pow[n - 1] / n as f64;
        }
        out
    }

    #[test]
    fn psi_examples() {
        let ones = MomentSequence::from_real(&[1.0; 8]);
        assert_eq!(psi_from_moments(&ones).as_slice(), mobius(1.0, 8).as_slice());

        let zeros = MomentSequence::from_real(&[0.0; 8]);
        assert_eq!(psi_from_moments(&zeros), TruncatedSeries::zero(8));

        let geo = MomentSequence::from_fn(10, |n| c(2f64.powi(n as i32 - 1)));
        assert!(psi_from_moments(&geo).max_abs_diff(&mobius(2.0, 10)) < 1e-12);
    }

    #[test]
    fn eta_examples() {
        // psi = z/(1-2z)  ->  eta = z/(1-z)
        let eta = eta_from_psi(&mobius(2.0, 20));
        assert!(eta.max_abs_diff(&mobius(1.0, 20)) < 1e-12);
        assert_eq!(eta_from_psi(&TruncatedSeries::zero(5)), TruncatedSeries::zero(5));
        // delta_1: eta is the identity
        let eta = eta_from_psi(&mobius(1.0, 16));
        assert!(eta.max_abs_diff(&TruncatedSeries::identity(16)) < 1e-12);
    }

    #[test]
    fn compose_examples() {
        let f = mobius(1.0, 16);
        let fg = f.compose(&f).unwrap();
        assert!(fg.max_abs_diff(&mobius(2.0, 16)) < 1e-12);

        let f = TruncatedSeries::from_real(&[0.0, 0.3, -1.2, 0.7, 2.0, 0.1]);
        assert!(f.compose(&TruncatedSeries::identity(5)).unwrap().max_abs_diff(&f) < 1e-15);

        let z2 = TruncatedSeries::monomial(ONE, 2, 10);
        let z4 = z2.compose(&z2).unwrap();
        assert_eq!(z4, TruncatedSeries::monomial(ONE, 4, 10));
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = mobius(1.0, 4);
        let g = TruncatedSeries::from_real(&[0.5, 1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(f.compose(&g), Err(Error::NonzeroConstantTerm(_))));
    }

    #[test]
    fn inverse_examples() {
        // z/(1+z) -> z/(1-z)
        let f = TruncatedSeries::from_fn(12, |n| if n == 0 { ZERO } else { c((-1f64).powi(n as i32 - 1)) });
        let g = f.compositional_inverse().unwrap();
        assert!(g.max_abs_diff(&mobius(1.0, 12)) < 1e-12);

        let id = TruncatedSeries::identity(7);
        assert!(id.compositional_inverse().unwrap().max_abs_diff(&id) < 1e-15);

        // z/(1+z)^2 -> Catalan numbers, checked against the Lagrange oracle.
        let one_plus_z_sq = TruncatedSeries::from_real(&[1.0, 2.0, 1.0]).with_order(10);
        let f = TruncatedSeries::identity(10).div_series(&one_plus_z_sq).unwrap();
        let g = f.compositional_inverse().unwrap();
        let oracle = lagrange_inverse(f.as_slice(), 10);
        for (n, o) in oracle.iter().enumerate().skip(1) {
            assert!((g.coeff(n) - o).norm() < 1e-9, "n = {n}");
        }
        let expected = [1.0, 2.0, 5.0, 14.0];
        for (n, e) in expected.iter().enumerate() {
            assert!((oracle[n + 1] - c(*e)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_rejects_singular() {
        let f = TruncatedSeries::monomial(ONE, 2, 6);
        assert!(matches!(f.compositional_inverse(), Err(Error::SingularLinearTerm(_))));
    }

    #[test]
    fn root_examples() {
        let r = mobius(1.0, 20).compositional_root(2, ONE).unwrap();
        assert!(r.max_abs_diff(&mobius(0.5, 20)) < 1e-12);

        let id = TruncatedSeries::identity(9);
        for n in 1..5 {
            assert!(id.compositional_root(n, ONE).unwrap().max_abs_diff(&id) < 1e-15);
        }

        let r = mobius(2.0, 20).compositional_root(2, ONE).unwrap();
        assert!(r.max_abs_diff(&mobius(1.0, 20)) < 1e-12);
    }

    #[test]
    fn root_errors() {
        let z2 = TruncatedSeries::monomial(ONE, 2, 6);
        assert_eq!(z2.compositional_root(2, ZERO), Err(Error::ZeroLinearTerm));
        let f = mobius(1.0, 6).scale(c(4.0));
        assert!(matches!(f.compositional_root(2, c(1.0)), Err(Error::BadBranch { .. })));
        assert!(f.compositional_root(2, c(-2.0)).is_ok());
    }

    #[test]
    fn nth_root_branches() {
        let l = Complex64::from_polar(0.25, 1.0);
        let p = nth_root(l, 2, 0);
        assert!((p - Complex64::from_polar(0.5, 0.5)).norm() < 1e-15);
        let q = nth_root(l, 2, 1);
        assert!((q + p).norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let s = TruncatedSeries::from_dense(vec![ZERO, Complex64::new(0.1, -3.0), Complex64::new(1e-300, 7.0)]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,re,im\n0,"));
        assert_eq!(TruncatedSeries::read_csv(&buf[..]).unwrap(), s);
    }

    fn series_strategy(order: usize, zero_constant: bool) -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), order + 1).prop_map(move |v| {
            let mut s = TruncatedSeries::from_dense(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect());
            if zero_constant {
                s.set_coeff(0, ZERO);
            }
            s
        })
    }

    /// Linear term with modulus in `[rmin, rmax)` (argument in `(-3, 3)` unless
    /// `real`), higher terms damped so the compositions stay well scaled.
    fn invertible_strategy(order: usize, rmin: f64, rmax: f64, real: bool) -> impl Strategy<Value = TruncatedSeries> {
        (rmin..rmax, -3.0f64..3.0, series_strategy(order, true)).prop_map(move |(r, th, s)| {
            let mut s = s.dilate(c(0.5));
            s.set_coeff(1, Complex64::from_polar(r, if real { 0.0 } else { th }));
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        /// The tolerance is 1e-12 absolute while the eta coefficients stay below
        /// one, and scales with their running maximum once they grow: coefficients
        /// of `1 / (1 + psi)` can grow geometrically with `n`, and no double
        /// representation of eta then carries 1e-12 absolute information.
        #[test]
        fn eta_psi_round_trip(s in (1usize..=64).prop_flat_map(|n| series_strategy(n, true))) {
            let eta = eta_from_psi(&s);
            let back = psi_from_eta(&eta);
            let mut scale = 1.0f64;
            for n in 0..=s.order() {
                scale = scale.max(eta.coeff(n).norm());
                prop_assert!((back.coeff(n) - s.coeff(n)).norm() < 1e-12 * scale, "n = {}", n);
            }
        }

        #[test]
        fn eta_psi_round_trip_bounded(s in (1usize..=64).prop_flat_map(|n| series_strategy(n, true))) {
            // damped inputs keep eta bounded, so the absolute tolerance applies
            let s = s.dilate(c(0.4));
            let back = psi_from_eta(&eta_from_psi(&s));
            prop_assert!(back.max_abs_diff(&s) < 1e-12);
        }

        #[test]
        fn compose_associative(f in series_strategy(16, false), g in series_strategy(16, true), h in series_strategy(16, true)) {
            let f = f.dilate(c(0.5));
            let g = g.dilate(c(0.5));
            let h = h.dilate(c(0.5));
            let lhs = f.compose(&g).unwrap().compose(&h).unwrap();
            let rhs = f.compose(&g.compose(&h).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }

        #[test]
        fn inverse_is_two_sided(f in invertible_strategy(20, 0.8, 1.25, false)) {
            let g = f.compositional_inverse().unwrap();
            let id = TruncatedSeries::identity(20);
            prop_assert!(f.compose(&g).unwrap().max_abs_diff(&id) < 1e-10);
            prop_assert!(g.compose(&f).unwrap().max_abs_diff(&id) < 1e-10);
        }

        #[test]
        fn root_recomposes(f in invertible_strategy(16, 0.3, 0.8, false), n in 1usize..=4) {
            let branch = nth_root(f.coeff(1), n, 0);
            let g = f.compositional_root(n, branch).unwrap();
            prop_assert!((g.coeff(1) - branch).norm() < 1e-15);
            prop_assert!(g.iterate(n).unwrap().max_abs_diff(&f) < 1e-9);
        }

        #[test]
        fn root_is_rigid(f in invertible_strategy(10, 0.5, 1.5, true), k in 1usize..=10) {
            let g = f.compositional_root(2, nth_root(f.coeff(1), 2, 0)).unwrap();
            let mut bumped = g.clone();
            bumped.set_coeff(k, g.coeff(k) + c(1e-3));
            prop_assert!(bumped.iterate(2).unwrap().max_abs_diff(&f) > 1e-4);
        }
    }
}
