//! Finite-dimensional realization of monotonically independent variables.
//!
//! On `H = C^d` with basis `e_0..e_{d-1}`, `s` is the shift `e_j -> e_{j+1}` and
//! `p` projects onto `e_0`. A variable `x = (1 + s) u(s*)` has distribution with
//! `psi_x` equal to the compositional inverse of `z / ((1 + z) u(z))`. On
//! `H ⊗ H` (index `i d + j` for `e_i ⊗ e_j`) the pair
//!
//! ```text
//! x1 = c1 ⊗ (1 - p) + X1 ⊗ p,    x2 = 1 ⊗ X2
//! ```
//!
//! makes `x1 - c1` and `x2 - c2` monotonically independent in the vector state
//! at `e_0 ⊗ e_0`. Every operator raises each tensor level by at most one, so a
//! word of total length `L` is computed exactly once `d >= L + 1`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, STRUCTURAL_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The `d x d` shift with ones on the first subdiagonal.
pub fn build_shift(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |i, j| if i == j + 1 { ONE } else { ZERO })
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` entries; duplicates add up.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, v) in entries {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n} x {n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != ZERO {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), entries)
    }

    /// `a ⊗ b` with index `i * dim(b) + j`.
    pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Self {
        let (da, db) = (a.nrows(), b.nrows());
        let mut entries = Vec::new();
        for i in 0..da {
            for k in 0..da {
                let aik = a[(i, k)];
                if aik == ZERO {
                    continue;
                }
                for j in 0..db {
                    for l in 0..db {
                        let v = b[(j, l)];
                        if v != ZERO {
                            entries.push((i * db + j, k * db + l, aik * v));
                        }
                    }
                }
            }
        }
        Self::from_triplets(da * db, entries)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut entries = self.triplets();
        entries.extend(other.triplets());
        Self::from_triplets(self.n, entries)
    }

    /// `self + c * identity`.
    pub fn shift_diagonal(&self, c: Complex64) -> Self {
        let mut entries = self.triplets();
        entries.extend((0..self.n).map(|i| (i, i, c)));
        Self::from_triplets(self.n, entries)
    }

    fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.vals.len());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((r, self.cols[k], self.vals[k]));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

/// `x = (1 + s) u(s*)` with centering constant `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftPolyVariable {
    u: Vec<Complex64>,
    c: Complex64,
}

impl ShiftPolyVariable {
    /// `u` lists polynomial coefficients from the constant term up.
    pub fn new(u: Vec<Complex64>, c: Complex64) -> Result<Self> {
        match u.first() {
            Some(u0) if u0.norm() > STRUCTURAL_TOL => Ok(Self { u, c }),
            _ => Err(Error::InvalidVariable("u(0) must be nonzero".into())),
        }
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// The `d x d` truncation of `(1 + s) u(s*)`.
    pub fn operator(&self, d: usize) -> DMatrix<Complex64> {
        let s = build_shift(d);
        let st = s.adjoint();
        let mut u = DMatrix::from_element(d, d, ZERO);
        let mut pow = DMatrix::<Complex64>::identity(d, d);
        for &coeff in &self.u {
            u += &pow * coeff;
            pow = &pow * &st;
        }
        (DMatrix::<Complex64>::identity(d, d) + s) * u
    }

    /// `phi(x^n)` for `n = 1..=order` in the single-variable model.
    pub fn moments(&self, order: usize, d: usize) -> Result<Vec<Complex64>> {
        if d < order + 1 {
            return Err(Error::TruncationExceeded { order, needed: order + 1, dim: d });
        }
        let x = SparseMatrix::from_dense(&self.operator(d));
        let mut v = vec![ZERO; d];
        v[0] = ONE;
        let mut out = Vec::with_capacity(order);
        for _ in 0..order {
            v = x.matvec(&v);
            out.push(v[0]);
        }
        Ok(out)
    }
}

/// `psi_x` for `x = (1 + s) u(s*)` computed without the operator model, as
/// the compositional inverse of `z / ((1 + z) u(z))`.
pub fn shift_poly_psi(u: &[Complex64], order: usize) -> Result<TruncatedSeries> {
    if u.first().is_none_or(|u0| u0.norm() <= STRUCTURAL_TOL) {
        return Err(Error::InvalidVariable("u(0) must be nonzero".into()));
    }
    let one_plus_z = TruncatedSeries::from_fn(order, |k| if k <= 1 { ONE } else { ZERO });
    let useries = TruncatedSeries::from_fn(order, |k| u.get(k).copied().unwrap_or(ZERO));
    TruncatedSeries::identity(order).div_series(&one_plus_z.mul_series(&useries))?.compositional_inverse()
}

/// Operators on `H ⊗ H` and the vector state at `e_0 ⊗ e_0`.
#[derive(Clone, Debug)]
pub struct OperatorScene {
    dim: usize,
    ops: BTreeMap<String, SparseMatrix>,
    state: usize,
}

/// Names of the operators registered by [`realize_pair`].
pub const X1: &str = "x1";
pub const X2: &str = "x2";
/// `x1 - c1` and `x2 - c2`.
pub const X1_CENTERED: &str = "x1c";
pub const X2_CENTERED: &str = "x2c";

/// Builds the pair `x1 = c1 ⊗ (1 - p) + X1 ⊗ p`, `x2 = 1 ⊗ X2`.
pub fn realize_pair(v1: &ShiftPolyVariable, v2: &ShiftPolyVariable, d: usize) -> Result<OperatorScene> {
    if d < 2 {
        return Err(Error::InvalidVariable(format!("dimension {d} is below 2")));
    }
    let id = DMatrix::<Complex64>::identity(d, d);
    let mut p = DMatrix::from_element(d, d, ZERO);
    p[(0, 0)] = ONE;
    let x1_op = v1.operator(d);
    let x1c = SparseMatrix::kron(&(&x1_op - &id * v1.c), &p);
    let x2c = SparseMatrix::kron(&id, &(v2.operator(d) - &id * v2.c));
    let x1 = x1c.shift_diagonal(v1.c);
    let x2 = x2c.shift_diagonal(v2.c);
    let mut ops = BTreeMap::new();
    ops.insert(X1.to_string(), x1);
    ops.insert(X2.to_string(), x2);
    ops.insert(X1_CENTERED.to_string(), x1c);
    ops.insert(X2_CENTERED.to_string(), x2c);
    Ok(OperatorScene { dim: d, ops, state: 0 })
}

/// Smallest `d` for which words of total length `len` are computed exactly.
pub fn required_dim(len: usize) -> usize {
    len + 1
}

impl OperatorScene {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn op(&self, name: &str) -> Result<&SparseMatrix> {
        self.ops.get(name).ok_or_else(|| Error::UnknownOperator(name.to_string()))
    }

    /// Registers an additional operator on `H ⊗ H`.
    pub fn insert(&mut self, name: &str, op: SparseMatrix) -> Result<()> {
        if op.dim() != self.dim * self.dim {
            return Err(Error::InvalidVariable(format!(
                "operator has dimension {}, scene needs {}",
                op.dim(),
                self.dim * self.dim
            )));
        }
        self.ops.insert(name.to_string(), op);
        Ok(())
    }

    pub fn state_vector(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim * self.dim];
        v[self.state] = ONE;
        v
    }

    /// Applies the product `w_0 w_1 ... w_k` to `v` (rightmost factor first).
    pub fn apply_word(&self, word: &[&str], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = v.to_vec();
        for name in word.iter().rev() {
            v = self.op(name)?.matvec(&v);
        }
        Ok(v)
    }

    /// `phi(w)` for a single product of named operators.
    pub fn phi(&self, word: &[&str]) -> Result<Complex64> {
        Ok(self.apply_word(word, &self.state_vector())?[self.state])
    }

    /// `phi(w^n)` for `n = 1..=order`.
    pub fn oracle_moments(&self, word: &[&str], order: usize) -> Result<Vec<Complex64>> {
        for name in word {
            self.op(name)?;
        }
        let needed = required_dim(word.len() * order);
        if self.dim < needed {
            return Err(Error::TruncationExceeded { order, needed, dim: self.dim });
        }
        let mut v = self.state_vector();
        let mut out = Vec::with_capacity(order);
        for _ in 0..order {
            if word.is_empty() {
                out.push(ONE);
                continue;
            }
            v = self.apply_word(word, &v)?;
            out.push(v[self.state]);
        }
        Ok(out)
    }

    /// `p(A) v = sum_k coeffs[k] A^{k+1} v` for a polynomial without constant term.
    fn apply_poly(&self, name: &str, coeffs: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let a = self.op(name)?;
        let mut acc = vec![ZERO; v.len()];
        for &c in coeffs.iter().rev() {
            for (x, y) in acc.iter_mut().zip(v) {
                *x += c * y;
            }
            acc = a.matvec(&acc);
        }
        Ok(acc)
    }
}

/// Maximum residuals of the monotone independence identities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomReport {
    pub trials: usize,
    /// `x1 x2 y1 = phi(x2) x1 y1` applied to sampled basis vectors.
    pub operator_identity: f64,
    /// `phi(x2 x1 y2) = phi(x2) phi(x1) phi(y2)`.
    pub scalar_identity: f64,
    /// `phi(x2 x1 y2) - phi(x1 y2 x2) = phi(x1) [phi(x2) phi(y2) - phi(x2 y2)]`.
    pub trace_remnant: f64,
    /// Pairwise differences of `phi((x1^2 x2)^n)`, `phi((x1 x2 x1)^n)`, `phi((x2 x1^2)^n)`.
    pub commuting_triple: f64,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.operator_identity.max(self.scalar_identity).max(self.trace_remnant).max(self.commuting_triple)
    }
}

/// Highest power checked in the commuting-triple identity.
const TRIPLE_ORDER: usize = 6;
const BASIS_SAMPLES: usize = 8;

/// Checks the monotone independence identities on random polynomials
/// (degree 1 to 3, no constant term) in `x1 - c1` and in `x2 - c2`.
pub fn check_monotone_axioms<R: Rng>(scene: &OperatorScene, trials: usize, rng: &mut R) -> Result<AxiomReport> {
    let mut report = AxiomReport { trials, ..AxiomReport::default() };
    let n = scene.dim * scene.dim;
    let random_poly = |rng: &mut R| -> Vec<Complex64> {
        let deg = rng.random_range(1..=3);
        (0..deg).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    };
    for _ in 0..trials {
        let a1 = random_poly(rng);
        let b1 = random_poly(rng);
        let a2 = random_poly(rng);
        let b2 = random_poly(rng);
        let phi_poly = |name: &str, p: &[Complex64]| -> Result<Complex64> {
            Ok(scene.apply_poly(name, p, &scene.state_vector())?[scene.state])
        };
        let phi_a2 = phi_poly(X2_CENTERED, &a2)?;
        let phi_a1 = phi_poly(X1_CENTERED, &a1)?;
        let phi_b2 = phi_poly(X2_CENTERED, &b2)?;

        for _ in 0..BASIS_SAMPLES {
            let mut e = vec![ZERO; n];
            e[rng.random_range(0..n)] = ONE;
            let y1e = scene.apply_poly(X1_CENTERED, &b1, &e)?;
            let rhs = scene.apply_poly(X1_CENTERED, &a1, &y1e)?;
            let lhs = scene.apply_poly(X1_CENTERED, &a1, &scene.apply_poly(X2_CENTERED, &a2, &y1e)?)?;
            let res = lhs.iter().zip(&rhs).map(|(l, r)| (l - phi_a2 * r).norm()).fold(0.0, f64::max);
            report.operator_identity = report.operator_identity.max(res);
        }

        let xi = scene.state_vector();
        let y2 = scene.apply_poly(X2_CENTERED, &b2, &xi)?;
        let x1y2 = scene.apply_poly(X1_CENTERED, &a1, &y2)?;
        let x2x1y2 = scene.apply_poly(X2_CENTERED, &a2, &x1y2)?[scene.state];
        report.scalar_identity = report.scalar_identity.max((x2x1y2 - phi_a2 * phi_a1 * phi_b2).norm());

        let x2 = scene.apply_poly(X2_CENTERED, &a2, &xi)?;
        let y2x2 = scene.apply_poly(X2_CENTERED, &b2, &x2)?;
        let x1y2x2 = scene.apply_poly(X1_CENTERED, &a1, &y2x2)?[scene.state];
        let phi_x2y2 = scene.apply_poly(X2_CENTERED, &a2, &y2)?[scene.state];
        let remnant = (x2x1y2 - x1y2x2) - phi_a1 * (phi_a2 * phi_b2 - phi_x2y2);
        report.trace_remnant = report.trace_remnant.max(remnant.norm());
    }

    if scene.dim >= required_dim(3 * TRIPLE_ORDER) {
        let a = scene.oracle_moments(&[X1, X1, X2], TRIPLE_ORDER)?;
        let b = scene.oracle_moments(&[X1, X2, X1], TRIPLE_ORDER)?;
        let c = scene.oracle_moments(&[X2, X1, X1], TRIPLE_ORDER)?;
        for k in 0..TRIPLE_ORDER {
            let scale = a[k].norm().max(1.0);
            let r = ((a[k] - b[k]).norm()).max((b[k] - c[k]).norm()).max((a[k] - c[k]).norm()) / scale;
            report.commuting_triple = report.commuting_triple.max(r);
        }
    }
    Ok(report)
}
