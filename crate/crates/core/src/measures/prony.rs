//! Recovery of a finitely atomic measure from its moments.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Atom, AtomicMeasure, Domain};
use crate::error::{Error, Result};
use crate::series::MomentSequence;

/// Singular values below this fraction of the largest count as zero when
/// computing the numerical rank of the Hankel matrix.
pub const HANKEL_RANK_TOL: f64 = 1e-8;
/// Tolerance for domain membership, weight positivity and moment reproduction.
const RECOVERY_TOL: f64 = 1e-8;

/// Recovers a measure with at most `k` atoms from `m_1..m_{2k}` by Prony's method.
///
/// The number of atoms is the numerical rank `r` of the Hankel matrix
/// `(m_{i+j})_{0 <= i, j <= k}`; full rank `k + 1` means the moments do not come
/// from `k` atoms and yields [`Error::RankMismatch`].
pub fn prony_recover(m: &MomentSequence, k: usize, domain: Domain) -> Result<AtomicMeasure> {
    if k == 0 {
        return Err(Error::RankMismatch("k must be positive".into()));
    }
    if m.order() < 2 * k {
        return Err(Error::RankMismatch(format!("need {} moments, got {}", 2 * k, m.order())));
    }
    let hankel = DMatrix::from_fn(k + 1, k + 1, |i, j| m.get(i + j));
    let sv = hankel.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > HANKEL_RANK_TOL * smax).count();
    if rank > k {
        return Err(Error::RankMismatch(format!("Hankel matrix of size {} has full numerical rank", k + 1)));
    }
    let r = rank.max(1);

    // sum_{j<r} c_j m_{i+j} = -m_{i+r}, for every i with i + r <= 2k
    let rows = 2 * k - r + 1;
    let a = DMatrix::from_fn(rows, r, |i, j| m.get(i + j));
    let b = DMatrix::from_fn(rows, 1, |i, _| -m.get(i + r));
    let coeffs = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::RankMismatch(e.to_string()))?;
    let c: Vec<Complex64> = coeffs.iter().copied().collect();

    let mut roots = polynomial_roots(&c)?;
    for x in &mut roots {
        *x = polish_root(&c, *x);
    }

    let v = DMatrix::from_fn(2 * k + 1, r, |n, j| roots[j].powu(n as u32));
    let rhs = DMatrix::from_fn(2 * k + 1, 1, |n, _| m.get(n));
    let weights = v.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::RankMismatch(e.to_string()))?;

    for n in 1..=2 * k {
        let fit: Complex64 = roots.iter().zip(weights.iter()).map(|(x, w)| w * x.powu(n as u32)).sum();
        let target = m.get(n);
        if (fit - target).norm() > RECOVERY_TOL * target.norm().max(1.0) {
            return Err(Error::RankMismatch(format!("recovered atoms miss moment {n} by {:e}", (fit - target).norm())));
        }
    }

    let mut atoms = Vec::with_capacity(r);
    for (x, w) in roots.iter().zip(weights.iter()) {
        if w.im.abs() > RECOVERY_TOL || w.re <= RECOVERY_TOL {
            return Err(Error::DomainViolation(format!("weight {w} is not positive")));
        }
        let position = match domain {
            Domain::HalfLine => {
                if x.im.abs() > RECOVERY_TOL * x.norm().max(1.0) || x.re < -RECOVERY_TOL {
                    return Err(Error::DomainViolation(format!("atom {x} is not in [0, inf)")));
                }
                x.re.max(0.0)
            }
            Domain::Circle => {
                if (x.norm() - 1.0).abs() > RECOVERY_TOL {
                    return Err(Error::DomainViolation(format!("atom {x} is not on the unit circle")));
                }
                x.arg()
            }
        };
        atoms.push(Atom::new(position, w.re));
    }
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() > RECOVERY_TOL {
        return Err(Error::DomainViolation(format!("weights sum to {total}")));
    }
    for a in &mut atoms {
        a.weight /= total;
    }
    AtomicMeasure::new(domain, atoms)
}

/// Roots of `x^r + c_{r-1} x^{r-1} + ... + c_0` from the companion matrix.
fn polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let r = c.len();
    if r == 1 {
        return Ok(vec![-c[0]]);
    }
    let companion = DMatrix::from_fn(r, r, |i, j| {
        if j == r - 1 {
            -c[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    companion
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::RankMismatch("eigenvalue iteration did not converge".into()))
}

fn polish_root(c: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..3 {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &cj in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + cj;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;
    use std::f64::consts::PI;

    #[test]
    fn recovers_two_point_half_line() {
        let mu = AtomicMeasure::half_line([(0.0, 0.5), (2.0, 0.5)]).unwrap();
        let got = prony_recover(&mu.moments(8), 2, Domain::HalfLine).unwrap();
        assert_eq!(got.atoms().len(), 2);
        assert!(got.atoms()[0].position.abs() < 1e-9);
        assert!((got.atoms()[1].position - 2.0).abs() < 1e-9);
        assert!((got.atoms()[0].weight - 0.5).abs() < 1e-9);
    }

    #[test]
    fn recovers_with_fewer_atoms_than_k() {
        let mu = AtomicMeasure::half_line([(1.5, 1.0)]).unwrap();
        let got = prony_recover(&mu.moments(10), 4, Domain::HalfLine).unwrap();
        assert_eq!(got.atoms().len(), 1);
        assert!((got.atoms()[0].position - 1.5).abs() < 1e-9);
    }

    #[test]
    fn recovers_circle_atoms() {
        let mu = AtomicMeasure::circle([(0.4, 0.2), (2.0, 0.3), (5.5, 0.5)]).unwrap();
        let got = prony_recover(&mu.moments(12), 3, Domain::Circle).unwrap();
        for (a, b) in got.atoms().iter().zip(mu.atoms()) {
            assert!((a.position - b.position).abs() < 1e-8);
            assert!((a.weight - b.weight).abs() < 1e-8);
        }
    }

    #[test]
    fn full_rank_is_rejected() {
        let mu = AtomicMeasure::half_line([(0.2, 0.25), (0.9, 0.25), (1.6, 0.5)]).unwrap();
        assert!(matches!(prony_recover(&mu.moments(8), 2, Domain::HalfLine), Err(Error::RankMismatch(_))));
    }

    #[test]
    fn haar_moments_are_not_atomic() {
        let m = Measure::Haar.moments(8);
        assert!(matches!(prony_recover(&m, 3, Domain::Circle), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn negative_atom_is_a_domain_violation() {
        // moments of (delta_{-1} + delta_1) / 2
        let m = MomentSequence::from_fn(8, |n| Complex64::new(if n % 2 == 0 { 1.0 } else { 0.0 }, 0.0));
        assert!(matches!(prony_recover(&m, 2, Domain::HalfLine), Err(Error::DomainViolation(_))));
        // the same moments are a valid circle measure
        let got = prony_recover(&m, 2, Domain::Circle).unwrap();
        assert!((got.atoms()[1].position - PI).abs() < 1e-9);
    }
}
