use std::f64::consts::PI;

use num_complex::Complex64;

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_RADIUS: f64 = 0.99;

/// Builds the Cauchy transform of a half-line measure from its psi-transform:
/// `G(w) = (psi(1/w) + 1) / w`.
pub fn cauchy_from_psi<F>(psi: F) -> impl Fn(Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    move |w| (psi(1.0 / w) + 1.0) / w
}

/// `d(t) = -Im G(t + i eps) / pi` on each grid point.
///
/// # Panics
/// If `epsilon` is not positive.
pub fn stieltjes_density<F>(cauchy: F, grid: &[f64], epsilon: f64) -> Vec<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    assert!(epsilon > 0.0, "epsilon must be positive");
    grid.iter().map(|&t| -cauchy(Complex64::new(t, epsilon)).im / PI).collect()
}

/// `d(theta) = Re(1 + 2 psi(r e^{-i theta})) / (2 pi)`, the Poisson-smoothed density
/// with respect to `d theta`.
///
/// # Panics
/// If `r` is not in `(0, 1)`.
pub fn poisson_density<F>(mut psi: F, angles: &[f64], r: f64) -> Vec<f64>
where
    F: FnMut(Complex64) -> Complex64,
{
    assert!(r > 0.0 && r < 1.0, "radius must lie in (0, 1)");
    angles.iter().map(|&theta| (1.0 + 2.0 * psi(Complex64::from_polar(r, -theta))).re / (2.0 * PI)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{AtomicMeasure, Measure};

    #[test]
    fn zero_transform_gives_zero_density() {
        let d = stieltjes_density(|_| Complex64::new(0.0, 0.0), &[0.0, 0.5, 1.0], 1e-3);
        assert_eq!(d, vec![0.0; 3]);
    }

    #[test]
    fn haar_is_flat() {
        let angles: Vec<f64> = (0..16).map(|k| k as f64 * 0.4).collect();
        let d = Measure::Haar.poisson_density(&angles, 0.9).unwrap();
        for v in d {
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn stieltjes_of_point_mass_is_lorentzian() {
        let mu = AtomicMeasure::dirac(crate::measures::Domain::HalfLine, 1.0).unwrap();
        let eps = 0.01;
        let grid = [0.5, 1.0, 1.2];
        let d = mu.stieltjes_density(&grid, eps).unwrap();
        for (t, v) in grid.iter().zip(d) {
            let expected = eps / PI / ((t - 1.0) * (t - 1.0) + eps * eps);
            assert!((v - expected).abs() < 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn psi_route_matches_direct_cauchy() {
        let mu = AtomicMeasure::half_line([(0.3, 0.4), (1.1, 0.6)]).unwrap();
        let g = cauchy_from_psi(|z| mu.psi_at(z).unwrap());
        let grid: Vec<f64> = (0..30).map(|k| k as f64 * 0.05).collect();
        let a = stieltjes_density(&g, &grid, 1e-2);
        let b = mu.stieltjes_density(&grid, 1e-2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8 * y.abs().max(1.0));
        }
    }

    #[test]
    fn poisson_of_point_mass() {
        let mu: Measure = AtomicMeasure::circle([(1.0, 1.0)]).unwrap().into();
        let r = 0.8;
        let angles = [0.0, 1.0, 2.5];
        let d = mu.poisson_density(&angles, r).unwrap();
        for (theta, v) in angles.iter().zip(d) {
            let kernel = (1.0 - r * r) / (1.0 - 2.0 * r * (theta - 1.0).cos() + r * r) / (2.0 * PI);
            assert!((v - kernel).abs() < 1e-12);
        }
    }

    #[test]
    fn riemann_sum_of_poisson_density_is_one() {
        let mu: Measure = AtomicMeasure::circle([(0.2, 0.3), (3.0, 0.7)]).unwrap().into();
        let n = 2000;
        let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let d = mu.poisson_density(&angles, 0.95).unwrap();
        let total: f64 = d.iter().sum::<f64>() * 2.0 * PI / n as f64;
        assert!((total - 1.0).abs() < 1e-10);
    }
}
