//! Seeded random draws of test objects.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measures::{Atom, AtomicMeasure, Domain};

pub const DEFAULT_SEED: u64 = 20_240_611;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the closed disk of radius `r`.
pub fn disk_point<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU))
}

/// Polynomial `u` of degree at most 3 with `|u(0)|` in `[0.5, 1]` and higher
/// coefficients of modulus at most 0.3.
pub fn shift_poly<R: Rng>(rng: &mut R) -> Vec<Complex64> {
    let deg = rng.random_range(0..=3);
    let mut u = vec![Complex64::from_polar(rng.random_range(0.5..=1.0), rng.random_range(0.0..TAU))];
    for _ in 0..deg {
        u.push(disk_point(rng, 0.3));
    }
    u
}

/// Point of the slit plane with `|z|` in `[0.1, 3]` and `arg z` in `[pi/6, 11 pi/6]`.
pub fn omega_point<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.1..=3.0), rng.random_range(PI / 6.0..=11.0 * PI / 6.0))
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Circle measure with `2..=4` atoms.
pub fn circle_measure<R: Rng>(rng: &mut R) -> AtomicMeasure {
    let k = rng.random_range(2..=4);
    let weights = normalized((0..k).map(|_| rng.random_range(0.1..1.0)).collect());
    let atoms = weights.into_iter().map(|w| Atom::new(rng.random_range(0.0..TAU), w));
    AtomicMeasure::new(Domain::Circle, atoms).expect("valid circle measure")
}

/// Circle measure with vanishing first moment: a mixture of randomly rotated
/// regular polygons with 2, 3 or 5 vertices.
pub fn centered_circle_measure<R: Rng>(rng: &mut R) -> AtomicMeasure {
    let parts = rng.random_range(1..=3);
    let mix = normalized((0..parts).map(|_| rng.random_range(0.2..1.0)).collect());
    let mut atoms = Vec::new();
    for w in mix {
        let p = [2usize, 3, 5][rng.random_range(0..3)];
        let phase = rng.random_range(0.0..TAU);
        for j in 0..p {
            atoms.push(Atom::new(phase + TAU * j as f64 / p as f64, w / p as f64));
        }
    }
    AtomicMeasure::new(Domain::Circle, atoms).expect("valid circle measure")
}

/// Half-line measure with `2..=4` atoms in `[0, 3]`, at least one in `[0, 1]`
/// and one in `[1, 3]`.
pub fn straddling_half_line_measure<R: Rng>(rng: &mut R) -> AtomicMeasure {
    let k = rng.random_range(2..=4);
    let weights = normalized((0..k).map(|_| rng.random_range(0.1..1.0)).collect());
    let atoms = weights.into_iter().enumerate().map(|(j, w)| {
        let pos = match j {
            0 => rng.random_range(0.0..=1.0),
            1 => rng.random_range(1.0..=3.0),
            _ => rng.random_range(0.0..=3.0),
        };
        Atom::new(pos, w)
    });
    AtomicMeasure::new(Domain::HalfLine, atoms).expect("valid half-line measure")
}
