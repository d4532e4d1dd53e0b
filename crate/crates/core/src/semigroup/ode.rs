//! Adaptive Dormand-Prince 5(4) integration of autonomous complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RkOptions {
    /// Per-step absolute error tolerance.
    pub abs_tol: f64,
    /// Per-step relative error tolerance, added to `abs_tol` componentwise.
    pub rel_tol: f64,
    pub max_step: f64,
    /// Hard cap on attempted steps per trajectory.
    pub max_steps: usize,
    /// Step sizes below this abort the integration.
    pub min_step: f64,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_step: 1e-2, max_steps: 10_000_000, min_step: 1e-14 }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates `y' = f(y)` from `tau = 0` and returns `y` at each checkpoint.
///
/// `checkpoints` must be nonnegative and nondecreasing. Trial steps for which
/// `in_domain` fails are rejected and retried with half the step.
pub fn integrate<F, D>(
    mut f: F,
    y0: &[Complex64],
    checkpoints: &[f64],
    opts: &RkOptions,
    in_domain: D,
) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
    D: Fn(&[Complex64]) -> bool,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0f64;
    let mut h = opts.max_step;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut k = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y5 = vec![Complex64::new(0.0, 0.0); n];

    for &target in checkpoints {
        assert!(target >= t, "checkpoints must be nondecreasing");
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepLimit(opts.max_steps));
            }
            let remaining = target - t;
            let step = h.min(opts.max_step).min(remaining);
            let last = step == remaining;

            f(&y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        acc += k[j][i] * (a * step);
                    }
                    stage[i] = acc;
                }
                f(&stage, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..n {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += k[s][i] * (B5[s] * step);
                    lo += k[s][i] * (B4[s] * step);
                }
                y5[i] = hi;
                let scale = 1.0 + opts.rel_tol / opts.abs_tol * y[i].norm().max(hi.norm());
                err = err.max((hi - lo).norm() / scale);
            }
            let finite = y5.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && err.is_finite();
            if !finite || !in_domain(&y5) {
                h = step * 0.5;
                if h < opts.min_step {
                    return Err(Error::DomainExit {
                        tau: t,
                        detail: "no admissible step keeps the flow in its domain".into(),
                    });
                }
                continue;
            }
            if err <= opts.abs_tol {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y5);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (opts.abs_tol / err).powf(0.2)).clamp(0.2, 5.0) };
            if err > opts.abs_tol || !last {
                h = step * factor;
            }
            if h < opts.min_step {
                return Err(Error::StepLimit(steps));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
