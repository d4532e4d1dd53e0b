//! Flow integration for semigroups of eta-transforms.
//!
//! With `B = a + b` as in [`super::generator`], the two conventions are
//!
//! * `mconv0`: `u' = u b(u)`, `eta_tau(z) = u_tau(e^{a tau} z)`;
//! * `mconv`: `u' = u B(u)`, `eta_tau = u_tau`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::generator::Generator;
use super::ode::{integrate, RkOptions};
use crate::convolution::Operation;
use crate::error::{Error, Result};
use crate::measures::{distance_to_ray, prony_recover, AtomicMeasure, Domain, POINT_TOL};
use crate::series::{moments_from_eta, MomentSequence, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Adaptive Dormand-Prince.
    Rk,
    /// Composition of `w_eps(z) = z exp(eps v(z) / z)`.
    EulerExp,
    /// Both, failing if they disagree.
    CrossCheck,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Rk => "rk",
            Scheme::EulerExp => "euler_exp",
            Scheme::CrossCheck => "crosscheck",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk" => Ok(Scheme::Rk),
            "euler_exp" => Ok(Scheme::EulerExp),
            "crosscheck" => Ok(Scheme::CrossCheck),
            other => Err(Error::Parse(format!("unknown scheme `{other}` (expected rk, euler_exp or crosscheck)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub scheme: Scheme,
    pub convention: Operation,
    pub rk: RkOptions,
    /// Largest step of the exponential Euler composition.
    pub euler_step: f64,
    /// Richardson extrapolation levels applied to the exponential Euler
    /// composition (0 disables it).
    pub richardson_levels: usize,
    /// Largest allowed rk / euler_exp difference in cross-check mode.
    pub crosscheck_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk,
            convention: Operation::Mconv0,
            rk: RkOptions::default(),
            euler_step: 1e-3,
            richardson_levels: 2,
            crosscheck_tol: 1e-6,
        }
    }
}

/// The flow at one starting point and one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowState {
    pub tau: f64,
    pub z: Complex64,
    /// `u_tau(z)`.
    pub u: Complex64,
    /// `eta_tau(z)`.
    pub eta: Complex64,
    /// `e^{a tau}` for `mconv0`, 1 for `mconv`.
    pub rescale: Complex64,
}

fn velocity(g: &Generator, convention: Operation, u: Complex64) -> Complex64 {
    match convention {
        Operation::Mconv0 => u * g.centered(u),
        Operation::Mconv => u * g.full(u),
    }
}

fn in_domain(domain: Domain, start: Complex64, u: Complex64) -> bool {
    match domain {
        // the flow cannot cross the positive axis
        Domain::HalfLine => !(u.re > POINT_TOL && u.im * start.im <= 0.0),
        Domain::Circle => u.norm() < 1.0,
    }
}

fn check_start(domain: Domain, z: Complex64) -> Result<()> {
    let ok = match domain {
        Domain::HalfLine => distance_to_ray(z) > POINT_TOL,
        Domain::Circle => z.norm() < 1.0 - POINT_TOL,
    };
    if ok && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!("{z} is not in the {domain} flow domain")))
    }
}

fn check_taus(taus: &[f64]) -> Result<()> {
    match taus.iter().find(|t| !t.is_finite() || **t < 0.0) {
        Some(t) => Err(Error::Parse(format!("tau = {t} must be finite and nonnegative"))),
        None => Ok(()),
    }
}

/// `u_tau(z)` at each `tau` (any order) with the adaptive scheme.
fn rk_trajectory(g: &Generator, z: Complex64, taus: &[f64], opts: &FlowOptions) -> Result<Vec<Complex64>> {
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&i, &j| taus[i].total_cmp(&taus[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| taus[i]).collect();
    let domain = g.domain();
    let states = integrate(
        |y, dy| dy[0] = velocity(g, opts.convention, y[0]),
        &[z],
        &sorted,
        &opts.rk,
        |y| in_domain(domain, z, y[0]),
    )?;
    let mut out = vec![Complex64::new(0.0, 0.0); taus.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = states[k][0];
    }
    Ok(out)
}

fn euler_compose(g: &Generator, z: Complex64, tau: f64, steps: usize, convention: Operation) -> Result<Complex64> {
    let eps = tau / steps as f64;
    let domain = g.domain();
    let mut w = z;
    for k in 0..steps {
        // v(w) / w = b(w) or B(w); evaluated at w = 0 it is the limit value
        let rate = if w == Complex64::new(0.0, 0.0) {
            match convention {
                Operation::Mconv0 => Complex64::new(0.0, 0.0),
                Operation::Mconv => g.a(),
            }
        } else {
            velocity(g, convention, w) / w
        };
        w *= (rate * eps).exp();
        if !in_domain(domain, z, w) || !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::DomainExit { tau: eps * (k + 1) as f64, detail: format!("euler_exp iterate {w}") });
        }
    }
    Ok(w)
}

/// `u_tau(z)` by exponential Euler composition with Richardson extrapolation
/// over step counts `n, 2n, 4n, ...`.
fn euler_point(g: &Generator, z: Complex64, tau: f64, opts: &FlowOptions) -> Result<Complex64> {
    if tau == 0.0 {
        return Ok(z);
    }
    let base = (tau / opts.euler_step).ceil().max(1.0) as usize;
    // the scheme's global error expands in integer powers of the step
    let mut row: Vec<Complex64> = Vec::new();
    for j in 0..=opts.richardson_levels {
        let mut entry = euler_compose(g, z, tau, base << j, opts.convention)?;
        let mut next = Vec::with_capacity(j + 1);
        next.push(entry);
        for (m, prev) in row.iter().enumerate() {
            let factor = ((2u64 << m) - 1) as f64;
            entry += (entry - prev) / factor;
            next.push(entry);
        }
        row = next;
    }
    Ok(*row.last().expect("at least one level"))
}

fn scheme_values(
    g: &Generator,
    z: Complex64,
    taus: &[f64],
    scheme: Scheme,
    opts: &FlowOptions,
) -> Result<Vec<Complex64>> {
    match scheme {
        Scheme::Rk => rk_trajectory(g, z, taus, opts),
        Scheme::EulerExp => taus.iter().map(|&t| euler_point(g, z, t, opts)).collect(),
        Scheme::CrossCheck => {
            let rk = rk_trajectory(g, z, taus, opts)?;
            let ee: Vec<Complex64> = taus.iter().map(|&t| euler_point(g, z, t, opts)).collect::<Result<_>>()?;
            for ((a, b), &tau) in rk.iter().zip(&ee).zip(taus) {
                let diff = (a - b).norm();
                if diff > opts.crosscheck_tol {
                    return Err(Error::SchemeDisagreement { tau, diff });
                }
            }
            Ok(rk)
        }
    }
}

/// `u_tau(z)` for one starting point at several times.
pub fn flow_point(g: &Generator, z: Complex64, taus: &[f64], opts: &FlowOptions) -> Result<Vec<Complex64>> {
    check_taus(taus)?;
    check_start(g.domain(), z)?;
    scheme_values(g, z, taus, opts.scheme, opts)
}

/// Flow states for every starting point in `z0` and every time in `taus`,
/// ordered by starting point, then time.
pub fn integrate_flow(g: &Generator, z0: &[Complex64], taus: &[f64], opts: &FlowOptions) -> Result<Vec<FlowState>> {
    check_taus(taus)?;
    let a = g.a();
    let mut out = Vec::with_capacity(z0.len() * taus.len());
    for &z in z0 {
        check_start(g.domain(), z)?;
        let u = scheme_values(g, z, taus, opts.scheme, opts)?;
        for (k, &tau) in taus.iter().enumerate() {
            let (eta, rescale) = match opts.convention {
                Operation::Mconv => (u[k], Complex64::new(1.0, 0.0)),
                Operation::Mconv0 => {
                    let rescale = (a * tau).exp();
                    let eta = if a == Complex64::new(0.0, 0.0) {
                        u[k]
                    } else {
                        scheme_values(g, rescale * z, &[tau], opts.scheme, opts)?[0]
                    };
                    (eta, rescale)
                }
            };
            out.push(FlowState { tau, z, u: u[k], eta, rescale });
        }
    }
    Ok(out)
}

/// `eta_tau` as truncated series at each `tau`, from the coefficient ODE
///
/// * `mconv0`: `d eta / d tau = eta b(eta) + a z eta'`;
/// * `mconv`: `d eta / d tau = eta (a + b(eta))`.
pub fn series_flow(
    g: &Generator,
    taus: &[f64],
    order: usize,
    convention: Operation,
    rk: &RkOptions,
) -> Result<Vec<TruncatedSeries>> {
    check_taus(taus)?;
    let a = g.a();
    g.centered_series(&TruncatedSeries::identity(order))?;
    let mut idx: Vec<usize> = (0..taus.len()).collect();
    idx.sort_by(|&i, &j| taus[i].total_cmp(&taus[j]));
    let sorted: Vec<f64> = idx.iter().map(|&i| taus[i]).collect();
    let opts = RkOptions { rel_tol: rk.abs_tol, ..*rk };
    let start = TruncatedSeries::identity(order);
    let states = integrate(
        |y, dy| {
            let eta = TruncatedSeries::from_dense(y.to_vec());
            let b = g.centered_series(&eta).expect("series generator");
            let mut rate = eta.mul_series(&b);
            match convention {
                Operation::Mconv0 => rate = &rate + &eta.euler_derivative().scale(a),
                Operation::Mconv => rate = &rate + &eta.scale(a),
            }
            dy.copy_from_slice(rate.as_slice());
            dy[0] = Complex64::new(0.0, 0.0);
        },
        start.as_slice(),
        &sorted,
        &opts,
        |_| true,
    )?;
    let mut out = vec![TruncatedSeries::zero(order); taus.len()];
    for (k, &i) in idx.iter().enumerate() {
        out[i] = TruncatedSeries::from_dense(states[k].clone());
    }
    Ok(out)
}

/// One member of a semigroup.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupMember {
    pub tau: f64,
    pub eta: TruncatedSeries,
    pub moments: MomentSequence,
    /// Atomic identification, when the moments come from at most `max_atoms` atoms.
    pub measure: Option<AtomicMeasure>,
}

/// The measures `mu_tau` from the series-level flow, with an attempt at
/// identifying each as an atomic measure with at most `max_atoms` atoms.
pub fn semigroup_measures(
    g: &Generator,
    taus: &[f64],
    order: usize,
    convention: Operation,
    rk: &RkOptions,
    max_atoms: usize,
) -> Result<Vec<SemigroupMember>> {
    let etas = series_flow(g, taus, order, convention, rk)?;
    let k = max_atoms.min(order / 2);
    Ok(taus
        .iter()
        .zip(etas)
        .map(|(&tau, eta)| {
            let moments = moments_from_eta(&eta);
            let measure = if k > 0 { prony_recover(&moments, k, g.domain()).ok() } else { None };
            SemigroupMember { tau, eta, moments, measure }
        })
        .collect())
}
