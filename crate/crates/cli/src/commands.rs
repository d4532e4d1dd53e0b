use std::cell::RefCell;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use monomul_core::acceptance::run_all;
use monomul_core::convolution::{self, convolve_pair, eval_convolved_eta};
use monomul_core::io::{fmt_f64, measure_to_json, parse_complex, parse_complex_list, read_generator, read_measure};
use monomul_core::measures::{cauchy_from_psi, poisson_density, prony_recover, stieltjes_density};
use monomul_core::operator_model::{realize_pair, shift_poly_psi, ShiftPolyVariable, X1, X2};
use monomul_core::semigroup::{divisibility_chain, integrate_flow, semigroup_measures, BranchPolicy, FlowOptions};
use monomul_core::series::moments_from_psi;
use monomul_core::{Complex64, ConvolutionPair, Domain, Error, Measure, MomentSequence, Operation, TransformPoint};

use crate::{ConvolveArgs, ConvolveOp, DensityArgs, DivideArgs, Failure, FlowArgs, Global, OracleArgs};

type Outcome = Result<(), Failure>;

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| with_path(e.into(), p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    Ok(csv::Writer::from_writer(sink(path)?))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, format!("{text}\n")).map_err(|e| with_path(e.into(), path))
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Outcome {
    w.flush().map_err(Error::from)?;
    Ok(())
}

/// `RE`, `RE,IM` or `RE:IM`.
fn parse_scalar(s: &str) -> Result<Complex64, Failure> {
    Ok(parse_complex(&s.replacen(',', ":", 1))?)
}

fn parse_reals(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::input(format!("`{t}` is not a number"))))
        .collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(Failure::input(format!("grid `{s}` is not START:END:COUNT")));
    };
    let bad = || Failure::input(format!("grid `{s}` is not START:END:COUNT"));
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

fn load_measure(path: &Path) -> Result<Measure, Failure> {
    read_measure(path).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn identify(m: &MomentSequence, domain: Domain, max_atoms: usize) -> Result<Measure, Error> {
    let k = max_atoms.min(m.order() / 2);
    if k == 0 {
        return Err(Error::RankMismatch("too few moments to identify a measure".into()));
    }
    prony_recover(m, k, domain).map(Measure::Atomic)
}

fn warn(kind: &str, message: &str) {
    let body = serde_json::json!({ "warning": kind, "message": message });
    let _ = writeln!(io::stderr(), "{body}");
}

pub fn convolve(g: &Global, args: ConvolveArgs) -> Outcome {
    let lhs = load_measure(&args.lhs)?;
    let rhs = load_measure(&args.rhs)?;
    if lhs.domain() != rhs.domain() {
        return Err(Error::DomainMismatch(format!(
            "lhs is a {} measure, rhs a {} measure",
            lhs.domain(),
            rhs.domain()
        ))
        .into());
    }
    if !matches!(args.op, ConvolveOp::Pair) && (args.c1.is_some() || args.c2.is_some()) {
        return Err(Failure::input("--c1 and --c2 only apply to --op pair"));
    }
    let (m1, m2) = (lhs.moments(g.order), rhs.moments(g.order));
    let out = match args.op {
        ConvolveOp::Mconv => convolution::convolve(Operation::Mconv, &m1, &m2, g.order),
        ConvolveOp::Mconv0 => convolution::convolve(Operation::Mconv0, &m1, &m2, g.order),
        ConvolveOp::Pair => {
            let (Some(c1), Some(c2)) = (&args.c1, &args.c2) else {
                return Err(Failure::input("--op pair needs --c1 and --c2"));
            };
            let p1 = ConvolutionPair::new(m1, parse_scalar(c1)?);
            let p2 = ConvolutionPair::new(m2, parse_scalar(c2)?);
            convolve_pair(&p1, &p2, g.order).dist
        }
    };
    out.write_csv(sink(args.out.as_deref())?)?;
    if let Some(path) = &args.measure_out {
        match identify(&out, lhs.domain(), args.max_atoms) {
            Ok(mu) => write_text(path, &measure_to_json(&mu))?,
            Err(e) => warn(e.kind(), &format!("no measure written: {e}")),
        }
    }
    Ok(())
}

pub fn oracle(g: &Global, args: OracleArgs) -> Outcome {
    let v1 = ShiftPolyVariable::new(parse_complex_list(&args.u1)?, parse_scalar(&args.c1)?)?;
    let v2 = ShiftPolyVariable::new(parse_complex_list(&args.u2)?, parse_scalar(&args.c2)?)?;
    let scene = realize_pair(&v1, &v2, g.dim)?;
    let oracle = scene.oracle_moments(&[X1, X2], g.order)?;
    let marginal = |v: &ShiftPolyVariable| -> Result<MomentSequence, Error> {
        Ok(moments_from_psi(&shift_poly_psi(v.u(), g.order)?))
    };
    let p1 = ConvolutionPair::new(marginal(&v1)?, v1.c());
    let p2 = ConvolutionPair::new(marginal(&v2)?, v2.c());
    let series = convolve_pair(&p1, &p2, g.order).dist;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["n", "oracle_re", "oracle_im", "series_re", "series_im", "abs_error"]).map_err(Error::from)?;
    let mut worst = 0.0f64;
    for (n, o) in oracle.iter().enumerate() {
        let s = series.get(n + 1);
        let err = (o - s).norm();
        worst = worst.max(err);
        w.write_record([(n + 1).to_string(), fmt_f64(o.re), fmt_f64(o.im), fmt_f64(s.re), fmt_f64(s.im), fmt_f64(err)])
            .map_err(Error::from)?;
    }
    finish(w)?;
    let tol = g.tol.unwrap_or(1e-8);
    if worst > tol {
        return Err(Failure::numerical("OracleMismatch", format!("largest error {worst:.3e} exceeds {tol:.1e}")));
    }
    Ok(())
}

pub fn flow(g: &Global, args: FlowArgs) -> Outcome {
    let generator = read_generator(&args.generator).map_err(|e| with_path(e, &args.generator))?;
    let taus = parse_reals(&args.tau_list)?;
    let convention = Operation::from(args.convention);
    let mut opts = FlowOptions { scheme: args.scheme.into(), convention, ..FlowOptions::default() };
    if let Some(tol) = g.tol {
        opts.crosscheck_tol = tol;
    }
    let members = semigroup_measures(&generator, &taus, g.order, convention, &opts.rk, args.max_atoms)?;
    if args.points.is_none() || args.out.is_some() {
        let mut w = csv_writer(args.out.as_deref())?;
        w.write_record(["tau", "n", "re", "im"]).map_err(Error::from)?;
        for m in &members {
            for (n, v) in m.moments.as_slice().iter().enumerate() {
                w.write_record([fmt_f64(m.tau), (n + 1).to_string(), fmt_f64(v.re), fmt_f64(v.im)])
                    .map_err(Error::from)?;
            }
        }
        finish(w)?;
    }
    if let Some(points) = &args.points {
        let z0 = parse_complex_list(points)?;
        let states = integrate_flow(&generator, &z0, &taus, &opts)?;
        let mut w = csv_writer(args.points_out.as_deref())?;
        w.write_record(["tau", "z_re", "z_im", "u_re", "u_im", "eta_re", "eta_im"]).map_err(Error::from)?;
        for s in &states {
            w.write_record([s.tau, s.z.re, s.z.im, s.u.re, s.u.im, s.eta.re, s.eta.im].map(fmt_f64))
                .map_err(Error::from)?;
        }
        finish(w)?;
    }
    if let Some(path) = &args.measure_out {
        let missing: Vec<String> = members.iter().filter(|m| m.measure.is_none()).map(|m| m.tau.to_string()).collect();
        if !missing.is_empty() {
            return Err(Failure::numerical(
                "RankMismatch",
                format!("no atomic measure with at most {} atoms at tau = {}", args.max_atoms, missing.join(", ")),
            ));
        }
        let text = if let [m] = members.as_slice() {
            measure_to_json(&Measure::Atomic(m.measure.clone().expect("checked above")))
        } else {
            let list: Vec<serde_json::Value> = members
                .iter()
                .map(|m| {
                    let mu = Measure::Atomic(m.measure.clone().expect("checked above"));
                    let value: serde_json::Value = serde_json::from_str(&measure_to_json(&mu)).expect("valid json");
                    serde_json::json!({ "tau": m.tau, "measure": value })
                })
                .collect();
            serde_json::to_string_pretty(&list).expect("json serializes")
        };
        write_text(path, &text)?;
    }
    Ok(())
}

pub fn divide(g: &Global, args: DivideArgs) -> Outcome {
    let mu = load_measure(&args.measure)?;
    let policy = if args.winding == 0 { BranchPolicy::Principal } else { BranchPolicy::Winding(args.winding) };
    let chain = divisibility_chain(&mu.moments(g.order), args.depth, args.op.into(), policy)?;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["level", "recomposition_error", "n", "re", "im"]).map_err(Error::from)?;
    for level in &chain {
        for (n, v) in level.moments.as_slice().iter().enumerate() {
            w.write_record([
                level.level.to_string(),
                fmt_f64(level.recomposition_error),
                (n + 1).to_string(),
                fmt_f64(v.re),
                fmt_f64(v.im),
            ])
            .map_err(Error::from)?;
        }
    }
    finish(w)
}

pub fn density(_g: &Global, args: DensityArgs) -> Outcome {
    let mu = load_measure(&args.measure)?;
    let grid = parse_grid(&args.grid)?;
    let rhs = args.rhs.as_deref().map(load_measure).transpose()?;
    let op = Operation::from(args.op);
    let failure = RefCell::new(None::<Error>);
    let record = |r: Result<Complex64, Error>| {
        r.unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        })
    };
    // psi = eta / (1 - eta) of the measure or of the convolution
    let psi = |z: Complex64| -> Result<Complex64, Error> {
        let p = TransformPoint::new(z, mu.domain().point_domain())?;
        let eta = match &rhs {
            Some(r) => eval_convolved_eta(&mu, r, op, &p)?,
            None => mu.eval_eta(&p)?,
        };
        Ok(eta / (1.0 - eta))
    };
    let values = match mu.domain() {
        Domain::HalfLine => {
            if args.epsilon.is_nan() || args.epsilon <= 0.0 {
                return Err(Failure::input("--epsilon must be positive"));
            }
            stieltjes_density(cauchy_from_psi(|z| record(psi(z))), &grid, args.epsilon)
        }
        Domain::Circle => {
            if !(args.radius > 0.0 && args.radius < 1.0) {
                return Err(Failure::input("--radius must lie in (0, 1)"));
            }
            poisson_density(|z| record(psi(z)), &grid, args.radius)
        }
    };
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["x", "density"]).map_err(Error::from)?;
    for (x, d) in grid.iter().zip(values) {
        w.write_record([fmt_f64(*x), fmt_f64(d)]).map_err(Error::from)?;
    }
    finish(w)
}

pub fn selftest(g: &Global) -> Outcome {
    let results = run_all(g.seed);
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "seed {}", g.seed);
    for r in &results {
        let _ = writeln!(out, "{r}");
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    let _ = writeln!(out, "{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical("AcceptanceFailure", format!("criteria {} failed", failed.join(", "))))
    }
}
