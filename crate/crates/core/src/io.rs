//! Text formats: CSV number formatting and the JSON schemas for measures.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Atom, AtomicMeasure, Domain, Measure};
use crate::semigroup::{Generator, GeneratorCircle, GeneratorHalfLine};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    haar: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<Atom>>,
}

pub fn measure_from_json(text: &str) -> Result<Measure> {
    let raw: MeasureJson = serde_json::from_str(text)?;
    if raw.haar == Some(true) {
        if raw.domain.is_some_and(|d| d != Domain::Circle) {
            return Err(Error::InvalidMeasure("the Haar measure lives on the circle".into()));
        }
        if raw.atoms.is_some() {
            return Err(Error::InvalidMeasure("a Haar measure has no atoms".into()));
        }
        return Ok(Measure::Haar);
    }
    let domain = raw.domain.ok_or_else(|| Error::InvalidMeasure("missing \"domain\"".into()))?;
    let atoms = raw.atoms.ok_or_else(|| Error::InvalidMeasure("missing \"atoms\"".into()))?;
    Ok(Measure::Atomic(AtomicMeasure::new(domain, atoms)?))
}

pub fn measure_to_json(m: &Measure) -> String {
    let raw = match m {
        Measure::Haar => MeasureJson { domain: Some(Domain::Circle), haar: Some(true), atoms: None },
        Measure::Atomic(a) => MeasureJson { domain: Some(a.domain()), haar: None, atoms: Some(a.atoms().to_vec()) },
    };
    serde_json::to_string_pretty(&raw).expect("measure serializes")
}

pub fn read_measure(path: &Path) -> Result<Measure> {
    measure_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Deserialize)]
struct AngleAtom {
    angle: f64,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorJson {
    domain: Domain,
    a: Option<f64>,
    nu: Option<Vec<Atom>>,
    beta: Option<f64>,
    rho: Option<Vec<AngleAtom>>,
    builtin: Option<String>,
    n: Option<u32>,
}

pub fn generator_from_json(text: &str) -> Result<Generator> {
    let raw: GeneratorJson = serde_json::from_str(text)?;
    let misplaced = |field: &str| {
        Error::InvalidGenerator(format!("field \"{field}\" does not belong to a {} generator", raw.domain))
    };
    match raw.domain {
        Domain::HalfLine => {
            if raw.beta.is_some() || raw.rho.is_some() {
                return Err(misplaced("beta/rho"));
            }
            if raw.builtin.is_some() || raw.n.is_some() {
                return Err(misplaced("builtin"));
            }
            Ok(GeneratorHalfLine::new(raw.a.unwrap_or(0.0), raw.nu.unwrap_or_default())?.into())
        }
        Domain::Circle => {
            if raw.a.is_some() || raw.nu.is_some() {
                return Err(misplaced("a/nu"));
            }
            match raw.builtin.as_deref() {
                Some("z^n-1") => {
                    if raw.beta.is_some() || raw.rho.is_some() {
                        return Err(misplaced("beta/rho"));
                    }
                    let n = raw.n.ok_or_else(|| Error::InvalidGenerator("builtin z^n-1 needs \"n\"".into()))?;
                    Ok(GeneratorCircle::power_minus_one(n)?.into())
                }
                Some(other) => Err(Error::InvalidGenerator(format!("unknown builtin `{other}`"))),
                None => {
                    if raw.n.is_some() {
                        return Err(misplaced("n"));
                    }
                    let rho = raw.rho.unwrap_or_default().into_iter().map(|a| Atom::new(a.angle, a.weight)).collect();
                    Ok(GeneratorCircle::herglotz(raw.beta.unwrap_or(0.0), rho)?.into())
                }
            }
        }
    }
}

pub fn read_generator(path: &Path) -> Result<Generator> {
    generator_from_json(&std::fs::read_to_string(path)?)
}

/// Parses `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let (re, im) = match s.split_once(':') {
        Some((re, im)) => (re, im),
        None => (s, "0"),
    };
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{s}` is not a number")));
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

/// Parses a comma-separated list of `re` / `re:im` entries.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}
