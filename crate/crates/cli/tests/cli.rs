use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn monomul(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monomul"))
        .args(args)
        .current_dir(dir)
        .env_remove("MONOMUL_SEED")
        .output()
        .expect("binary runs")
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("d1.json", r#"{"domain":"half_line","atoms":[{"position":1.0,"weight":1.0}]}"#),
        ("two.json", r#"{"domain":"half_line","atoms":[{"position":0.0,"weight":0.5},{"position":2.0,"weight":0.5}]}"#),
        (
            "bern.json",
            r#"{"domain":"circle","atoms":[{"position":0.0,"weight":0.5},{"position":3.141592653589793,"weight":0.5}]}"#,
        ),
        ("haar.json", r#"{"haar":true}"#),
        ("gamma.json", r#"{"domain":"half_line","a":0.0,"nu":[{"position":0.0,"weight":1.0}]}"#),
        ("power.json", r#"{"domain":"circle","builtin":"z^n-1","n":1}"#),
        ("bad.json", r#"{"domain":"half_line","atoms":[{"position":1.0,"weight":0.4}]}"#),
    ];
    for (name, body) in files {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn values(csv: &str, col: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).expect("error is json")
}

#[test]
fn convolving_unit_masses_gives_ones() {
    let dir = setup();
    let o =
        monomul(dir.path(), &["convolve", "--op", "mconv", "--lhs", "d1.json", "--rhs", "d1.json", "--order", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n,re,im\n"));
    assert_eq!(values(&text, 1), vec![1.0; 10]);
    assert_eq!(values(&text, 2), vec![0.0; 10]);
}

#[test]
fn convolve_writes_the_output_measure() {
    let dir = setup();
    let o = monomul(
        dir.path(),
        &[
            "convolve",
            "--op",
            "mconv",
            "--lhs",
            "two.json",
            "--rhs",
            "two.json",
            "--order",
            "8",
            "--out",
            "m.csv",
            "--measure-out",
            "m.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let moments = values(&fs::read_to_string(dir.path().join("m.csv")).unwrap(), 1);
    for (n, m) in moments.iter().enumerate() {
        assert!((m - 3f64.powi(n as i32)).abs() < 1e-9 * m);
    }
    let mu: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    let atoms = mu["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    assert!((atoms[1]["position"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((atoms[0]["weight"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn pair_needs_both_constants() {
    let dir = setup();
    let o =
        monomul(dir.path(), &["convolve", "--op", "pair", "--lhs", "two.json", "--rhs", "two.json", "--c1", "0.5,0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = monomul(
        dir.path(),
        &[
            "convolve",
            "--op",
            "pair",
            "--lhs",
            "bern.json",
            "--rhs",
            "bern.json",
            "--c1",
            "0",
            "--c2",
            "1",
            "--order",
            "4",
        ],
    );
    assert!(o.status.success());
    // c1 = 0: phi(x2)^n phi(x1^n) = (1 + (-1)^n) / 2 * 0^n
    assert!(values(&stdout(&o), 1).iter().all(|m| m.abs() < 1e-15));
}

#[test]
fn gamma_flow_at_one() {
    let dir = setup();
    let o = monomul(
        dir.path(),
        &[
            "flow",
            "--generator",
            "gamma.json",
            "--tau-list",
            "1",
            "--order",
            "16",
            "--measure-out",
            "mu.json",
            "--out",
            "m.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mu: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("mu.json")).unwrap()).unwrap();
    let atoms = mu["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    for (at, (pos, w)) in atoms.iter().zip([(0.0, 0.5), (2.0, 0.5)]) {
        assert!((at["position"].as_f64().unwrap() - pos).abs() < 1e-8);
        assert!((at["weight"].as_f64().unwrap() - w).abs() < 1e-8);
    }
}

#[test]
fn flow_points() {
    let dir = setup();
    let o = monomul(dir.path(), &["flow", "--generator", "gamma.json", "--tau-list", "1,2", "--points", "-1,-1:1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("tau,z_re,z_im,u_re,u_im,eta_re,eta_im\n"));
    let eta = values(&text, 5);
    assert_eq!(eta.len(), 4);
    assert!((eta[0] + 0.5).abs() < 1e-8);
    assert!((eta[1] + 1.0 / 3.0).abs() < 1e-8);
}

#[test]
fn flow_schemes_agree() {
    let dir = setup();
    let o = monomul(
        dir.path(),
        &["flow", "--generator", "power.json", "--tau-list", "0.5", "--points", "0.3:0.1", "--scheme", "crosscheck"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divide_two_point_measure() {
    let dir = setup();
    let o = monomul(dir.path(), &["divide", "--measure", "two.json", "--depth", "1", "--order", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let level1: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("1,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    // (1/3) delta_0 + (2/3) delta_{3/2}
    for (n, m) in level1.iter().enumerate() {
        assert!((m - 2.0 / 3.0 * 1.5f64.powi(n as i32 + 1)).abs() < 1e-12);
    }
}

#[test]
fn divide_rejects_zero_first_moment() {
    let dir = setup();
    let o = monomul(dir.path(), &["divide", "--measure", "bern.json", "--op", "mconv0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "ZeroFirstMoment");
}

#[test]
fn densities() {
    let dir = setup();
    let o = monomul(dir.path(), &["density", "--measure", "haar.json", "--grid", "0:3:4", "--radius", "0.5"]);
    assert!(o.status.success());
    assert!(values(&stdout(&o), 1).iter().all(|d| (d - 1.0 / std::f64::consts::TAU).abs() < 1e-15));
    let o = monomul(
        dir.path(),
        &["density", "--measure", "two.json", "--rhs", "two.json", "--grid", "3:3:1", "--epsilon", "0.01"],
    );
    assert!(o.status.success());
    // the atom of weight 1/3 at 3
    let d = values(&stdout(&o), 1)[0];
    assert!((d - 1.0 / (3.0 * std::f64::consts::PI * 0.01)).abs() < 0.01 * d);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = setup();
    for args in [
        vec!["convolve", "--op", "mconv", "--lhs", "bad.json", "--rhs", "d1.json"],
        vec!["convolve", "--op", "mconv", "--lhs", "missing.json", "--rhs", "d1.json"],
        vec!["convolve", "--op", "mconv", "--lhs", "two.json", "--rhs", "bern.json"],
        vec!["convolve", "--op", "nope", "--lhs", "two.json", "--rhs", "two.json"],
        vec!["oracle", "--u1", "0", "--u2", "1"],
        vec!["oracle", "--u1", "1", "--u2", "1", "--order", "40", "--dim", "16"],
        vec!["density", "--measure", "two.json", "--grid", "0:1"],
        vec!["flow", "--generator", "gamma.json", "--tau-list", "-1"],
    ] {
        let o = monomul(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = error_json(&o);
        assert!(err["error"].is_string() && err["message"].is_string(), "{args:?}");
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = setup();
    // mu_1 has two atoms
    let o = monomul(
        dir.path(),
        &["flow", "--generator", "gamma.json", "--tau-list", "1", "--measure-out", "x.json", "--max-atoms", "1"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["exit_code"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup();
    let args =
        ["flow", "--generator", "power.json", "--tau-list", "0.3,0.7", "--order", "12", "--points", "0.2:0.1,-0.3"];
    let a = monomul(dir.path(), &args);
    let b = monomul(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let args = ["oracle", "--u1", "1,0.2:0.1", "--u2", "0.8", "--c1", "0,0", "--c2", "0.5,0.5"];
    assert_eq!(monomul(dir.path(), &args).stdout, monomul(dir.path(), &args).stdout);
}

#[test]
fn seventeen_digit_output() {
    let dir = setup();
    let o =
        monomul(dir.path(), &["convolve", "--op", "mconv0", "--lhs", "two.json", "--rhs", "d1.json", "--order", "2"]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let re = line.split(',').nth(1).unwrap();
    assert_eq!(re.split('e').next().unwrap().replace('.', "").len(), 17);
}

#[test]
fn selftest_passes() {
    let dir = setup();
    let o = monomul(dir.path(), &["selftest"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
