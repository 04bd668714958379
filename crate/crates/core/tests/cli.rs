//! End-to-end checks of the adiagap binary: exit codes, CSV schemas,
//! determinism, and config-file precedence.

use std::io::Write as _;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adiagap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn adiagap")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1) // header
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn assert_sci_notation(field: &str) {
    // {:.12e}: 13 significant digits, '.' separator
    let ok = field
        .strip_prefix('-')
        .unwrap_or(field)
        .split_once('.')
        .map(|(lead, rest)| {
            lead.len() == 1
                && rest.contains('e')
                && rest.split('e').next().unwrap().len() == 12
        })
        .unwrap_or(false);
    assert!(ok, "field {field:?} not in 12-digit scientific notation");
}

#[test]
fn gap_schema_and_determinism() {
    let args = ["gap", "--samples", "32", "--horizon-periods", "20"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical invocations must be byte-identical");
    let text = stdout(&a);
    assert!(text.starts_with("# adiagap gap\n"));
    assert!(text.contains("\n# omega0 = "));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 32);
    for row in &rows {
        assert_eq!(row.len(), 6);
        for field in row {
            assert_sci_notation(field);
        }
    }
    // d_tau tracks the asymptote -(slope) * tau within a fast-ripple margin
    let last = rows.last().unwrap();
    let d_tau: f64 = last[4].parse().unwrap();
    let d_asym: f64 = last[5].parse().unwrap();
    assert!((d_tau - d_asym).abs() <= 1e-6);
}

#[test]
fn gap_static_field_has_zero_gap() {
    let out = run(&["gap", "--omega", "0", "--horizon", "100", "--samples", "16"]);
    assert!(out.status.success());
    for row in data_rows(&stdout(&out)) {
        let d_tau: f64 = row[4].parse().unwrap();
        assert_eq!(d_tau, 0.0);
    }
}

#[test]
fn linearity_schema_and_minimum() {
    let out = run(&["linearity", "--samples", "200"]);
    assert!(out.status.success());
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 200);
    assert_eq!(rows[0].len(), 3);
    let first_overlap: f64 = rows[0][1].parse().unwrap();
    assert!((first_overlap - 1.0).abs() <= 1e-12, "scan starts at tau = 0");
    let min: f64 = rows
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min <= 0.05, "min overlap {min}");
    for row in &rows {
        let o: f64 = row[1].parse().unwrap();
        let c: f64 = row[2].parse().unwrap();
        assert!((o - c).abs() <= 1.1e-3);
    }
}

#[test]
fn residual_schema_and_identity() {
    let out = run(&["residual"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2000);
    for row in &rows {
        assert_eq!(row.len(), 9);
        let cum = (
            row[3].parse::<f64>().unwrap(),
            row[4].parse::<f64>().unwrap(),
        );
        let derived = (
            row[5].parse::<f64>().unwrap(),
            row[6].parse::<f64>().unwrap(),
        );
        let dist = ((cum.0 - derived.0).powi(2) + (cum.1 - derived.1).powi(2)).sqrt();
        assert!(dist <= 1e-6);
    }
    assert!(text.contains("prefactor ratio = -1.9"));
}

#[test]
fn validate_ladder_shows_fourth_order() {
    let out = run(&["validate"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    let errs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(errs[0] / errs[1] >= 14.0);
    assert!(errs[1] / errs[2] >= 14.0);
    let drift: f64 = rows[2][2].parse().unwrap();
    assert!(drift <= 1e-9);
    assert!(text.contains("# observed convergence order"));
}

#[test]
fn conditions_exit_codes() {
    let ok = run(&["conditions"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("overall: satisfied"));

    let bad = run(&["conditions", "--omega0", "0.01", "--omega", "0.01", "--theta", "1.5707963"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("overall: violated"));
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(run(&["gap", "--horizon", "0"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--samples", "4"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--omega0", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--engine", "integrator"]).status.code(), Some(2));
    assert_eq!(
        run(&["gap", "--omega", "0", "--horizon-periods", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["validate", "--engine", "oracle"]).status.code(), Some(2));
    // unknown flag is a usage error
    assert_eq!(run(&["gap", "--bogus"]).status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    // residual grid too coarse for the fast oscillation
    let out = run(&["residual", "--samples", "17", "--horizon", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn theta_degrees_alias() {
    let rad = run(&["conditions", "--theta", "0.5235987755982988"]);
    let deg = run(&["conditions", "--theta-deg", "30"]);
    assert_eq!(rad.stdout, deg.stdout);
}

#[test]
fn config_file_is_read_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# sample configuration").unwrap();
    writeln!(f, "omega0 = 5.0").unwrap();
    writeln!(f, "samples = 20").unwrap();
    writeln!(f, "horizon = 50.0").unwrap();
    drop(f);
    let p = path.to_str().unwrap();

    let from_file = run(&["conditions", "--config", p]);
    assert!(stdout(&from_file).contains("# omega0 = 5.000000000000e0"));
    assert!(stdout(&from_file).contains("# horizon = 5.000000000000e1"));

    let overridden = run(&["conditions", "--config", p, "--omega0", "10"]);
    assert!(stdout(&overridden).contains("# omega0 = 1.000000000000e1"));

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "nonsense line\n").unwrap();
    assert_eq!(
        run(&["conditions", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn out_flag_writes_identical_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gap.csv");
    let args = ["gap", "--samples", "16", "--horizon-periods", "5"];
    let to_stdout = run(&args);
    let to_file = bin()
        .args(args)
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, to_stdout.stdout);
}
