use std::path::Path;
use std::process::{Command, Output};

fn dsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsym")).args(args).output().expect("spawn dsym")
}

fn rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let body = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, body)
}

#[test]
fn bad_invocations_exit_nonzero() {
    let o = dsym(&["density", "--family", "poly", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dsym(&["density", "--family", "poly", "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = dsym(&["density", "--family", "lognormal", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dsym(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn failed_verification_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = dsym(&["verify", "--family", "lognormal", "--tol", "1e-40", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn verify_is_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = dsym(&["verify", "--family", "askeyberg", "--gamma", "0.5", "--k", "1.5", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn every_family_verifies_with_defaults() {
    for f in ["lognormal", "stieltjes", "askeyberg", "pakes-alpha", "poly"] {
        let o = dsym(&["verify", "--family", f]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["family"], f);
    }
}

#[test]
fn density_csv_round_trips_and_integrates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = dsym(&["density", "--family", "lognormal", "--ymin", "0.05", "--ymax", "20", "--points", "801", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, body) = rows(&out);
    assert_eq!(header, "y,pdf");
    assert_eq!(body.len(), 801);
    let text = std::fs::read_to_string(&out).unwrap();
    let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(format!("{:.16e}", first.parse::<f64>().unwrap()), first);
    let trap: f64 = body.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1])).sum();
    let phi = |y: f64| 0.5 * erfc_approx(-y.ln() / std::f64::consts::SQRT_2);
    let mass = phi(20.0) - phi(0.05);
    assert!((trap / mass - 1.0).abs() < 0.02, "{trap} vs {mass}");
}

// Abramowitz-Stegun 7.1.26, good to 1.5e-7: plenty for a 2% check.
fn erfc_approx(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let r = poly * (-x * x).exp();
    if x >= 0.0 { r } else { 2.0 - r }
}

#[test]
fn moments_and_samples() {
    let o = dsym(&["moments", "--family", "poly", "--s", "-1,0,2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,moment,recursion_defect");
    let m2: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((m2[1] - 16.0).abs() < 1e-8);

    let a = dsym(&["sample", "--family", "poly", "--n", "500", "--seed", "9"]);
    let b = dsym(&["sample", "--family", "poly", "--n", "500", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 500);
    let o = dsym(&["sample", "--family", "stieltjes", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_replaced_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    std::fs::write(&out, "stale contents that are longer than nothing\n".repeat(10_000)).unwrap();
    let o = dsym(&["compare", "--theta", "1", "--k", "2", "--points", "11", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, body) = rows(&out);
    assert_eq!(header, "y,pdf_poly,pdf_lognormal");
    assert_eq!(body.len(), 11);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
