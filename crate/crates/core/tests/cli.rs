use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use magdisk::config::SolverConfig;
use magdisk::intersections::crossing_by_system;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magdisk"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn crossings_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["crossings", "--n-max", "50"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("crossings_system.csv"));
    assert_eq!(header[..3], ["n", "beta", "eta_star"]);
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[50][1], "117.3339755112376");
    let cfg = SolverConfig::default();
    for row in rows.iter().step_by(7) {
        let n: u32 = row[0].parse().unwrap();
        let c = crossing_by_system(n, &cfg).unwrap();
        let beta: f64 = row[1].parse().unwrap();
        let eta: f64 = row[2].parse().unwrap();
        assert!(((beta - c.beta_n) / c.beta_n).abs() < 1e-15);
        assert!(((eta - c.eta_star) / c.eta_star).abs() < 1e-15);
    }
    let (header, rows) = read_csv(&dir.path().join("crossings_implicit.csv"));
    let eps = header.iter().position(|h| h == "epsilon").unwrap();
    for row in &rows {
        assert!(row[eps].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run(&["crossings", "--n-max", "30"], d.path()).status.success());
    }
    for f in ["crossings_system.csv", "crossings_implicit.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn curves_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["curves", "--n-max", "5", "--beta-grid", "0.5:40:0.5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = |n: usize| -> Vec<(f64, f64)> {
        read_csv(&dir.path().join(format!("curve_n{n:02}.csv")))
            .1
            .iter()
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect()
    };
    for n in 0..=5 {
        let c = curve(n);
        assert_eq!(c.len(), 80);
        assert!(c.iter().all(|&(_, e)| e.is_finite() && e > 0.0));
    }
    assert!(!dir.path().join("curve_n06.csv").exists());
    assert!(curve(0).windows(2).all(|w| w[1].1 > w[0].1));
    let c5 = curve(5);
    let argmin = c5.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!(argmin > 10.0);
    let (_, refs) = read_csv(&dir.path().join("curve_reference.csv"));
    assert_eq!(refs[0][0], "one");
    assert!((refs[1][1].parse::<f64>().unwrap() - 0.590106).abs() < 1e-5);
}

#[test]
fn constants_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["constants", "--format", "json"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("constants.json")).unwrap()).unwrap();
    assert!((v["theta0"].as_f64().unwrap() - 0.590106).abs() < 1e-5);
    assert!((v["xi0"].as_f64().unwrap() + 0.768).abs() < 1e-3);
    assert!((v["c1"].as_f64().unwrap() - 0.254).abs() < 1e-3);
    let d_fit = v["delta0_fit"].as_f64().unwrap();
    let d_formula = v["delta0_formula"].as_f64().unwrap();
    assert!((d_fit - d_formula).abs() < 1e-6);
}

#[test]
fn derivative_and_gamma_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["derivatives"], dir.path()).status.success());
    let (header, rows) = read_csv(&dir.path().join("derivatives.csv"));
    assert_eq!(header, ["n", "beta", "dlambda_left", "dlambda_right", "r4_left", "r4_right"]);
    let ns: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "25", "50", "100", "200", "300", "400"]);
    for r in &rows {
        let n: u32 = r[0].parse().unwrap();
        assert_eq!(r[4].is_empty(), n == 0 || n > 25, "n={n}");
    }
    assert!((rows[0][2].parse::<f64>().unwrap() - 0.884743).abs() < 1e-5);

    assert!(run(&["richardson"], dir.path()).status.success());
    let (_, rows) = read_csv(&dir.path().join("gamma.csv"));
    assert_eq!(rows.len(), 400);
    for r in &rows {
        let n: u32 = r[0].parse().unwrap();
        assert_eq!(r[2].is_empty(), n == 0 || n > 24, "n={n}");
    }
    assert!(dir.path().join("asymptotics.json").exists());
}

#[test]
fn conjectures_pass_on_small_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjectures", "--n-max", "20", "--beta-grid", "0.5:60:0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (_, rows) = read_csv(&dir.path().join("conjectures.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn bad_arguments_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["crossings", "--format", "xml"],
        vec!["crossings", "--beta-grid", "1:2"],
        vec!["crossings", "--beta-grid", "-1:2:0.5"],
        vec!["bogus"],
        vec!["crossings", "--n-max", "many"],
        vec!["crossings", "--config", "/nonexistent/magdisk.conf"],
    ] {
        assert_eq!(run(&args, dir.path()).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# small run\nn_max = 4\nformat = json\n").unwrap();
    let out = run(&["crossings", "--config", conf.to_str().unwrap(), "--n-max", "6"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("crossings_system.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 7);
    assert_eq!(v[0]["method"], "kummer_system");

    fs::write(&conf, "eig_rel_tol = 0\n").unwrap();
    let out = run(&["crossings", "--config", conf.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
