use serde_json::Value;
use std::io::Write;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qet").chain(args.iter().copied());
    let code = qet_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Data rows of a CSV document as header-keyed maps.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(h: &[String], name: &str) -> usize {
    h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name} in {h:?}"))
}

fn file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn minimal_report() {
    let v = json(&["minimal", "--h", "1", "--k", "1"]);
    assert_eq!(v["version"], qet_cli::VERSION);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["config"]["theta"], "auto");
    let r = &v["result"];
    assert!((f(&r["E_A"]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((f(&r["E_B_max"]) - 0.114748).abs() < 1e-6);
    assert!((f(&r["E_B"]) - f(&r["E_B_max"])).abs() < 1e-12);
    assert_eq!(r["bound"]["holds"], true);
    assert!((f(&r["bound"]["delta_S"]) - 0.416496).abs() < 1e-6);
    assert!((f(&r["bound"]["rhs"]) - 0.30341).abs() < 1e-5);
    assert_eq!(r["probabilities"].as_array().unwrap().len(), 2);

    let zero = json(&["minimal", "--h", "1", "--k", "1", "--theta", "0"]);
    assert_eq!(f(&zero["result"]["E_B"]), 0.0);
    assert_eq!(f(&zero["config"]["theta"]), 0.0);
}

#[test]
fn usage_errors_exit_one() {
    let (code, out, err) = run(&["minimal", "--h", "-1", "--k", "1"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("positive"), "{err}");
    assert_eq!(run(&["minimal", "--h", "x"]).0, 1);
    assert_eq!(run(&["minimal", "--bogus", "1"]).0, 1);
    assert_eq!(run(&["nonsense"]).0, 1);
    assert_eq!(run(&["sweep", "minimal", "--param", "q", "--range", "1:2:3"]).0, 1);
    assert_eq!(run(&["sweep", "minimal", "--param", "k", "--range", "1:2"]).0, 1);
    assert_eq!(run(&["field", "--T", "-1"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn sweep_rows() {
    let (code, out, _) = run(&["sweep", "minimal", "--param", "k", "--range", "0.1:10:50", "--log"]);
    assert_eq!(code, 0);
    assert!(out.starts_with(&format!("# version: {}\n", qet_cli::VERSION)));
    assert!(out.contains("# seed: 0\n"));
    let (h, rows) = table(&out);
    assert_eq!(rows.len(), 50);
    let (k, e) = (column(&h, "k"), column(&h, "E_B_max"));
    assert_eq!(rows[0][k], "0.1");
    assert_eq!(rows[49][k], "10");
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert!(r[e].parse::<f64>().unwrap() > 0.0);
        assert!(r.last().unwrap().is_empty());
    }
}

#[test]
fn sweep_flags_failed_points() {
    let (code, out, err) = run(&["sweep", "minimal", "--param", "h", "--range", "-1:1:3"]);
    assert_eq!(code, 0);
    assert!(err.contains("point 0"));
    let (h, rows) = table(&out);
    let e = column(&h, "error");
    assert!(rows[0][e].contains("positive"));
    assert!(rows[2][e].is_empty());
}

#[test]
fn ising_table_and_fit() {
    let (code, out, _) = run(&["ising", "--J", "1", "--n", "1"]);
    assert_eq!(code, 0);
    let (h, rows) = table(&out);
    assert_eq!(rows.len(), 1);
    let e_b: f64 = rows[0][column(&h, "E_B_analytic")].parse().unwrap();
    assert!((e_b - 0.0344364).abs() < 1e-7);
    for c in ["n", "E_B_asymptotic", "ln_abs_delta"] {
        column(&h, c);
    }

    let (_, out, _) = run(&["ising", "--J", "1", "--n", "30:100", "--fit"]);
    let fit = out.lines().find(|l| l.starts_with("# fit: exponent")).unwrap();
    let exponent: f64 = fit.split(['=', ',']).nth(1).unwrap().trim().parse().unwrap();
    assert!((exponent + 4.5).abs() < 0.05);
    assert_eq!(table(&out).1.len(), 71);
}

#[test]
fn ising_energies_scale_with_coupling() {
    let (_, one, _) = run(&["ising", "--J", "1", "--n", "1:40"]);
    let (_, two, _) = run(&["ising", "--J", "2", "--n", "1:40"]);
    let (h, a) = table(&one);
    let (_, b) = table(&two);
    for c in ["E_A", "E_B_analytic", "E_B_asymptotic", "E_r"] {
        let i = column(&h, c);
        for (x, y) in a.iter().zip(&b) {
            let (x, y): (f64, f64) = (x[i].parse().unwrap(), y[i].parse().unwrap());
            assert!((y - 2.0 * x).abs() <= 1e-15 * y, "{c}: {x} {y}");
        }
    }
    let i = column(&h, "ln_abs_delta");
    assert!(a.iter().zip(&b).all(|(x, y)| x[i] == y[i]));
}

#[test]
fn ising_numeric_columns() {
    let (code, out, err) = run(&["ising", "--mode", "numeric", "--N", "8", "--n", "2:4", "--directions", "y"]);
    assert_eq!(code, 0, "{err}");
    let (h, rows) = table(&out);
    let (a, b) = (column(&h, "E_A_numeric_N8_y"), column(&h, "E_B_numeric_N8_y"));
    assert!(rows[0][a].is_empty());
    let e_a: f64 = rows[1][a].parse().unwrap();
    let e_b: f64 = rows[1][b].parse().unwrap();
    assert!(e_a > 1.8 && e_b > 0.0 && e_b < e_a);
}

const ISING8: &str = "n_sites = 8\nboundary = periodic\nsite.default = -1*z\nbond.default = -1 x x\n";

#[test]
fn chain_report() {
    let dir = tempfile::tempdir().unwrap();
    let model = file(&dir, "ising8.txt", ISING8);
    let v = json(&["chain", "--model", &model, "--site-a", "1", "--site-b", "5", "--measure", "y", "--generator", "x", "--residual"]);
    let r = &v["result"];
    assert_eq!(r["n_sites"], 8);
    assert!((f(&r["E_B"]) - f(&r["E_B_max"])).abs() < 1e-10);
    assert!((f(&r["E_B"]) - f(&r["E_B_direct"])).abs() < 1e-10);
    let e_r = f(&r["residual"]["E_r"]);
    assert!(f(&r["E_B_max"]) <= e_r + 1e-9 && e_r <= f(&r["E_A"]) + 1e-9);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);

    let fixed = json(&["chain", "--model", &model, "--site-a", "1", "--site-b", "5", "--theta", "0"]);
    assert!(f(&fixed["result"]["E_B"]).abs() < 1e-12);
    assert_eq!(run(&["chain", "--model", &model, "--site-a", "1", "--site-b", "2"]).0, 1);
}

#[test]
fn chain_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = file(&dir, "bad.txt", "n_sites = 4\nsite.default = -1*q\n");
    let (code, _, err) = run(&["chain", "--model", &bad, "--site-a", "0", "--site-b", "3"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(run(&["chain", "--model", "/nonexistent/model", "--site-a", "0", "--site-b", "3"]).0, 1);
    // No Hamiltonian: every state is a ground state.
    let flat = file(&dir, "flat.txt", "n_sites = 6\nsite.default = 0\n");
    let (code, _, err) = run(&["chain", "--model", &flat, "--site-a", "0", "--site-b", "3"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn field_from_profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let pi = std::f64::consts::PI;
    let csv = |a: f64, eps: f64| {
        let mut s = String::from("x,value\n");
        for i in 0..=512 {
            let x = a + i as f64 / 512.0;
            s.push_str(&format!("{x},{}\n", eps * (pi * (x - a)).sin().powi(2)));
        }
        s
    };
    let l = file(&dir, "l.csv", &csv(0.0, 0.1));
    let p = file(&dir, "p.csv", &csv(3.0, 1.0));
    let v = json(&["field", "--lambda", &l, "--p", &p, "--T", "3"]);
    let r = &v["result"];
    assert!((f(&r["theta_opt"]) - f(&r["eta"]) / (2.0 * f(&r["xi"]))).abs() < 1e-15);
    assert!((f(&r["E_B_max"]) - f(&r["E_B_final_formula"])).abs() <= 1e-12 * f(&r["E_B_max"]));
    assert_eq!(r["overlap"]["agreed"], true);
    assert_eq!(f(&r["prob_plus"]), 0.5);

    let analytic = json(&["field", "--T", "3"]);
    assert!((f(&analytic["result"]["eta"]) - f(&r["eta"])).abs() < 1e-12);

    let ragged = file(&dir, "ragged.csv", "0,0\n1,0\n3,0\n");
    let (code, _, err) = run(&["field", "--lambda", &ragged]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn field_output_decays_with_delay() {
    let (code, out, _) = run(&["sweep", "field", "--param", "T", "--range", "1:8:4"]);
    assert_eq!(code, 0);
    let (h, rows) = table(&out);
    let e = column(&h, "E_B_max");
    let vals: Vec<f64> = rows.iter().map(|r| r[e].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = file(&dir, "run.cfg", "# minimal run\nh = 3\nk = 4\nseed = 9\n");
    let v = json(&["--config", &cfg, "minimal"]);
    assert_eq!(v["seed"], 9);
    assert!((f(&v["result"]["E_A"]) - 1.8).abs() < 1e-12);
    let v = json(&["minimal", "--config", &cfg, "--h", "1", "--k", "1"]);
    assert_eq!(f(&v["config"]["h"]), 1.0);
    assert_eq!(v["seed"], 9);

    let sweep = file(&dir, "sweep.cfg", "param = k\nrange = 1:2:3\nlog = true\n");
    let (code, out, _) = run(&["sweep", "minimal", "--config", &sweep]);
    assert_eq!(code, 0);
    assert_eq!(table(&out).1.len(), 3);
    assert!(out.contains("\"log\":true"));

    let bad = file(&dir, "bad.cfg", "h = 1\nwidth = 2\n");
    let (code, _, err) = run(&["minimal", "--config", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let (code, out, _) = run(&["minimal", "--output", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert!(v["config"].get("output").is_none());
}

#[test]
fn verify_minimal_suite() {
    let (code, out, err) = run(&["verify", "--suite", "minimal"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["failed"], 0);
    assert_eq!(v["result"]["checks"].as_array().unwrap().len(), 5);
    assert_eq!(err.lines().filter(|l| l.contains("PASS")).count(), 5);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["sweep", "minimal", "--param", "theta", "--range", "0:1:40", "--seed", "3"];
    assert_eq!(run(&args).1, run(&args).1);
    let args = ["verify", "--suite", "field", "--seed", "3"];
    assert_eq!(run(&args).1, run(&args).1);
}
