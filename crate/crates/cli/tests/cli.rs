use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_peakon-lab");

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("PEAKON_LAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn roots(v: &Value) -> Vec<f64> {
    v["roots"].as_array().unwrap().iter().map(|r| r.as_f64().unwrap()).collect()
}

#[test]
fn novikov_line_roots() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["peakon", "--k1", "1", "--k2", "0", "--c", "4", "--domain", "line"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("amplitude.json"));
    assert_eq!(roots(&v), vec![-2.0, 2.0]);
    assert_eq!(v["exists"], Value::Bool(true));
    let profile = csv_rows(&d.path().join("profile.csv"));
    assert_eq!(profile[0], vec!["x", "u"]);
    assert_eq!(profile.len(), 202);
    // crest of the plus branch sits at x = 0, the middle sample
    let crest: f64 = profile[101][1].parse().unwrap();
    assert_eq!(crest, 2.0);
}

#[test]
fn camassa_holm_line_root() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["peakon", "--k1", "0", "--k2", "1", "--c", "3", "--domain", "line"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(roots(&json(&d.path().join("amplitude.json"))), vec![3.0]);
}

#[test]
fn nonexistence_exits_two_with_reason() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["peakon", "--k1", "-1", "--k2", "0", "--c", "1", "--domain", "line"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&d.path().join("amplitude.json"));
    assert_eq!(v["reason"], Value::String("discriminant -4".into()));
    assert_eq!(v["exists"], Value::Bool(false));
    assert!(!d.path().join("profile.csv").exists());
    assert!(d.path().join("manifest.json").exists());
}

#[test]
fn certify_exact_and_perturbed() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["certify", "--k1", "1", "--k2", "1", "--c", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("report.json"));
    assert_eq!(v["verdict"], Value::String("Certified".into()));
    assert_eq!(v["weak_residuals"].as_array().unwrap().len(), 24);

    let o = run(d.path(), &["certify", "--k1", "1", "--k2", "1", "--c", "2", "--perturb", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("report.json"));
    assert_eq!(v["verdict"], Value::String("Rejected".into()));
    // defect polynomial k1 (1 + sh^2) a^2 + k2 ch a - c at 1.1 a
    let (sh, ch) = (0.5f64.sinh(), 0.5f64.cosh());
    let a = (-ch + (ch * ch + 8.0 * (1.0 + sh * sh)).sqrt()) / (2.0 * (1.0 + sh * sh));
    let b = 1.1 * a;
    let expect = (1.0 + sh * sh) * b * b + ch * b - 2.0;
    let got = v["defect_value"].as_f64().unwrap();
    assert!((got - expect).abs() <= 1e-6 * expect.abs(), "{got} vs {expect}");
}

#[test]
fn certify_tiny_perturbation_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["certify", "--k1", "0", "--k2", "1", "--c", "1", "--perturb", "-0.01"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&d.path().join("report.json"))["verdict"], Value::String("Rejected".into()));
}

#[test]
fn certify_mismatch_exits_three() {
    // a huge tolerance certifies the perturbed peakon, contradicting the expectation
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["certify", "--k1", "1", "--k2", "1", "--c", "2", "--perturb", "0.1", "--tolerance", "1e3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn convolve_line_quadratic_at_ln2() {
    let d = tempfile::tempdir().unwrap();
    let ln2 = std::f64::consts::LN_2.to_string();
    let o = run(d.path(), &["convolve", "--identity", "line_quadratic", "--points", &ln2]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&d.path().join("convolve_line_quadratic.csv"));
    assert_eq!(rows[0], vec!["s", "closed_form", "quadrature", "abs_diff"]);
    let cf: f64 = rows[1][1].parse().unwrap();
    assert!((cf + 0.25).abs() < 1e-15, "{cf}");
}

#[test]
fn convolve_all_identities_pass_oracle() {
    for id in ["line_cubic", "line_quadratic", "circle_cubic", "circle_sh2", "circle_quadratic"] {
        let d = tempfile::tempdir().unwrap();
        let o = run(d.path(), &["convolve", "--identity", id, "--amplitude", "1.3", "--coeff", "-0.7"]);
        assert_eq!(o.status.code(), Some(0), "{id}");
        let rows = csv_rows(&d.path().join(format!("convolve_{id}.csv")));
        // 101 samples minus those within 1e-3 of a kink
        let expected = if id.starts_with("line") { 100 } else { 99 };
        assert_eq!(rows.len() - 1, expected, "{id}");
        for r in &rows[1..] {
            assert!(r[3].parse::<f64>().unwrap() <= 1e-8);
        }
    }
}

#[test]
fn circle_identities_vanish_at_half() {
    for id in ["circle_cubic", "circle_sh2", "circle_quadratic"] {
        let d = tempfile::tempdir().unwrap();
        let o = run(d.path(), &["convolve", "--identity", id, "--points", "0.5"]);
        assert_eq!(o.status.code(), Some(0));
        let rows = csv_rows(&d.path().join(format!("convolve_{id}.csv")));
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0, "{id}");
    }
}

#[test]
fn convolve_at_kink_exits_three() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["convolve", "--identity", "circle_sh2", "--points", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_rows() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["sweep", "--k1", "1,0", "--k2", "0,1", "--c=-1,4,0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&d.path().join("sweep.csv"));
    assert_eq!(
        rows[0],
        vec!["k1", "k2", "c", "disc_line", "disc_circle", "n_roots_line", "n_roots_circle"]
    );
    let find = |k1: f64, k2: f64, c: f64| {
        rows[1..]
            .iter()
            .find(|r| {
                let v: Vec<f64> = r[..3].iter().map(|x| x.parse().unwrap()).collect();
                v == [k1, k2, c]
            })
            .unwrap()
            .clone()
    };
    let r = find(1.0, 0.0, -1.0);
    assert_eq!(r[3].parse::<f64>().unwrap(), -4.0);
    assert_eq!(r[5], "0");
    assert_eq!(find(1.0, 0.0, 4.0)[5], "2");
    for c in [-1.0, 4.0, 0.5] {
        assert_eq!(find(0.0, 1.0, c)[5], "1");
    }
    assert_eq!(rows.len() - 1, 12);
}

#[test]
fn sweep_is_deterministic_under_seed() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(run(d.path(), &["sweep", "--random", "50", "--seed", "11"]).status.code(), Some(0));
    }
    assert_eq!(run(c.path(), &["sweep", "--random", "50", "--seed", "12"]).status.code(), Some(0));
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("sweep.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(json(&a.path().join("manifest.json"))["seed"], Value::from(11));
}

#[test]
fn evolve_small_run_and_reduction() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "evolve", "--k1", "0", "--k2", "1", "--c", "1", "--n", "128", "--dt", "1e-3", "--t-end", "0.05",
            "--record-every", "10", "--check-reduction",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("shape_error") && stdout.contains("h1_relative_drift"));
    let diag = csv_rows(&d.path().join("diagnostics.csv"));
    assert_eq!(diag[0], vec!["t", "h1_energy", "max_u", "peak_position", "shape_error", "mass_m"]);
    assert_eq!(diag.len() - 1, 6);
    let snaps = csv_rows(&d.path().join("snapshots.csv"));
    assert_eq!(snaps[0], vec!["t", "x", "u"]);
    assert_eq!(snaps.len() - 1, 6 * 128);
    let m = json(&d.path().join("manifest.json"));
    assert_eq!(m["config"]["n"], Value::from(128));
    assert_eq!(m["params"]["k2"], Value::from(1.0));
}

#[test]
fn evolve_zero_time_gives_initial_snapshot() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["evolve", "--k1", "1", "--k2", "1", "--c", "2", "--n", "64", "--t-end", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("h1_relative_drift 0.0000000000000000e0"));
    assert_eq!(csv_rows(&d.path().join("diagnostics.csv")).len(), 2);
    assert_eq!(csv_rows(&d.path().join("snapshots.csv")).len(), 65);
}

#[test]
fn evolve_blowup_exits_four() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["evolve", "--k1", "1", "--k2", "1", "--c", "2", "--n", "64", "--dt", "0.5", "--t-end", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn usage_errors_exit_64() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["evolve", "--k1", "1", "--k2", "1", "--c", "2", "--n", "100"]).status.code(), Some(64));
    assert_eq!(run(d.path(), &["frobnicate"]).status.code(), Some(64));
    let o = run(d.path(), &["evolve", "--k1", "1", "--k2", "1", "--c", "2", "--n", "64", "--check-reduction"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn help_prints_defaults_table() {
    let o = Command::new(BIN).arg("--help").output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["--n 1024", "--dt 1e-4", "1e-8", "PEAKON_LAB_OUT_DIR"] {
        assert!(text.contains(needle), "{needle}");
    }
}

#[test]
fn out_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["peakon", "--k1", "0", "--k2", "1", "--c", "1"])
        .env("PEAKON_LAB_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("amplitude.json").exists());
}

#[test]
fn manifest_has_sorted_keys_and_hashes() {
    let d = tempfile::tempdir().unwrap();
    run(d.path(), &["peakon", "--k1", "1", "--k2", "1", "--c", "2", "--domain", "circle"]);
    let text = fs::read_to_string(d.path().join("manifest.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let pos: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v["outputs"], serde_json::json!(["amplitude.json", "profile.csv"]));
    assert_eq!(v["output_sha256"].as_object().unwrap().len(), 2);
    assert!(!text.contains(&d.path().display().to_string()), "out dir leaked into the manifest");
}

#[test]
fn replay_reproduces_outputs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let args = [
        "evolve", "--k1", "1", "--k2", "0.5", "--c", "1", "--n", "64", "--dt", "1e-3", "--t-end", "0.02",
        "--record-every", "5",
    ];
    assert_eq!(run(first.path(), &args).status.code(), Some(0));
    let manifest = first.path().join("manifest.json");
    let o = run(second.path(), &["replay", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["snapshots.csv", "diagnostics.csv", "manifest.json"] {
        assert_eq!(fs::read(first.path().join(f)).unwrap(), fs::read(second.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn replay_detects_tampering() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run(first.path(), &["sweep", "--random", "5", "--seed", "1"]);
    let path = first.path().join("manifest.json");
    let mut v = json(&path);
    v["output_sha256"]["sweep.csv"] = Value::String("0".repeat(64));
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(run(second.path(), &["replay", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn replay_preserves_nonexistence_exit() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run(first.path(), &["peakon", "--k1", "-1", "--k2", "0", "--c", "1"]);
    let path = first.path().join("manifest.json");
    assert_eq!(run(second.path(), &["replay", path.to_str().unwrap()]).status.code(), Some(2));
}
