use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .env_remove("ZENO_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_of(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json", "--precision", "17"]);
    let o = zeno(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn column(v: &Value, name: &str) -> Vec<Value> {
    let idx = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .position(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    v["rows"].as_array().unwrap().iter().map(|r| r[idx].clone()).collect()
}

fn floats(v: &Value, name: &str) -> Vec<f64> {
    column(v, name).iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn decay_filter_peaks_at_transition_frequency() {
    let v = json_of(&[
        "filter", "--family", "decay", "--eps", "0", "--delta", "1", "--tau", "2",
    ]);
    let (w, q) = (floats(&v, "omega"), floats(&v, "Q"));
    assert_eq!(w.len(), 400);
    let (i, peak) = q
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |m, (i, &x)| if x > m.1 { (i, x) } else { m });
    // ω = 1 is not on the 400-point grid; the nearest node is within 0.01.
    assert!((w[i] - 1.0).abs() < 0.011, "peak at {}", w[i]);
    assert!(peak <= 2.0 && peak > 2.0 - 1e-4, "{peak}");
    let v = json_of(&[
        "filter",
        "--family",
        "decay",
        "--eps",
        "0",
        "--delta",
        "1",
        "--tau",
        "2",
        "--omega-points",
        "9",
    ]);
    assert!((floats(&v, "Q")[1] - 2.0).abs() < 1e-12);
}

#[test]
fn dephasing_filter_at_zero_frequency_is_tau() {
    let v = json_of(&["filter", "--family", "dephasing", "--eps", "1", "--tau", "2"]);
    assert_eq!(floats(&v, "omega")[0], 0.0);
    assert!((floats(&v, "Q")[0] - 2.0).abs() < 1e-12);
}

#[test]
// The CLI takes θ as typed; 1.570796 is deliberately not π/2.
#[allow(clippy::approx_constant)]
fn general_filter_matches_library() {
    use zeno_core::filters::filter_general;
    use zeno_core::{BlochAngles, SystemParams, Temperature};
    let v = json_of(&[
        "filter", "--family", "general", "--eps", "2", "--delta", "1", "--theta", "1.570796", "--phi", "0", "--tau",
        "1",
    ]);
    let sys = SystemParams::new(2.0, 1.0).unwrap();
    let angles = BlochAngles::new(1.570796, 0.0).unwrap();
    for (w, q) in floats(&v, "omega").into_iter().zip(floats(&v, "Q")).step_by(37) {
        let want = filter_general(w, 1.0, &sys, &angles, Temperature::Zero).unwrap();
        assert!(
            (q - want).abs() <= 1e-15 * want.abs().max(1.0),
            "omega {w}: {q} vs {want}"
        );
        assert!(q >= 0.0);
    }
}

#[test]
fn theta_zero_dephasing_gamma_is_zero() {
    let v = json_of(&[
        "gamma",
        "--family",
        "general",
        "--eps",
        "2",
        "--delta",
        "0",
        "--theta",
        "0",
        "--tau-points",
        "20",
    ]);
    assert!(floats(&v, "gamma").iter().all(|&g| g == 0.0));
    assert_eq!(v["status"], "no-decay");
    assert!(column(&v, "label").iter().all(|l| l == "none"));
}

#[test]
fn general_gamma_curve_has_several_extrema() {
    let v = json_of(&["gamma", "--eps", "2", "--delta", "2"]);
    assert_eq!(floats(&v, "tau").len(), 150);
    assert!(v["extrema"].as_array().unwrap().len() >= 2);
    let labels = column(&v, "label");
    assert!(labels.iter().any(|l| l == "zeno") && labels.iter().any(|l| l == "anti-zeno"));
    let r = json_of(&["regimes", "--eps", "2", "--delta", "2"]);
    assert_eq!(r["extrema"], v["extrema"]);
    let starts = floats(&r, "start");
    let ends = floats(&r, "end");
    assert_eq!(starts[0], 0.02);
    assert_eq!(*ends.last().unwrap(), 3.0);
    assert!(starts.iter().skip(1).zip(&ends).all(|(s, e)| s == e));
}

#[test]
fn single_tau_gamma() {
    let v = json_of(&["gamma", "--family", "dephasing", "--eps", "2", "--tau", "1"]);
    let g = floats(&v, "gamma");
    assert_eq!(g.len(), 1);
    assert!((g[0] - 0.0461513).abs() < 1e-6, "{}", g[0]);
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn figure_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f1");
    let o = zeno(&["figure", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    let curves = m["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    for c in curves {
        assert_eq!(c["params"]["tau"], 2.0);
        let text = std::fs::read_to_string(out.join(c["file"].as_str().unwrap())).unwrap();
        assert!(text.lines().next().unwrap().starts_with("# zeno filter"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 401);
    }

    for (id, s, prep) in [("6", 0.8, "large_spin_jz"), ("7", 1.5, "large_spin_jx")] {
        let out = dir.path().join(format!("f{id}"));
        let o = zeno(&["figure", id, "--out", out.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let m = read_json(&out.join("manifest.json"));
        let curves = m["curves"].as_array().unwrap();
        assert_eq!(curves.len(), 3);
        for c in curves {
            let model = &c["params"]["model"];
            assert_eq!(model["prep"][prep], 20);
            assert_eq!(model["bath"]["ohmicity_s"], s);
            assert_eq!(model["bath"]["coupling_g"], 0.01);
            assert_eq!(model["bath"]["cutoff_wc"], 10.0);
            assert_eq!(model["temperature"], "zero");
            let data = read_json(&out.join(c["file"].as_str().unwrap()));
            assert_eq!(data["params"], c["params"]);
            assert_eq!(data["rows"].as_array().unwrap().len(), 150);
        }
    }
}

#[test]
fn unknown_figure_is_a_usage_error() {
    assert_eq!(code(&zeno(&["figure", "9"])), 2);
    assert_eq!(code(&zeno(&["figure", "0"])), 2);
    assert_eq!(code(&zeno(&["figure", "x"])), 2);
}

#[test]
fn oracle_defaults_pass() {
    let o = zeno(&["oracle", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let gaps = floats(&v, "gap");
    assert_eq!(gaps.len(), 10);
    assert!(gaps.iter().all(|&g| g <= 0.05), "{gaps:?}");
    assert_eq!(v["any_flagged"], false);
}

#[test]
fn oracle_strong_coupling_fails_threshold() {
    let o = zeno(&["oracle", "--G", "0.1", "--format", "json"]);
    assert_eq!(code(&o), 1);
    // The report is still written.
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["any_flagged"], true);
}

#[test]
fn oracle_single_mode_matches_analytic_survival() {
    for extra in [&[][..], &["--solver", "full", "--nmax", "10"][..]] {
        let mut args = vec!["oracle", "--modes", "1", "--family", "dephasing"];
        args.extend_from_slice(extra);
        let v = json_of(&args);
        let sim = floats(&v, "survival_sim");
        let exact = floats(&v, "survival_analytic");
        for (a, b) in sim.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b} ({extra:?})");
        }
    }
}

#[test]
fn oracle_rejects_large_spin() {
    let o = zeno(&["oracle", "--family", "large-spin", "--nspins", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "gamma",
        "--eps",
        "2",
        "--delta",
        "1",
        "--theta",
        "0.7",
        "--phi",
        "0.3",
        "--tau-points",
        "12",
    ];
    let a = zeno(&args);
    let b = zeno(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .env("ZENO_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_layout() {
    let o = zeno(&["filter", "--omega-points", "5"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# zeno filter");
    let params: Value = serde_json::from_str(lines[1].strip_prefix("# params: ").unwrap()).unwrap();
    assert_eq!(params["grid"]["points"], 5);
    assert_eq!(lines[2], "# units: omega [frequency], Q [time]");
    assert_eq!(lines[3], "omega,Q");
    assert_eq!(lines.len(), 9);
}

#[test]
fn rerun_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let p = path.to_str().unwrap();
    let o = zeno(&[
        "gamma",
        "--eps",
        "2",
        "--delta",
        "2",
        "--tau-points",
        "10",
        "--format",
        "json",
        "--out",
        p,
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let first = std::fs::read(&path).unwrap();
    assert_eq!(code(&zeno(&["rerun", p])), 0);
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn usage_and_validation_errors() {
    assert_eq!(code(&zeno(&["gamma", "--beta", "1", "--zero-temp"])), 2);
    assert_eq!(code(&zeno(&["filter", "--family", "decay", "--theta", "1"])), 2);
    assert_eq!(code(&zeno(&["filter", "--family", "dephasing", "--delta", "1"])), 2);
    assert_eq!(code(&zeno(&["filter", "--nspins", "3"])), 2);
    assert_eq!(code(&zeno(&["gamma", "--tau", "1", "--tau-min", "0.1"])), 2);
    assert_eq!(code(&zeno(&["bogus"])), 2);
    assert_eq!(code(&zeno(&["filter", "--G", "-1"])), 1);
    assert_eq!(code(&zeno(&["filter", "--tau", "0"])), 1);
    assert_eq!(code(&zeno(&["regimes", "--tau-points", "3"])), 1);
    let bad = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(["filter", "--omega-points", "3"])
        .env("ZENO_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn finite_temperature_runs() {
    let v = json_of(&[
        "gamma",
        "--eps",
        "2",
        "--delta",
        "2",
        "--beta",
        "1",
        "--tau-points",
        "6",
    ]);
    let cold = json_of(&["gamma", "--eps", "2", "--delta", "2", "--tau-points", "6"]);
    for (h, c) in floats(&v, "gamma").iter().zip(floats(&cold, "gamma")) {
        assert!(*h > c);
    }
}
