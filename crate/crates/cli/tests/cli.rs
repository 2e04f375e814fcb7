use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PHOTOELECTRIC: &str = r#"
schema_version = 1
seed = 7
n_max = 30

[frontend]
transmittance = 0.9

[detector]
model = "photoelectric"
efficiency = 0.8
max_outcome = 30
"#;

fn daps(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daps"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn daps")
}

fn ok(args: &[&str], dir: &Path) {
    let out = daps(args, dir);
    assert!(
        out.status.success(),
        "daps {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn photoelectric(state: &str, lo: &str, trials: Option<u64>) -> String {
    let trials = trials
        .map(|t| format!("trials = {t}\n"))
        .unwrap_or_default();
    format!("{trials}{PHOTOELECTRIC}\n[state]\n{state}\n\n[lo]\n{lo}\n")
}

#[test]
fn vacuum_at_zero_amplitude_gives_single_outcome() {
    let dir = TempDir::new().unwrap();
    config(
        dir.path(),
        "vac.toml",
        &photoelectric("kind = \"vacuum\"", "amplitudes = [0.0]", Some(500)),
    );
    ok(
        &["simulate", "--config", "vac.toml", "--output", "vac.json"],
        dir.path(),
    );
    let data = json(&dir.path().join("vac.json"));
    let settings = data["settings"].as_array().unwrap();
    assert_eq!(settings.len(), 1);
    let events = &settings[0]["events"];
    assert_eq!(events["total"], 500);
    assert_eq!(events["entries"], serde_json::json!([[[0, 0], 500]]));
}

#[test]
fn seeds_control_reproducibility() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "c.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "max_intensity = 4.0\nsettings = 5",
            Some(2000),
        ),
    );
    ok(&["simulate", "--config", "c.toml", "--output", "a.json"], p);
    ok(
        &[
            "simulate", "--config", "c.toml", "--output", "a.json", "--seed", "7",
        ],
        p,
    );
    let first = fs::read(p.join("a.json")).unwrap();
    ok(
        &[
            "simulate", "--config", "c.toml", "--output", "b.json", "--seed", "7",
        ],
        p,
    );
    ok(
        &[
            "simulate", "--config", "c.toml", "--output", "c.json", "--seed", "8",
        ],
        p,
    );
    let strip = |bytes: Vec<u8>| {
        let mut v: Value = serde_json::from_slice(&bytes).unwrap();
        v["metadata"]["label"] = Value::Null;
        v
    };
    assert_eq!(
        strip(first.clone()),
        strip(fs::read(p.join("b.json")).unwrap())
    );
    assert_ne!(
        strip(first)["settings"],
        strip(fs::read(p.join("c.json")).unwrap())["settings"]
    );
}

#[test]
fn detector_independent_amplitude_is_linear_in_lo_intensity() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "vac.toml",
        &photoelectric(
            "kind = \"vacuum\"",
            "max_intensity = 28.0\nsettings = 29",
            None,
        ),
    );
    ok(
        &["simulate", "--config", "vac.toml", "--output", "vac.json"],
        p,
    );
    ok(&["estimate", "vac.json", "--output", "vac.est.json"], p);
    let est = json(&p.join("vac.est.json"));
    let slope = 0.8 * 0.1;
    for s in est["settings"].as_array().unwrap() {
        let i = s["index"].as_u64().unwrap() as f64;
        let amp = f(&s["di_amplitude"]);
        assert!((amp * amp - slope * i).abs() < 1e-9, "setting {i}: {amp}");
    }
}

#[test]
fn vacuum_estimates_are_consistent_with_zero() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "vac.toml",
        &photoelectric(
            "kind = \"vacuum\"",
            "max_intensity = 8.0\nsettings = 9",
            Some(20_000),
        ),
    );
    ok(
        &["simulate", "--config", "vac.toml", "--output", "vac.json"],
        p,
    );
    let ones = format!("--zvec={}", vec!["1"; 31].join(","));
    ok(
        &[
            "estimate",
            "vac.json",
            "--output",
            "vac.est.json",
            "--z",
            "-1.5,1",
            &ones,
        ],
        p,
    );
    let est = json(&p.join("vac.est.json"));
    assert_eq!(est["kind"], "estimate");
    let summary = &est["summary"];
    for key in ["g_min", "mu_min"] {
        let e = &summary[key];
        assert!(f(&e["mean"]) > -4.0 * f(&e["delta"]), "{key}: {e}");
    }
    for s in est["settings"].as_array().unwrap() {
        let unit = &s["gz"][1];
        assert_eq!(f(&unit["mean"]), 1.0);
        assert_eq!(f(&unit["sigma"]), 0.0);
        assert!((f(&s["generating"][0]["mean"]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exact_single_photon_is_flagged_nonclassical() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f1.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "max_intensity = 4.0\nsettings = 5",
            None,
        ),
    );
    ok(
        &["simulate", "--config", "f1.toml", "--output", "f1.json"],
        p,
    );
    ok(&["estimate", "f1.json", "--output", "f1.est.json"], p);
    let summary = &json(&p.join("f1.est.json"))["summary"];
    assert_eq!(summary["g_min_negative"], true);
    assert_eq!(summary["mu_min_negative"], true);
    assert!(f(&summary["g_min"]["mean"]) < 0.0);
    let origin = &json(&p.join("f1.est.json"))["settings"][0]["gz"][0];
    let expected = 1.0 - 2.5 * 0.8 * 0.9;
    assert!((f(&origin["mean"]) - expected).abs() < 1e-12);
}

#[test]
fn vacuum_fit_recovers_analytic_gaussian() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f1.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "max_intensity = 16.0\nsettings = 17",
            None,
        ),
    );
    ok(
        &["simulate", "--config", "f1.toml", "--output", "f1.json"],
        p,
    );
    let out = p.join("out");
    ok(
        &["analyze", "f1.json", "--mode", "fit", "--output", "out"],
        p,
    );
    let fit = json(&out.join("f1.fit.json"));
    assert_eq!(fit["kind"], "fit");
    let vac = &fit["vacuum"]["model"];
    assert!((f(&vac["b"]) - 2.5).abs() < 1e-8, "{vac}");
    assert!((f(&vac["f"][0]) - 1.0).abs() < 1e-8);
    assert_eq!(fit["signal"]["model"]["f"].as_array().unwrap().len(), 2);

    ok(
        &[
            "analyze",
            "f1.json",
            "--mode",
            "fit",
            "--output",
            "raw",
            "--variable",
            "raw",
        ],
        p,
    );
    let raw = json(&p.join("raw/f1.fit.json"));
    assert!((f(&raw["vacuum"]["model"]["b"]) - 2.5 * 0.8 * 0.1).abs() < 1e-8);
    for name in ["f1.signal.csv", "f1.vacuum.csv", "f1.fit.csv"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn sampled_fock_prediction_agrees_with_data() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f2.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 2",
            "max_intensity = 16.0\nsettings = 17",
            Some(20_000),
        ),
    );
    ok(
        &["simulate", "--config", "f2.toml", "--output", "f2.json"],
        p,
    );
    ok(
        &["analyze", "f2.json", "--mode", "predict", "--output", "out"],
        p,
    );
    let pred = json(&p.join("out/f2.prediction.json"));
    assert_eq!(pred["kind"], "prediction");
    assert_eq!(pred["points"].as_array().unwrap().len(), 17);
    assert!(
        f(&pred["fraction_within_3_delta"]) >= 0.9,
        "{}",
        pred["fraction_within_3_delta"]
    );
    assert!((f(&pred["di_scale"]) - 0.08).abs() < 0.005);
    assert!(p.join("out/f2.predicted.csv").is_file());
}

#[test]
fn self_discrimination_matches_three_delta_band() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f1.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "max_intensity = 28.0\nsettings = 29",
            Some(5000),
        ),
    );
    ok(
        &["simulate", "--config", "f1.toml", "--output", "f1.json"],
        p,
    );
    fs::copy(p.join("f1.json"), p.join("g1.json")).unwrap();
    ok(
        &[
            "analyze",
            "f1.json",
            "g1.json",
            "--mode",
            "discriminate",
            "--output",
            "out",
        ],
        p,
    );
    let report = json(&p.join("out/discrimination.json"));
    let probs = &report["probabilities"];
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (f(&probs[i][j]) - 0.075).abs() < 0.001,
                "({i},{j}): {}",
                probs[i][j]
            );
        }
    }
    let csv = fs::read_to_string(p.join("out/discrimination.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn optimal_z_locates_origin_minimum() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f1.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "amplitudes = [0.0, 1.0]",
            None,
        ),
    );
    ok(
        &["simulate", "--config", "f1.toml", "--output", "f1.json"],
        p,
    );
    ok(
        &[
            "analyze",
            "f1.json",
            "--mode",
            "optimal-z",
            "--output",
            "out",
            "--grid",
            "-3:0:0.5",
        ],
        p,
    );
    let report = json(&p.join("out/f1.optimal_z.json"));
    assert_eq!(report["setting"], 0);
    assert_eq!(f(&report["z"]), -3.0);
    assert!((f(&report["estimate"]["mean"]) - (1.0 - 4.0 * 0.72)).abs() < 1e-12);
    assert_eq!(report["nonnegative"], false);
}

#[test]
fn heralding_writes_one_dataset_per_outcome() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let body = format!(
        "trials = 2000\n{PHOTOELECTRIC}\n[lo]\nmax_intensity = 4.0\nsettings = 5\n\n[heralding]\nsqueezing = 0.3\ntransmittance = 0.4\noutcomes = [0, 1]\n"
    );
    config(p, "her.toml", &body);
    ok(
        &["simulate", "--config", "her.toml", "--output", "her.json"],
        p,
    );
    for k in 0..2 {
        let data = json(&p.join(format!("her.kh{k}.json")));
        assert_eq!(data["metadata"]["heralding_outcome"], k);
        assert!(f(&data["metadata"]["heralding_probability"]) > 0.0);
    }
    assert!(!p.join("her.json").exists());

    ok(
        &[
            "simulate",
            "--config",
            "her.toml",
            "--output",
            "only.json",
            "--khs",
            "2",
        ],
        p,
    );
    assert!(p.join("only.kh2.json").is_file());
    assert!(!p.join("only.kh0.json").exists());

    ok(
        &[
            "analyze",
            "her.kh1.json",
            "--mode",
            "fit",
            "--output",
            "out",
        ],
        p,
    );
    let fit = json(&p.join("out/her.kh1.fit.json"));
    assert_eq!(fit["signal"]["model"]["f"].as_array().unwrap().len(), 2);
}

#[test]
fn report_collects_records() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    config(
        p,
        "f1.toml",
        &photoelectric(
            "kind = \"fock\"\nphotons = 1",
            "max_intensity = 8.0\nsettings = 9",
            None,
        ),
    );
    ok(
        &["simulate", "--config", "f1.toml", "--output", "f1.json"],
        p,
    );
    ok(&["estimate", "f1.json", "--output", "f1.est.json"], p);
    ok(&["analyze", "f1.json", "--mode", "fit", "--output", "."], p);
    ok(
        &[
            "report",
            "f1.est.json",
            "f1.fit.json",
            "--output",
            "report.md",
        ],
        p,
    );
    let md = fs::read_to_string(p.join("report.md")).unwrap();
    assert!(md.starts_with("# "));
    assert!(
        md.contains("## f1.est.json") && md.contains("## f1.fit.json"),
        "{md}"
    );
    assert!(md.contains("g_min") && md.contains("|beta_DI|^2"));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let code = |args: &[&str]| daps(args, p).status.code();

    assert_eq!(
        code(&["simulate", "--config", "missing.toml", "--output", "x.json"]),
        Some(5)
    );

    let unknown = photoelectric("kind = \"vacuum\"", "amplitudes = [0.0]", None)
        .replace("seed = 7", "seed = 7\nsede = 1");
    config(p, "unknown.toml", &unknown);
    let out = daps(
        &["simulate", "--config", "unknown.toml", "--output", "x.json"],
        p,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));

    let truncated = photoelectric("kind = \"fock\"\nphotons = 1", "amplitudes = [2.0]", None)
        .replace("n_max = 30", "n_max = 2")
        .replace("max_outcome = 30", "max_outcome = 2");
    config(p, "trunc.toml", &truncated);
    assert_eq!(
        code(&["simulate", "--config", "trunc.toml", "--output", "x.json"]),
        Some(4)
    );
    assert!(!p.join("x.json").exists());

    assert_eq!(
        code(&["estimate", "missing.json", "--output", "e.json"]),
        Some(5)
    );
}
