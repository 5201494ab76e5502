use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use fss_cli::{preset, ExperimentConfig, ExperimentKind, PRESETS};

fn fss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fss"))
        .args(args)
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"
kind = "chi-z-fss"
sizes = [16, 24, 32]
ns = [0, 3]

[drive]
dh = 0.1
omega = 6.283185307179586

[grid]
mode = "scaled"
x_min = -4.0
x_max = 4.0
count = 17
"#;

#[test]
fn lists_every_preset() {
    let o = fss(&["list-presets"]);
    assert!(o.status.success());
    let t = text(&o);
    for p in PRESETS {
        assert!(t.contains(p.name), "{t}");
    }
    for name in ["fig1", "fig2", "fig3", "fig4", "methods", "low-omega"] {
        assert!(preset(name).unwrap().validate(1).is_ok(), "{name}");
    }
}

#[test]
fn empty_sizes_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL.replace("sizes = [16, 24, 32]", "sizes = []"),
    );
    let o = fss(&["validate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(text(&o).contains("empty size list"), "{}", text(&o));
    let out = dir.path().join("out");
    let o = fss(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.join("observables.csv").exists());
}

#[test]
fn unknown_kind_names_valid_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("chi-z-fss", "magnon-fss"));
    let o = fss(&["validate", "--config", &cfg]);
    assert!(!o.status.success());
    let t = text(&o);
    assert!(t.contains("magnon-fss"));
    for k in ExperimentKind::ALL {
        assert!(t.contains(k.as_str()), "{t}");
    }
}

#[test]
fn zero_tolerance_rejected() {
    let cfg = ExperimentConfig::from_toml(&format!("{SMALL}\n[numerics]\ntol = 0.0\n")).unwrap();
    let d = cfg.validate(1);
    assert!(d.errors.iter().any(|e| e.contains("tolerance")), "{d:?}");
}

#[test]
fn entropy_memory_estimate_before_execution() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace("chi-z-fss", "entropy-fss")
        .replace("sizes = [16, 24, 32]", "sizes = [4096]");
    let cfg = write_config(dir.path(), &body);
    let o = fss(&["validate", "--config", &cfg, "--workers", "2"]);
    let t = text(&o);
    assert!(o.status.success(), "{t}");
    let mib: f64 = t
        .lines()
        .find_map(|l| l.strip_prefix("estimated memory: "))
        .and_then(|l| l.strip_suffix(" MiB"))
        .unwrap()
        .parse()
        .unwrap();
    // two concurrent 4096 x 4096 eigensolves
    assert!(mib > 2.0 * 4.0 * 8.0 * 4096.0 * 4096.0 / 1048576.0, "{mib}");
    let tight = format!("{body}\n[budget]\nmax_memory_mb = 100.0\n");
    let o = fss(&["validate", "--config", &write_config(dir.path(), &tight)]);
    assert!(!o.status.success());
    assert!(text(&o).contains("max_memory_mb"));
}

#[test]
fn runs_are_deterministic_and_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut sums = Vec::new();
    for (i, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = fss(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
            "--seed",
            "7",
        ]);
        assert!(o.status.success(), "{}", text(&o));
        let m = json(&out.join("manifest.json"));
        assert_eq!(m["valid"], Value::Bool(true));
        assert_eq!(m["config"]["seed"], 7);
        let files: Vec<(String, String)> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| {
                (
                    f["file"].as_str().unwrap().to_owned(),
                    f["sha256"].as_str().unwrap().to_owned(),
                )
            })
            .collect();
        assert_eq!(files.len(), 2);
        for (f, sum) in &files {
            let actual = fss_cli::run::checksum(&out.join(f)).unwrap().sha256;
            assert_eq!(&actual, sum, "{f}");
        }
        sums.push(files);
    }
    assert_eq!(sums[0], sums[1]);
    assert_eq!(sums[0], sums[2]);
}

#[test]
fn csv_schema_and_k_resolved_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
kind = "loschmidt-work"
sizes = [16]
ns = [0, 2]

[drive]
dh = 0.1
omega = 2.0

[grid]
mode = "fixed"
min = 1.0
max = 1.0
count = 1
"#;
    let out = dir.path().join("out");
    let o = fss(&[
        "run",
        "--config",
        &write_config(dir.path(), body),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let mut r = csv::Reader::from_path(out.join("observables.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, fss_cli::run::CSV_HEADER);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    // two kinds, two times, eight modes each
    assert_eq!(rows.len(), 2 * 2 * 8);
    for row in &rows {
        let k: usize = row[8].parse().unwrap();
        assert!(k < 8);
        let v: f64 = row[9].parse().unwrap();
        assert!(v.is_finite());
    }
    let a = json(&out.join("analysis.json"));
    let cell = &a["spectrum"]["cells"][0];
    assert_eq!(cell["n_sites"], 16);
    assert!(cell["t_rec"].as_f64().unwrap() > 0.0);
}

#[test]
fn failing_analysis_marks_outputs_invalid() {
    let dir = tempfile::tempdir().unwrap();
    // chi_z is monotone on this window, so no collapse baseline exists
    let body = SMALL.replace("chi-z-fss", "breakdown-scan").replace(
        "mode = \"scaled\"\nx_min = -4.0\nx_max = 4.0",
        "mode = \"fixed\"\nmin = 1.5\nmax = 2.0",
    );
    let out = dir.path().join("out");
    let o = fss(&[
        "run",
        "--config",
        &write_config(dir.path(), &body),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(text(&o).contains("marked invalid"), "{}", text(&o));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["valid"], Value::Bool(false));
    assert!(m["error"].as_str().unwrap().contains("baseline"));
    assert!(!out.join("analysis.json").exists());
}

#[test]
fn config_round_trips_through_toml() {
    for p in PRESETS {
        let cfg = (p.config)();
        assert_eq!(
            ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(),
            cfg,
            "{}",
            p.name
        );
    }
}

fn run_preset(name: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join(name);
    let o = fss(&["run", "--preset", name, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    json(&out.join("analysis.json"))
}

#[test]
fn fig1_preset_collapses_with_nu_one() {
    let a = run_preset("fig1");
    for t in a["fss"]["times"].as_array().unwrap() {
        let nu = t["nu"]["nu"].as_f64().unwrap();
        assert!((nu - 1.0).abs() < 0.05, "n = {}: nu = {nu}", t["n"]);
        assert!(t["log_divergence"]["r_squared"].as_f64().unwrap() >= 0.99);
    }
}

#[test]
fn fig2_preset_r_decreases_from_one() {
    let a = run_preset("fig2");
    let rs: Vec<f64> = a["fss"]["times"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["r"]["r"].as_f64().unwrap())
        .collect();
    assert!((rs[0] - 1.0).abs() <= 0.02, "{rs:?}");
    assert!(rs.windows(2).all(|w| w[1] < w[0]), "{rs:?}");
}
