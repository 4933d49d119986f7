use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bohm_vortex::cli::ExperimentConfig;
use bohm_vortex::wavefunction::{evaluate_psi, SuperpositionState};

const BIN: &str = env!("CARGO_BIN_EXE_bohm-vortex");
const G1: f64 = 3.876968;
const G2: f64 = 2.684916;

fn oscillator(a_over_b: f64, extra: &str) -> String {
    format!("[model]\nkind = \"oscillator\"\n\n[state]\na_over_b = {a_over_b}\ngamma1 = {G1}\ngamma2 = {G2}\n\n{extra}")
}

fn run(cmd: &str, config: &str, out: &Path) -> Output {
    let cfg = out.with_extension("toml");
    fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"])
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn empty_seed_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = run("section", &oscillator(0.0, "[seeds]\npoints = []\n"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("section.csv")).unwrap(), "seed_id,n,x,y,status\n");
    assert!(fs::read_to_string(out.join("section.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn section_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oscillator(0.0553, "[seeds]\npoints = [[0.3, 0.2], [0.8, -0.4], [-0.5, 0.6]]\n\n[section]\nperiods = 15\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("section", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("section", &cfg, &b).status.code(), Some(0));
    for f in ["section.csv", "section.svg", "config.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let rows = csv_rows(&a.join("section.csv"));
    for id in 0..3 {
        let seed: Vec<_> = rows.iter().filter(|r| r[0] == id.to_string()).collect();
        if seed[0][4] == "COMPLETED" {
            assert_eq!(seed.len(), 16);
        } else {
            assert!(seed.len() < 16);
        }
        for (n, r) in seed.iter().enumerate() {
            assert_eq!(r[1], n.to_string());
            // 17 significant digits
            assert_eq!(r[2].split('e').next().unwrap().trim_start_matches('-').len(), 18);
        }
    }
}

#[test]
fn written_config_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let cfg = oscillator(0.0, "[seeds]\npoints = [[0.4, 0.1]]\n\n[section]\nperiods = 2\n");
    assert_eq!(run("section", &cfg, &out).status.code(), Some(0));
    let written = ExperimentConfig::parse(&fs::read_to_string(out.join("config.toml")).unwrap()).unwrap();
    assert_eq!(written, ExperimentConfig::parse(&cfg).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("section", &oscillator(-0.5, ""), &dir.path().join("neg"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state.a_over_b"));

    let o = run("section", "[model]\nkind = \"oscillator\"\n", &dir.path().join("nostate"));
    assert_eq!(o.status.code(), Some(2));

    let o = run("section", &oscillator(0.1, "[integrator]\nrel_tol = -1.0\n"), &dir.path().join("tol"));
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(BIN)
        .args(["section", "--config", "/nonexistent/x.toml", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(BIN).args(["bogus", "--config", "x", "--out", "y"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_state_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\nkind = \"oscillator\"\n\n[state]\na_over_b = 0.1\ngamma1 = 1.0\ngamma2 = 1.0\n";
    let o = run("vortex-path", cfg, &dir.path().join("v"));
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, oscillator(0.0, "[seeds]\npoints = []\n")).unwrap();
    let base = |env: &str| {
        Command::new(BIN)
            .args(["section", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()])
            .env("BOHM_VORTEX_THREADS", env)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(base("3"), Some(0));
    assert_eq!(base("many"), Some(2));
    assert_eq!(base("0"), Some(2));
}

#[test]
fn vortex_path_stationary_at_zero_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    assert_eq!(run("vortex-path", &oscillator(0.0, ""), &out).status.code(), Some(0));
    let rows = csv_rows(&out.join("vortex.csv"));
    assert_eq!(rows.len(), 512);
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn vortex_path_samples_are_zeros_of_psi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let cfg = oscillator(0.17651, "[vortex_path]\noverlay_ratios = [0.0553]\n");
    assert_eq!(run("vortex-path", &cfg, &out).status.code(), Some(0));
    let state = SuperpositionState::from_ratio(0.17651, G1, G2).unwrap();
    let rows = csv_rows(&out.join("vortex.csv"));
    assert_eq!(rows.len(), 512);
    let mut extent: f64 = 0.0;
    for r in rows {
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        assert!(evaluate_psi(&state, v[1], v[2], v[0]).norm() < 1e-10);
        extent = extent.max(v[1].hypot(v[2]));
    }
    assert!(extent > 0.0);
    assert_eq!(fs::read_to_string(out.join("vortex.svg")).unwrap().matches("<polyline").count(), 2);
}

#[test]
fn fixed_point_reports_saddle_and_failed_guesses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let cfg = oscillator(0.02175, "[fixed_point]\nguesses = [[0.6, 0.75], [0.0, 3.0]]\n");
    let o = run("fixed-point", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fixed_points.json")).unwrap()).unwrap();
    let saddle = report["fixed_points"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["classification"] == "SADDLE")
        .expect("saddle found");
    let (x, y) = (saddle["location"]["x"].as_f64().unwrap(), saddle["location"]["y"].as_f64().unwrap());
    assert!((x - 0.6).hypot(y - 0.75) < 0.2);
    assert!(saddle["jacobian"].is_array());
    let guesses = report["guesses"].as_array().unwrap();
    assert_eq!(guesses.len(), 2);
    assert_eq!(guesses[0]["status"], "CONVERGED");
    assert_ne!(guesses[1]["status"], "CONVERGED");
}

#[test]
fn lyapunov_integrable_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l");
    let cfg = oscillator(0.0, "[seeds]\npoints = [[0.3, 0.2], [-0.7, 0.4]]\n\n[lyapunov]\nperiods = 200\n");
    assert_eq!(run("lyapunov", &cfg, &out).status.code(), Some(0));
    let rows = csv_rows(&out.join("lyapunov.csv"));
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r[3].parse::<f64>().unwrap().abs() < 1e-3, "{r:?}");
        assert_eq!(r[6], "COMPLETE");
        assert_eq!(r[7], "0");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("lyapunov.json")).unwrap()).unwrap();
    assert_eq!(meta["threshold_per_period"], 0.01);
}

#[test]
fn manifolds_and_scan_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let cfg = oscillator(
        0.02175,
        "[seeds]\npoints = [[0.3, 0.2]]\n\n[manifolds]\nmax_arclength = 0.5\nsection_periods = 5\n\n[scan]\na_over_b = [0.0, 0.17651]\nperiods = 5\n\n[section]\nperiods = 5\n",
    );
    let o = run("manifolds", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("manifolds.csv"));
    for b in ["unstable+", "unstable-", "stable+", "stable-"] {
        assert!(rows.iter().any(|r| r[0] == b));
    }
    assert!(out.join("homoclinic.json").exists() && out.join("manifolds.svg").exists());

    let out = dir.path().join("scan");
    assert_eq!(run("scan", &cfg, &out).status.code(), Some(0));
    assert_eq!(csv_rows(&out.join("scan.csv")).len(), 2);
    assert_eq!(csv_rows(&out.join("scan_seeds.csv")).len(), 2);
    assert_eq!(csv_rows(&out.join("section_1.csv")).len(), 6);
    assert!(out.join("section_0.svg").exists() && out.join("scan.json").exists());
}

#[test]
fn point_vortex_section() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let cfg = "[model]\nkind = \"point_vortex\"\n\n[path]\nkind = \"stationary\"\nperiod = 3.14159\n\n[seeds]\npoints = [[0.5, 0.0]]\n\n[section]\nperiods = 4\n";
    assert_eq!(run("section", cfg, &out).status.code(), Some(0));
    let rows = csv_rows(&out.join("section.csv"));
    assert_eq!(rows.len(), 5);
    for r in rows {
        let (x, y): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((x.hypot(y) - 0.5).abs() < 1e-6);
    }
    // vortex-path is an oscillator-only command
    assert_eq!(run("vortex-path", cfg, &dir.path().join("q")).status.code(), Some(2));
}
