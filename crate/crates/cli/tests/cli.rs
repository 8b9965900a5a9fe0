use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL_GRID: &str = "
[grid]
n = 32
half_width = 8.0
[kgrid]
nk = 16
half_width = 2.0
";

struct Run {
    out: PathBuf,
    code: i32,
    output: Output,
}

impl Run {
    fn summary(&self) -> Value {
        let text = std::fs::read_to_string(self.out.join("summary.json")).expect("summary.json");
        serde_json::from_str(&text).unwrap()
    }

    fn read(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.out.join(name)).unwrap()
    }
}

fn nvlab(dir: &Path, config: &str, args: &[&str], env: &[(&str, &str)]) -> Run {
    let cfg = dir.join("config-in.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nvlab"));
    cmd.arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(args);
    for var in ["NVLAB_CONFIG", "NVLAB_OUT", "NVLAB_WORKERS", "NVLAB_SEED"] {
        cmd.env_remove(var);
    }
    cmd.envs(env.iter().copied());
    let output = cmd.output().unwrap();
    Run {
        out,
        code: output.status.code().unwrap(),
        output,
    }
}

fn gaussian(amplitude: f64) -> String {
    format!("{SMALL_GRID}\n[datum]\nfamily = \"gaussian\"\namplitude = {amplitude}\n")
}

#[test]
fn help_lists_exit_codes() {
    let out = Command::new(env!("CARGO_BIN_EXE_nvlab"))
        .arg("--help")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    for needle in [
        "evolve",
        "scatter",
        "miura",
        "spectrum",
        "gn-scan",
        "validate",
        "Exit codes",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn scatter_writes_artifacts_and_gates_on_involution() {
    let dir = TempDir::new().unwrap();
    // k-box truncation at half width 2 exceeds the default involution bound.
    let run = nvlab(dir.path(), &gaussian(0.5), &["scatter"], &[]);
    assert_eq!(
        run.code,
        6,
        "{}",
        String::from_utf8_lossy(&run.output.stderr)
    );
    let s = run.summary();
    assert_eq!(s["status"], "gate_failed");
    assert!(s["results"]["involution_error"].as_f64().unwrap() > 2e-2);
    for f in [
        "config.toml",
        "config.sha256",
        "diagnostics.csv",
        "scattering.field",
        "scattering.field.json",
    ] {
        assert!(run.out.join(f).exists(), "missing {f}");
    }
    let hash = String::from_utf8(run.read("config.sha256")).unwrap();
    assert_eq!(hash.trim(), s["config_hash"]);

    let dir = TempDir::new().unwrap();
    let loose = format!("{}\n[tolerances]\ninvolution = 0.2\n", gaussian(0.5));
    let run = nvlab(dir.path(), &loose, &["scatter"], &[]);
    assert_eq!(run.code, 0);
    let ratio = run.summary()["results"]["plancherel_ratio"]
        .as_f64()
        .unwrap();
    assert!((ratio - 1.0).abs() < 2e-2, "{ratio}");
}

#[test]
fn zero_field_scatters_to_zero() {
    let dir = TempDir::new().unwrap();
    let run = nvlab(dir.path(), &gaussian(0.0), &["scatter"], &[]);
    assert_eq!(run.code, 0);
    assert_eq!(run.summary()["results"]["involution_error"], 0.0);
}

#[test]
fn unreachable_jost_tolerance_reports_failed_nodes() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{}\n[tolerances]\njost = 1e-300\n", gaussian(0.5));
    let run = nvlab(dir.path(), &cfg, &["scatter"], &[]);
    assert_eq!(run.code, 5);
    let s = run.summary();
    assert_eq!(s["status"], "partial_scattering");
    assert!(!s["results"]["failed"].as_array().unwrap().is_empty());
}

#[test]
fn reruns_are_bitwise_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = format!(
        "command = \"evolve\"\n{}\n[time]\nt_final = 0.05\nsaves = 5\n",
        gaussian(0.5)
    );
    let ra = nvlab(a.path(), &cfg, &["--workers", "1"], &[]);
    let rb = nvlab(b.path(), &cfg, &["--workers", "3"], &[]);
    assert_eq!(ra.code, 0);
    for f in ["summary.json", "diagnostics.csv", "config.sha256"] {
        assert_eq!(ra.read(f), rb.read(f), "{f} differs");
    }
}

#[test]
fn environment_overrides_the_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = format!("command = \"evolve\"\n{}", gaussian(0.2));
    let ra = nvlab(a.path(), &cfg, &[], &[]);
    let rb = nvlab(b.path(), &cfg, &[], &[("NVLAB_SEED", "99")]);
    assert_eq!((ra.code, rb.code), (0, 0));
    assert_ne!(ra.summary()["config_hash"], rb.summary()["config_hash"]);
    let resolved = String::from_utf8(rb.read("config.toml")).unwrap();
    assert!(resolved.contains("seed = 99"));
}

#[test]
fn focusing_profile_blows_up_with_a_bracket() {
    let dir = TempDir::new().unwrap();
    let cfg = "
model = \"NV\"
[grid]
n = 64
half_width = 8.0
[datum]
family = \"nv_focusing\"
amplitude = 40.0
width = 0.5
[time]
t_final = 0.5
saves = 50
";
    let run = nvlab(dir.path(), cfg, &["evolve"], &[]);
    assert_eq!(run.code, 4);
    let b = &run.summary()["results"]["blow_up"];
    let (good, hit) = (
        b["last_good"].as_f64().unwrap(),
        b["detected"].as_f64().unwrap(),
    );
    assert!(0.0 < good && good < hit && hit <= 0.5, "{b}");
    assert!(run.out.join("trajectory").is_dir());
}

#[test]
fn miura_roundtrips_the_constrained_corpus() {
    let dir = TempDir::new().unwrap();
    let run = nvlab(
        dir.path(),
        "[grid]\nn = 64\nhalf_width = 8.0\n",
        &["miura"],
        &[],
    );
    assert_eq!(
        run.code,
        0,
        "{}",
        String::from_utf8_lossy(&run.output.stderr)
    );
    let members = run.summary()["results"]["members"]
        .as_array()
        .unwrap()
        .clone();
    assert!(!members.is_empty());
    for m in members {
        assert!(m["roundtrip_error"].as_f64().unwrap() <= 1e-8, "{m}");
    }
}

#[test]
fn spectrum_of_zero_potential_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = "[grid]\nn = 32\nhalf_width = 8.0\n[datum]\nfamily = \"deep_well\"\ndepth = 0.0\n";
    let run = nvlab(dir.path(), cfg, &["spectrum"], &[]);
    assert_eq!(run.code, 0);
    let s = run.summary();
    assert!(s["results"]["lambda_min"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(s["results"]["nonnegative"], true);
    assert!(run.out.join("classifier.json").exists());
}

#[test]
fn spectrum_flags_a_deep_well() {
    let dir = TempDir::new().unwrap();
    let cfg = "[grid]\nn = 32\nhalf_width = 8.0\n[datum]\nfamily = \"deep_well\"\ndepth = 10.0\n";
    let run = nvlab(dir.path(), cfg, &["spectrum"], &[]);
    assert_eq!(run.code, 0);
    let r = &run.summary()["results"];
    assert!(r["lambda_min"].as_f64().unwrap() < -1.0);
    assert_eq!(r["nonnegative"], false);
    assert_eq!(r["consistent"], true);
}

#[test]
fn gn_scan_writes_one_row_per_ratio() {
    let dir = TempDir::new().unwrap();
    let cfg = "[ensemble]\ncount = 2\nlambdas = [1.0, 2.0]\np = 0.0\n";
    let run = nvlab(dir.path(), cfg, &["gn-scan"], &[]);
    assert_eq!(run.code, 0);
    let csv = String::from_utf8(run.read("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    let spread = run.summary()["results"]["fixed"]["max_scale_spread"]
        .as_f64()
        .unwrap();
    assert!(spread <= 2.0, "{spread}");
}

#[test]
fn validate_runs_selected_gates() {
    let dir = TempDir::new().unwrap();
    let run = nvlab(dir.path(), "gates = [\"A8\", \"a6\"]\n", &["validate"], &[]);
    assert_eq!(
        run.code,
        0,
        "{}",
        String::from_utf8_lossy(&run.output.stdout)
    );
    let stdout = String::from_utf8(run.output.stdout.clone()).unwrap();
    assert!(stdout.contains("A8") && stdout.contains("PASS"));
    let gates: Value = serde_json::from_slice(&run.read("gates.json")).unwrap();
    assert_eq!(gates.as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_2_and_still_write_a_summary() {
    let dir = TempDir::new().unwrap();
    let run = nvlab(dir.path(), "gird = 3\n", &["evolve"], &[]);
    assert_eq!(run.code, 2);
    assert_eq!(run.summary()["status"], "usage_error");

    let dir = TempDir::new().unwrap();
    let run = nvlab(
        dir.path(),
        &format!("{SMALL_GRID}\n[time]\ndt = -1.0\n"),
        &["evolve"],
        &[],
    );
    assert_eq!(run.code, 2);

    let dir = TempDir::new().unwrap();
    let run = nvlab(dir.path(), "", &["evolve"], &[]);
    assert_eq!(run.code, 2, "evolve without a datum");
}

#[test]
fn oversized_step_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{SMALL_GRID}\n[datum]\nfamily = \"gaussian\"\namplitude = 50.0\n[time]\nt_final = 0.5\ndt = 0.5\n"
    );
    let run = nvlab(dir.path(), &cfg, &["evolve"], &[]);
    assert_eq!(run.code, 2);
    let err = run.summary()["error"].as_str().unwrap().to_string();
    assert!(err.contains("dt_max"), "{err}");
}
