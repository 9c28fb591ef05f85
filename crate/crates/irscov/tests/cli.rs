use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irscov::config;
use irscov::output::{read_csv, round12, write_csv, Provenance};
use irscov::sweep::{run_sweep, OutputRow, SweepOptions};
use irscov_core::coverage::Mode;
use irscov_core::montecarlo::SimConfig;
use tempfile::TempDir;

const HEAD: &str = r#"
[geometry]
r = 500.0
d = 100.0
psi_deg = 85.0
alpha = 4.0
zeta = 1.0

[fading]
m = 1.0

[system]
power_w = 2.5
n_elements = 100
theta_db = 5.0
bandwidth_hz = 1.0e8
noise_figure_db = 10.0
"#;

fn write_config(dir: &TempDir, sweep: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, format!("{HEAD}\n{sweep}")).unwrap();
    path
}

fn irscov(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irscov"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

const THETA_SWEEP: &str = r#"
[sweep]
variable = "theta_db"
grid = [0.0, 5.0, 10.0]
modes = ["direct_only", "combined"]
regimes = ["finite_inid"]

[simulation]
samples = 4000
seed = 3
streams = 4
"#;

#[test]
fn csv_round_trip() {
    let loaded = config::parse(&format!("{HEAD}\n{THETA_SWEEP}")).unwrap();
    let opts = SweepOptions {
        sim: Some(loaded.sim),
        timings: false,
    };
    let rows = run_sweep(&loaded.base, loaded.sweep.as_ref().unwrap(), &opts).unwrap();
    assert_eq!(rows.len(), 6);
    let prov = Provenance {
        config_hash: loaded.hash.clone(),
        settings: vec![("seed".into(), "3".into())],
    };
    let mut buf = Vec::new();
    write_csv(&rows, &prov, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(&format!(
        "# irscov {} config-hash={}\n# seed=3\n",
        irscov::output::VERSION,
        loaded.hash
    )));
    assert!(text
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("variable,value,series,series_value,mode,regime,analytic"));

    let back: Vec<OutputRow> = read_csv(buf.as_slice()).unwrap();
    let rounded: Vec<OutputRow> = rows
        .iter()
        .map(|r| OutputRow {
            value: round12(r.value),
            analytic: round12(r.analytic),
            analytic_abs_error: round12(r.analytic_abs_error),
            mc: r.mc.map(round12),
            mc_std_error: r.mc_std_error.map(round12),
            ..r.clone()
        })
        .collect();
    assert_eq!(back, rounded);
}

#[test]
fn json_rows_follow_grid_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, THETA_SWEEP);
    let out = irscov(&["sweep", "--format", "json"], &cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<(f64, &str)> = rows
        .iter()
        .map(|r| (r["value"].as_f64().unwrap(), r["mode"].as_str().unwrap()))
        .collect();
    assert_eq!(
        keys,
        [
            (0.0, "direct_only"),
            (0.0, "combined"),
            (5.0, "direct_only"),
            (5.0, "combined"),
            (10.0, "direct_only"),
            (10.0, "combined")
        ]
    );
    // plain sweep without validate leaves the oracle columns empty
    assert!(rows
        .iter()
        .all(|r| r["mc"].is_null() && r["runtime_ms"].is_null()));
    let p: Vec<f64> = rows
        .iter()
        .map(|r| r["analytic"].as_f64().unwrap())
        .collect();
    assert!(p[1] >= p[0] && p[3] >= p[2] && p[4] <= p[2]);
}

#[test]
fn validate_matches_library_and_seed_matters() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, THETA_SWEEP);
    let a = irscov(&["validate", "--seed", "11"], &cfg);
    let b = irscov(&["validate", "--seed", "12"], &cfg);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap() == "# seed=11 samples=4000 streams=4 antithetic=false");

    let loaded = config::load(&cfg).unwrap();
    let sim = SimConfig {
        seed: 11,
        ..loaded.sim
    };
    let opts = SweepOptions {
        sim: Some(sim),
        timings: false,
    };
    let rows = run_sweep(&loaded.base, loaded.sweep.as_ref().unwrap(), &opts).unwrap();
    let parsed: Vec<OutputRow> = read_csv(text.as_bytes()).unwrap();
    for (x, y) in rows.iter().zip(&parsed) {
        assert_eq!(round12(x.mc.unwrap()), y.mc.unwrap());
        assert!((x.analytic - y.mc.unwrap()).abs() < 5.0 * y.mc_std_error.unwrap() + 1e-3);
    }
}

#[test]
fn bad_config_reports_record_and_exit_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[sweep]\nvariable = \"theta_db\"\ngrid = [1.0]\nmodes = [\"sideways\"]\n",
    );
    let out = irscov(&["sweep"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "config");
    assert_eq!(record["exit_code"], 2);

    // an unreadable config is a config error, not an output one
    let missing = irscov(&["sweep"], &dir.path().join("absent.toml"));
    assert_eq!(missing.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert!(record["message"].as_str().unwrap().contains("absent.toml"));

    let out_dir = dir.path().join("no/such/dir/rows.csv");
    let good = write_config(&dir, THETA_SWEEP);
    let unwritable = Command::new(env!("CARGO_BIN_EXE_irscov"))
        .args(["sweep", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(4));

    let unsorted = write_config(
        &dir,
        "[sweep]\nvariable = \"theta_db\"\ngrid = [5.0, 1.0]\nmodes = [\"combined\"]\n",
    );
    assert_eq!(irscov(&["sweep"], &unsorted).status.code(), Some(2));
}

#[test]
fn output_file_and_timings() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, THETA_SWEEP);
    let path = dir.path().join("rows.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_irscov"))
        .args(["sweep", "--timings", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success() && out.stdout.is_empty());
    let rows: Vec<OutputRow> = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.runtime_ms.is_some_and(|t| t >= 0.0)));
}

#[test]
fn range_and_hardening_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[sweep]\nvariable = \"n_elements\"\ngrid = [50.0, 200.0]\nmodes = [\"irs_only\"]\n\
         series = { variable = \"shape_m\", values = [0.5, 2.0] }\n",
    );
    let out = irscov(&["range", "--format", "json"], &cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    // range grows as N^(2/alpha) = sqrt(N) for alpha = 4
    let d = |i: usize| rows[i]["distance"].as_f64().unwrap();
    assert!((d(1) / d(0) - 2.0).abs() < 1e-9);
    assert!(rows.iter().all(|r| r["valid"] == true));

    let out = irscov(&["hardening", "--format", "json"], &cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    let k = |i: usize| rows[i]["kappa"].as_f64().unwrap();
    assert!((k(1) / k(0) - 2.0).abs() < 1e-9);
    assert!(rows[0]["mc_ratio"].is_null());
    assert!((rows[2]["kappa_iid"].as_f64().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn crossover_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[sweep]\nvariable = \"distance_d\"\ngrid = { start = 5.0, stop = 60.0, points = 12 }\n\
         modes = [\"direct_only\", \"irs_only\", \"combined\"]\n",
    );
    let out = irscov(&["crossover", "--format", "json"], &cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    let irs_direct = table
        .iter()
        .find(|c| {
            c["kind"] == "crossing" && c["first"] == "irs_only" && c["second"] == "direct_only"
        })
        .expect("IRS-only link loses to the direct link with distance");
    let d = irs_direct["distance"].as_f64().unwrap();
    assert!(d > 5.0 && d < 60.0);
    assert!(table.iter().all(|c| c["regime"] == "finite_inid"));

    let other = write_config(&dir, THETA_SWEEP);
    let out = irscov(&["crossover", "--format", "json"], &other);
    let table: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(table.is_empty());
}

#[test]
fn antithetic_pairs_keep_estimates_close() {
    let loaded = config::parse(&format!("{HEAD}\n{THETA_SWEEP}")).unwrap();
    let spec = loaded.sweep.unwrap();
    let run = |antithetic| {
        let sim = SimConfig {
            samples: 20_000,
            antithetic,
            ..loaded.sim
        };
        let opts = SweepOptions {
            sim: Some(sim),
            timings: false,
        };
        run_sweep(&loaded.base, &spec, &opts).unwrap()
    };
    for (a, b) in run(false).iter().zip(run(true)) {
        assert_eq!(a.mode, b.mode);
        let se = a.mc_std_error.unwrap().max(1e-3);
        assert!((a.mc.unwrap() - b.mc.unwrap()).abs() < 6.0 * se);
        if a.mode == Mode::Combined {
            assert!((b.mc.unwrap() - b.analytic).abs() < 6.0 * se);
        }
    }
}
