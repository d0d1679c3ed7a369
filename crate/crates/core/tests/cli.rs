use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use superrad::config::parse_config;
use superrad::run;

const ACCEPTANCE: &str = "seed = 11
[ensemble]
n_atoms = 1
gamma1 = 1e-3
s0 = 1.0
[medium]
mode = \"direct\"
alpha = 1e-3
[solver]
kind = \"averaged\"
g = 10
w0 = 1e-6
t_end = 10000
";

fn superrad(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superrad")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn couplings_for_quarter_wave_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[ensemble]\nn_atoms = 2\nspacing = 1.5707963267948966\n");
    let out = superrad(&["couplings", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert!((v["g"].as_f64().unwrap() - std::f64::consts::FRAC_2_PI).abs() < 1e-12);
    assert!(v["delta_l"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(fs::read(dir.path().join("o/couplings.json")).unwrap(), out.stdout);
}

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", ACCEPTANCE);
    let out = superrad(&["simulate", "--config", &cfg, "--out", "run", "--solver", "averaged"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("run/timeseries.csv")).unwrap();
    assert!(csv.starts_with("t,s_mean,w_mean,eta,intensity\n"));
    assert!(!csv.contains('\r'));
    let v = json(&fs::read(dir.path().join("run/summary.json")).unwrap());
    assert_eq!(v["seed"], 11);
    assert!((v["fixed_point"]["eta_infinity"].as_f64().unwrap() - 0.55).abs() < 0.01);
    assert!((v["stationary"]["eta_infinity"].as_f64().unwrap() - 0.55).abs() < 0.01);
    assert_eq!(v["solver"]["kind"], "averaged");
    assert!(v["solver"]["closure"].as_str().unwrap().contains("dw/dt"));
    assert_eq!(v["regime"], "coherent_burst");
    let echoed = parse_config(v["config"].as_str().unwrap()).unwrap();
    assert_eq!(echoed, parse_config(ACCEPTANCE).unwrap());
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[ensemble]\ngeometry = \"random_sphere\"\nn_atoms = 5\nradius = 2.0\n");
    let a = superrad(&["couplings", "--config", &cfg, "--seed", "3", "--out", "a"], dir.path());
    let b = superrad(&["couplings", "--config", &cfg, "--seed", "4", "--out", "b"], dir.path());
    assert_eq!(json(&a.stdout)["seed"], 3);
    assert_ne!(json(&a.stdout)["g"], json(&b.stdout)["g"]);
}

#[test]
fn config_errors_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[ensemble]\ns0 = 1.5\nbogus = 1\n");
    let out = superrad(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out.stderr);
    assert_eq!(v["error"]["kind"], "ConfigError");
    let keys: Vec<&str> = v["error"]["issues"].as_array().unwrap().iter().map(|i| i["key"].as_str().unwrap()).collect();
    assert_eq!(keys, ["ensemble.s0", "ensemble.bogus"]);

    let missing = superrad(&["simulate", "--config", "nope.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // gain regime at the evaluation point: alpha cannot be estimated
    let cfg = write(
        dir.path(),
        "gain.toml",
        "[medium]\nmode = \"oscillator_bath\"\nbath_modes = 4\n[solver]\nkind = \"averaged\"\ng = 10\nw0 = 1e-6\n",
    );
    let out = superrad(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"]["kind"], "NonpositiveGamma");
}

#[test]
fn spectrum_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", ACCEPTANCE);
    let sp = superrad(&["spectrum", "--config", &cfg, "--out", "s"], dir.path());
    assert!(sp.status.success());
    let v = json(&sp.stdout);
    assert_eq!(v["omega0_class"], "in_gap");
    let table = fs::read_to_string(dir.path().join("s/spectrum.csv")).unwrap();
    assert_eq!(table.lines().count(), 402);
    assert_eq!(table.lines().next(), Some("k,omega_minus,omega_plus,omega_matter"));

    assert!(superrad(&["simulate", "--config", &cfg, "--out", "r"], dir.path()).status.success());
    let an = superrad(&["analyze", "--config", &cfg, "--out", "r"], dir.path());
    assert!(an.status.success());
    let report = json(&an.stdout);
    let summary = json(&fs::read(dir.path().join("r/summary.json")).unwrap());
    assert_eq!(report["bursts"]["burst_count"], summary["bursts"]["burst_count"]);
    assert_eq!(report["stationary"]["verdict"], "partial");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "seed = 5\n[ensemble]\ngeometry = \"random_sphere\"\nn_atoms = 4\nradius = 1.0\nu0_re = 0.01\ns0 = 0.99\n\
         [medium]\nmode = \"oscillator_bath\"\nbath_modes = 8\n[solver]\nkind = \"direct\"\ndt = 0.01\nt_end = 5\n",
    );
    for name in ["x", "y"] {
        assert!(superrad(&["simulate", "--config", &cfg, "--out", name], dir.path()).status.success());
    }
    for file in ["timeseries.csv", "summary.json"] {
        assert_eq!(
            fs::read(dir.path().join("x").join(file)).unwrap(),
            fs::read(dir.path().join("y").join(file)).unwrap()
        );
    }
}

#[test]
fn sweep_grid_matches_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[ensemble]\nn_atoms = 1\n[solver]\nkind = \"averaged\"\nw0 = 1e-6\nt_end = 3000\n\
                [sweep]\ng = [2, 5, 10, 20]\nalpha = [1e-4, 1e-3, 1e-2]\n";
    let cfg = write(dir.path(), "s.toml", text);
    let out = Command::new(env!("CARGO_BIN_EXE_superrad"))
        .args(["sweep", "--config", &cfg, "--out", "sw"])
        .env("APP_JOBS", "3")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("sw");
    let aggregate = fs::read_to_string(root.join("aggregate.csv")).unwrap();
    let rows: Vec<&str> = aggregate.lines().collect();
    assert_eq!(rows[0], "g,alpha,alpha_c,regime,eta_infinity,burst_count");
    assert_eq!(rows.len(), 13);

    let base = parse_config(text).unwrap();
    let points = run::sweep_points(&base).unwrap();
    for (i, point) in points.iter().enumerate() {
        let single = run::simulate(&run::point_config(&base, *point)).unwrap();
        let dir_i = root.join(run::run_dir_name(i));
        assert_eq!(fs::read_to_string(dir_i.join("summary.json")).unwrap(), single.summary_json());
        assert_eq!(fs::read_to_string(dir_i.join("timeseries.csv")).unwrap(), single.csv());
        assert_eq!(rows[i + 1], run::aggregate_row(&single.summary));
    }

    // thread count does not change the artifacts
    let serial = run::sweep(&base, Some(1)).unwrap();
    assert_eq!(serial.aggregate_csv, aggregate);
}
