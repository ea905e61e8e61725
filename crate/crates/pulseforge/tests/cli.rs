use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pulseforge::io::{read_pulse, read_sweep, read_trace, write_pulse};
use pulseforge::runner::read_record;
use pulseforge::REGISTERED;
use pulseforge_core::pulse::Pulse;

fn pulseforge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulseforge"))
        .args(args)
        .current_dir(dir)
        .env("PULSEFORGE_THREADS", "2")
        .output()
        .expect("spawn pulseforge")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn only_run_dir(root: &Path) -> PathBuf {
    let entries: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    entries[0].clone()
}

#[test]
fn unknown_scenario_lists_registered_ids() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", r#"{"scenario": "three_level_magic"}"#);
    let o = pulseforge(&["optimize", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for id in REGISTERED {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad.json", "{ not json"),
        ("units.json", r#"{"scenario": "two_level_nominal", "system": {"nu_r": 6.44}}"#),
        ("peak.json", r#"{"scenario": "two_level_nominal", "pulse": {"seed": {"peak_GHz": 0.4}}}"#),
        ("seed.json", r#"{"scenario": "two_level_nominal", "pulse": {"seed": {"file": "missing.csv"}}}"#),
        ("quad.json", r#"{"scenario": "two_level_nominal", "pulse": {"quadratures": 2}}"#),
    ];
    for (name, body) in cases {
        write_config(dir.path(), name, body);
        let o = pulseforge(&["optimize", "--config", name], dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
    }
    let o = pulseforge(&["optimize", "--config", "absent.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("results").exists());
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", r#"{"scenario": "two_level_nominal"}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_pulseforge"))
        .args(["sweep", "--config", "c.json", "--target", "--axis", "nu_a2"])
        .current_dir(dir.path())
        .env("PULSEFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn optimize_writes_artifacts_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": "two_level_nominal", "optimizer": {"max_iterations": 25}, "output_dir": "out"}"#,
    );
    let o = pulseforge(&["optimize", "--config", "c.json", "--quiet"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("worst-case F"));
    let run = only_run_dir(&dir.path().join("out/two_level_nominal"));
    for f in ["result.json", "pulse_initial.csv", "pulse_optimal.csv", "trace.csv", "sweep.csv", "evolution.csv"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let rec = read_record(&run.join("result.json")).unwrap();
    assert_eq!(rec.status, "ok");
    assert_eq!(rec.scenario, "two_level_nominal");
    assert_eq!(rec.config.optimizer.max_iterations, 25);
    assert!(rec.monotone());
    assert_eq!(read_trace(&run.join("trace.csv")).unwrap().len(), rec.stages[0].iterations);
    assert_eq!(read_sweep(&run.join("sweep.csv")).unwrap().len(), 11);
    let optimal = read_pulse(&run.join("pulse_optimal.csv"), 1).unwrap();
    assert_eq!(optimal.n_pixels(), 16);

    // The echoed config alone reproduces the run.
    let mut echo = serde_json::to_value(&rec.config).unwrap();
    echo["output_dir"] = "again".into();
    write_config(dir.path(), "echo.json", &echo.to_string());
    let o = pulseforge(&["optimize", "--config", "echo.json", "--quiet"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rerun = read_record(&only_run_dir(&dir.path().join("again/two_level_nominal")).join("result.json")).unwrap();
    assert_eq!(rerun.worst_case, rec.worst_case);
    assert_eq!(rerun.samples, rec.samples);
    assert_eq!(rerun.verification, rec.verification);
    assert_eq!(rerun.stages, rec.stages);
}

#[test]
fn warm_start_from_a_pulse_file() {
    let dir = tempfile::tempdir().unwrap();
    let seed = Pulse::constant(200.0, 16, 0.1).unwrap();
    write_pulse(&dir.path().join("seed.csv"), &seed).unwrap();
    write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": "two_level_nominal", "optimizer": {"max_iterations": 3},
            "pulse": {"seed": {"file": "seed.csv"}}, "output_dir": "out"}"#,
    );
    let o = pulseforge(&["optimize", "--config", "c.json", "--quiet"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let run = only_run_dir(&dir.path().join("out/two_level_nominal"));
    assert_eq!(read_pulse(&run.join("pulse_initial.csv"), 1).unwrap().as_slice(), seed.as_slice());

    // Wrong pixel count for the scenario.
    write_pulse(&dir.path().join("seed.csv"), &Pulse::constant(200.0, 10, 0.1).unwrap()).unwrap();
    let o = pulseforge(&["optimize", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn target_sweep_is_one_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", r#"{"scenario": "two_level_robust_2d"}"#);
    let o = pulseforge(
        &["sweep", "--config", "c.json", "--target", "--axis", "nu_a2", "--axis", "nu_a1", "--out", "s.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_sweep(&dir.path().join("s.csv")).unwrap();
    assert_eq!(rows.len(), 121);
    assert!((rows[0].param1 - 4.80).abs() < 1e-12 && (rows[0].param2.unwrap() - 4.495).abs() < 1e-12);
    assert!(rows.iter().all(|r| (r.fidelity - 1.0).abs() < 1e-12));
}

#[test]
fn pulse_sweep_and_simulation() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", r#"{"scenario": "two_level_nominal"}"#);
    write_pulse(&dir.path().join("p.csv"), &Pulse::constant(200.0, 16, 0.2).unwrap()).unwrap();
    let o = pulseforge(&["sweep", "--config", "c.json", "--pulse", "p.csv", "--axis", "nu_a2", "--points", "5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param1,param2,F"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r[1], "");
        let f: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }

    let o = pulseforge(&["simulate", "--config", "c.json", "--pulse", "p.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("step,t_ns,entanglement,bell_fidelity,leakage"));
    assert_eq!(text.lines().count(), 1 + 17);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((0.0..=1.0).contains(&v[2]) && (0.0..=1.0).contains(&v[3]));
        assert!(v[4].abs() < 1e-12);
    }

    std::fs::write(dir.path().join("bad.csv"), "t_start_ns,duration_ns,amp_x_GHz,amp_y_GHz\n0,1,nan?,0\n").unwrap();
    let o = pulseforge(&["simulate", "--config", "c.json", "--pulse", "bad.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn time_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": "multilevel_time_sweep", "system": {"n_transmon": 3, "n_cavity": 3},
            "optimizer": {"max_iterations": 2}}"#,
    );
    let o = pulseforge(&["timesweep", "--config", "c.json", "--times", ""], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "T_ns,F\n");

    let o = pulseforge(&["timesweep", "--config", "c.json", "--times", "2:6:2", "--quiet"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let ts: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts, [2.0, 4.0, 6.0]);

    let o = pulseforge(&["timesweep", "--config", "c.json", "--times", "5:1:1"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    write_config(dir.path(), "two.json", r#"{"scenario": "two_level_nominal"}"#);
    let o = pulseforge(&["timesweep", "--config", "two.json", "--times", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
