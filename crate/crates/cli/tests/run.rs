use std::fs;
use std::path::Path;
use std::process::Command;

use gbec_cli::*;

fn config(dir: &Path, mode: &str, physics: &str, extra: &str) -> RunConfig {
    let text = format!(
        "mode = {mode}\n[physics]\nN = 1000\n{physics}\n[basis]\nn_cut = 6\nl_max = 1\n{extra}\n[output]\nout_dir = {}\n",
        dir.display()
    );
    parse_config(&text).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn sweep_emits_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "sweep", "na_s = -0.02:0.02:0.01", "");
    let s = run(&cfg, Some(2)).unwrap();
    assert!(s.failures.is_empty(), "{:?}", s.failures);
    let text = read(dir.path(), "sweep.csv");
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "a_s_over_aho_times_N,N,Nc_over_N,E_per_N,mu,W,phase,converged,collapsed,steps,error"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].contains(",SSC,") && rows[4].contains(",CSC,"));
    let scan = read(dir.path(), "scan.csv");
    assert_eq!(scan.lines().next().unwrap(), "N,a_s_over_aho,u_mult,converged,E_per_N,mu,W");
    assert_eq!(scan.lines().count(), 11);
    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "sweep.csv.meta.json")).unwrap();
    assert_eq!(meta["n_cut"], 6);
    assert_eq!(meta["rows"], 5);
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["config"]["solver"]["seed"], 42);
    assert!(meta["version"].is_string());
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(a.path(), 1), (b.path(), 3)] {
        let cfg = config(dir, "sweep", "na_s = -0.05, 0.05\ngpe = false", "[solver]\nseed_mode = vacuum_noise\nseed = 11");
        run(&cfg, Some(jobs)).unwrap();
    }
    assert_eq!(read(a.path(), "sweep.csv"), read(b.path(), "sweep.csv"));
}

#[test]
fn collapse_is_recorded_and_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    // Far past the threshold; the small basis keeps the width finite, so the
    // point ends either collapsed or unconverged.
    let cfg = config(dir.path(), "sweep", "na_s = -3.0, 0.05\ngpe = true", "[solver]\nmax_steps = 20000");
    let s = run(&cfg, Some(2)).unwrap();
    let text = read(dir.path(), "sweep.csv");
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][7] == "false" || rows[0][8] == "true", "{:?}", rows[0]);
    assert_eq!((rows[1][7], rows[1][8]), ("true", "false"));
    assert_eq!(s.failures.len(), 1);
    assert!(s.failures[0].starts_with("na_s = -3"));
    let scan = read(dir.path(), "scan.csv");
    assert!(scan.lines().any(|l| l.contains(",false,")));
}

#[test]
fn ground_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "ground", "na_s = 0.1", "[output]\nformat = json");
    run(&cfg, Some(1)).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&read(dir.path(), "ground.json")).unwrap();
    let e = rows[0]["E_per_N"].as_f64().unwrap();
    assert!(e > 1.5 && e < 1.6);
    let snap = gbec::gstate::StateSnapshot::from_json(&read(dir.path(), "state_0.json")).unwrap();
    assert!((snap.to_state().unwrap().total_number() - 1000.0).abs() < 1e-3);
}

#[test]
fn spectrum_mode_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "spectrum", "na_s = 0.1\nsectors = 0,1", "");
    run(&cfg, Some(2)).unwrap();
    let text = read(dir.path(), "spectrum.csv");
    assert_eq!(text.lines().next().unwrap(), "a_s_over_aho_times_N,L,omega,weight_1pe,degeneracy,label");
    assert!(text.lines().any(|l| l.starts_with("0.1,0,") && l.ends_with(",goldstone")));
    assert!(text.lines().any(|l| l.starts_with("0.1,1,") && l.ends_with(",dipole")));
}

#[test]
fn tof_mode_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "tof", "na_s = -0.1\ntimes = 0, 1, 3", "");
    let s = run(&cfg, Some(2)).unwrap();
    assert!(s.failures.is_empty(), "{:?}", s.failures);
    let text = read(dir.path(), "tof.csv");
    assert_eq!(text.lines().next().unwrap(), "T,width,g2");
    assert_eq!(text.lines().count(), 4);
    for l in text.lines().skip(1) {
        let g2: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!((g2 - 3.0).abs() < 2e-3, "{l}");
    }
}

#[test]
fn tof_of_a_coherent_state_is_a_recorded_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "tof", "na_s = 0.1", "");
    let s = run(&cfg, Some(1)).unwrap();
    assert_eq!(s.failures.len(), 1);
    assert_eq!(read(dir.path(), "tof.csv").lines().count(), 0);
}

#[test]
fn threshold_mode_emits_both_multipliers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "threshold", "", "[solver]\nresolution = 1e-3");
    run(&cfg, Some(2)).unwrap();
    let text = read(dir.path(), "threshold.csv");
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (1.0, 3.0));
    assert!((rows[0][3] - 3.0 * rows[1][3]).abs() < 2e-3);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = config(&blocker.join("sub"), "sweep", "na_s = 0.1\ngpe = false", "");
    assert!(matches!(run(&cfg, Some(1)), Err(RunError::Io { .. })));
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gbec")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    let out = dir.path().join("out");
    fs::write(&good, format!("[physics]\nN = 1000\nna_s = 0.05\ngpe = false\n[basis]\nn_cut = 4\nl_max = 0\n[output]\nout_dir = {}\n", out.display())).unwrap();
    let ok = binary(&["--config", good.to_str().unwrap(), "--jobs", "1", "--seed", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("sweep.csv").exists());
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["solver"]["seed"], 3);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[physics]\nN = 1000\nncut==\n").unwrap();
    let e = binary(&["--config", bad.to_str().unwrap()]);
    assert_eq!(e.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&e.stderr).contains("line 3"));

    assert_eq!(binary(&["--config", good.to_str().unwrap(), "--mode", "plot"]).status.code(), Some(2));
    assert_eq!(binary(&["--config", dir.path().join("missing.cfg").to_str().unwrap()]).status.code(), Some(3));

    let blocked = dir.path().join("blocked.cfg");
    fs::write(&blocked, format!("[physics]\nN = 1000\nna_s = 0.05\n[basis]\nn_cut = 4\n[output]\nout_dir = {}\n", good.join("x").display())).unwrap();
    assert_eq!(binary(&["--config", blocked.to_str().unwrap()]).status.code(), Some(3));
}
