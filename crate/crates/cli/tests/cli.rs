use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dissipforge_cli::config::{Gamma, Method, StateSpec};
use dissipforge_cli::{parse_config, parse_config_str, run, CliError, RunOptions, Scenario};
use dissipforge_core::algebra::PauliString;
use dissipforge_core::compiler::{compile_coupling, GateSequence};
use dissipforge_core::states::GraphSpec;

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dissipforge"))
}

fn run_str(text: &str, dir: &Path) -> Result<dissipforge_cli::RunSummary, CliError> {
    let cfg = parse_config_str(text)?;
    run(
        &cfg,
        &RunOptions {
            seed: None,
            output: Some(dir.to_path_buf()),
        },
    )
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minimal_evolve_config_gets_defaults() {
    let cfg = parse_config_str(r#"{"scenario":"evolve","n_qubits":2,"target":"bell","t_max":30}"#).unwrap();
    assert_eq!(cfg.scenario, Scenario::Evolve);
    assert_eq!(cfg.dt, Some(0.01));
    assert_eq!(cfg.gamma, Gamma::Uniform(1.0));
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.method, Method::Subspace);
    assert_eq!(cfg.target, Some(StateSpec::Named("bell".into())));
}

#[test]
fn unknown_key_is_named() {
    let err = parse_config_str(r#"{"scenario":"evolve","n_qubits":2,"target":"bell","t_max":30,"gama":2}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("gama"), "{err}");
}

#[test]
fn missing_field_is_named() {
    let err = parse_config_str(r#"{"scenario":"evolve","n_qubits":2,"target":"bell"}"#).unwrap_err();
    assert!(err.to_string().contains("t_max"), "{err}");
    let err = parse_config_str(r#"{"scenario":"qsd","target":"bell","t_max":1}"#).unwrap_err();
    assert!(err.to_string().contains("n_traj"), "{err}");
}

#[test]
fn compile_config_parses() {
    let cfg = parse_config_str(r#"{"scenario":"compile","pauli_word":"XXX","theta":0.7,"bath_dim":4}"#).unwrap();
    assert_eq!(cfg.pauli_word.as_deref(), Some("XXX"));
    assert_eq!(cfg.theta, Some(0.7));
    assert_eq!(cfg.bath_dim, Some(4));
    assert_eq!(cfg.qubits().unwrap(), 3);
}

#[test]
fn amplitudes_are_renormalised_or_rejected() {
    let nearly = 0.5 + 4e-7;
    let text = format!(r#"{{"scenario":"synth","target":[{nearly},0.5,0.5,0.5]}}"#);
    let cfg = parse_config_str(&text).unwrap();
    let psi = cfg.target_state(2).unwrap();
    assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-15);

    let cfg = parse_config_str(r#"{"scenario":"synth","target":[0.6,0.6,0,0]}"#).unwrap();
    let err = cfg.target_state(2).unwrap_err();
    assert!(err.to_string().contains("target"), "{err}");

    let err = parse_config_str(r#"{"scenario":"synth","target":[1,0,0]}"#)
        .and_then(|c| c.qubits())
        .unwrap_err();
    assert!(err.to_string().contains("power of two"), "{err}");
}

#[test]
fn inconsistent_sizes_are_rejected() {
    let cfg = parse_config_str(r#"{"scenario":"steady","n_qubits":3,"target":"bell"}"#).unwrap();
    assert_eq!(cfg.qubits().unwrap_err().exit_code(), 2);
    let cfg = parse_config_str(r#"{"scenario":"steady","method":"lfor2","n_qubits":3}"#).unwrap();
    assert_eq!(cfg.qubits().unwrap_err().exit_code(), 2);
}

#[test]
fn steady_lfor2_has_unique_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_str(r#"{"scenario":"steady","method":"lfor2"}"#, dir.path()).unwrap();
    assert_eq!(summary.metrics.null_space_dim, Some(1));
    assert!((summary.metrics.steady_fidelity.unwrap() - 1.0).abs() < 1e-10);
    let json = read_json(&dir.path().join("steady_state.json"));
    assert_eq!(json["null_space_dim"].as_u64(), Some(1));
    for p in summary.artifact_paths() {
        assert!(p.exists(), "{}", p.display());
    }
}

#[test]
fn compile_xxx_round_trips_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_str(
        r#"{"scenario":"compile","pauli_word":"XXX","theta":0.7,"bath_dim":4}"#,
        dir.path(),
    )
    .unwrap();
    assert!(summary.metrics.max_deviation.unwrap() <= 1e-10);
    let text = std::fs::read_to_string(dir.path().join("sequence.json")).unwrap();
    let parsed = GateSequence::from_json(&text).unwrap();
    let direct = compile_coupling(&"XXX".parse::<PauliString>().unwrap(), 0.7, &GraphSpec::path(3).unwrap()).unwrap();
    assert_eq!(parsed, direct);
    assert_eq!(parsed.to_json().unwrap() + "\n", text);
    assert_eq!(summary.metrics.conjugator_count, Some(parsed.conjugator_count()));
}

#[test]
fn qsd_runs_are_byte_identical() {
    let cfg = r#"{"scenario":"qsd","target":"bell","n_traj":1,"t_max":0.5,"seed":42}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = run_str(cfg, a.path()).unwrap();
    run_str(cfg, b.path()).unwrap();
    for name in &sa.artifacts {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn seed_override_changes_qsd_output() {
    let cfg = parse_config_str(r#"{"scenario":"qsd","target":"bell","n_traj":4,"t_max":0.2,"seed":1}"#).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&cfg, &RunOptions { seed: None, output: Some(a.path().into()) }).unwrap();
    let s = run(&cfg, &RunOptions { seed: Some(2), output: Some(b.path().into()) }).unwrap();
    assert_eq!(s.seed, 2);
    let x = std::fs::read(a.path().join("ensemble.json")).unwrap();
    let y = std::fs::read(b.path().join("ensemble.json")).unwrap();
    assert_ne!(x, y);
}

#[test]
fn three_samples_give_four_csv_lines() {
    let dir = tempfile::tempdir().unwrap();
    run_str(
        r#"{"scenario":"evolve","target":"bell","t_max":0.02,"dt":0.01}"#,
        dir.path(),
    )
    .unwrap();
    let csv = std::fs::read_to_string(dir.path().join("evolution.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "t,fidelity,trace_error,purity,min_eig");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 5);
    // 15 significant digits
    assert_eq!(fields[1], "5.00000000000000e-1");
}

#[test]
fn graph_state_from_cluster_preset() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_str(r#"{"scenario":"graph-state","target":"cluster-4"}"#, dir.path()).unwrap();
    assert_eq!(s.n_qubits, 4);
    assert!(s.metrics.stabilizer_residual.unwrap() < 1e-12);
}

#[test]
fn bundled_examples_run_quickly() {
    let budget = Duration::from_secs(60);
    let mut entries: Vec<PathBuf> = std::fs::read_dir(examples_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    assert!(entries.len() >= 6);
    let mut seen = std::collections::BTreeSet::new();
    for path in entries {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(&path).unwrap();
        seen.insert(cfg.scenario.name());
        let start = Instant::now();
        let summary = run(&cfg, &RunOptions { seed: None, output: Some(dir.path().into()) }).unwrap();
        let took = start.elapsed();
        assert!(took < budget, "{} took {took:?}", path.display());
        for p in summary.artifact_paths() {
            assert!(p.exists(), "{} missing {}", path.display(), p.display());
        }
    }
    assert_eq!(seen.len(), 6, "every scenario needs an example: {seen:?}");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };

    let ok = write("ok.json", r#"{"scenario":"steady","method":"lfor2"}"#);
    let out = bin().arg(&ok).arg("--output").arg(dir.path().join("ok")).arg("--quiet").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("ok/summary.json").exists());

    let typo = write("typo.json", r#"{"scenario":"steady","method":"lfor2","gama":1}"#);
    let out = bin().arg(&typo).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));

    // ZIZ is disconnected on a path: a config problem, not a numerical one.
    let split = write("split.json", r#"{"scenario":"compile","pauli_word":"ZIZ","theta":0.1}"#);
    let out = bin().arg(&split).arg("--output").arg(dir.path().join("split")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Rates this large make the fixed-step integrator blow up.
    let stiff = write(
        "stiff.json",
        r#"{"scenario":"evolve","target":"bell","gamma":1000,"dt":0.01,"t_max":1}"#,
    );
    let out = bin().arg(&stiff).arg("--output").arg(dir.path().join("stiff")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin().arg(dir.path().join("absent.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(4));

    let blocker = write("blocker", "not a directory");
    let out = bin().arg(&ok).arg("--output").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(4));

    let out = bin().arg("--config").arg(&ok).arg("--seed").arg("3").arg("--output").arg(dir.path().join("flag")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary = read_json(&dir.path().join("flag/summary.json"));
    assert_eq!(summary["seed"].as_u64(), Some(3));
}
