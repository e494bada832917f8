//! Scenario dispatch and artifact emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dissipforge_core::algebra::{ComplexMatrix, Pauli, PauliString, C64};
use dissipforge_core::compiler::{compile_coupling, verify_sequence, BathTestSpace};
use dissipforge_core::dissipators::{
    preset_lfor2, single_dissipator_for, subspace_dissipators_for, Dissipator, DissipatorSet,
};
use dissipforge_core::lindblad::{integrate, steady_states_default, IntegrationSettings, LindbladModel};
use dissipforge_core::qsd::{ensemble_average, TrajectoryConfig};
use dissipforge_core::states::{fidelity, graph_state, purity, DensityMatrix, GraphSpec, PureState};
use dissipforge_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{resolve_state, Gamma, Method, Scenario, ScenarioConfig, StateSpec};
use crate::CliError;

/// Default output directory when neither the config nor the caller sets one.
pub const DEFAULT_OUTPUT: &str = "dissipforge-out";
/// Fidelity threshold reported as `time_to_0_99`.
pub const FIDELITY_MARK: f64 = 0.99;
/// Extra random angles checked by the compile scenario.
pub const VERIFY_SAMPLES: usize = 8;
/// Stabilizer residual above this fails a graph-state run.
pub const STABILIZER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

/// Headline numbers of a run. Absent metrics are omitted from the JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_operators: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dark_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_space_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_to_0_99: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_trace_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugator_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizer_residual: Option<f64>,
}

/// What `summary.json` holds. Wall time is kept out of the file so that
/// repeated runs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub n_qubits: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    /// File names relative to `output_dir`, `summary.json` last.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn artifact_paths(&self) -> Vec<PathBuf> {
        self.artifacts.iter().map(|a| self.output_dir.join(a)).collect()
    }
}

fn numerical(scenario: Scenario, e: Error) -> CliError {
    let msg = format!("{}: {e}", scenario.name());
    match e {
        Error::InvalidGraph(_)
        | Error::InvalidState(_)
        | Error::InvalidSpec(_)
        | Error::DisconnectedSupport(_)
        | Error::NotPowerOfTwo(_)
        | Error::DimensionMismatch { .. } => CliError::Config(msg),
        _ => CliError::Numerical(msg),
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }
}

/// Runs one scenario and writes its artifacts plus `summary.json`.
pub fn run(config: &ScenarioConfig, options: &RunOptions) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let mut cfg = config.clone();
    if let Some(seed) = options.seed {
        cfg.seed = seed;
    }
    let dir = options
        .output
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let n = cfg.qubits()?;
    let mut out = Writer::new(&dir)?;
    let s = cfg.scenario;
    let metrics = match s {
        Scenario::Synth => run_synth(&cfg, n, &mut out),
        Scenario::Evolve => run_evolve(&cfg, n, &mut out),
        Scenario::Steady => run_steady(&cfg, n, &mut out),
        Scenario::Qsd => run_qsd(&cfg, n, &mut out),
        Scenario::Compile => run_compile(&cfg, n, &mut out),
        Scenario::GraphState => run_graph_state(&cfg, n, &mut out),
    }?;
    let mut artifacts = out.written.clone();
    artifacts.push("summary.json".to_string());
    let summary = RunSummary {
        scenario: s,
        n_qubits: n,
        seed: cfg.seed,
        metrics,
        artifacts,
        output_dir: dir,
        wall_time_s: 0.0,
    };
    out.put_json("summary.json", &summary)?;
    Ok(RunSummary {
        wall_time_s: started.elapsed().as_secs_f64(),
        ..summary
    })
}

fn rng_for(cfg: &ScenarioConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

/// Dissipators for the configured method, with rates from `gamma`.
fn build_dissipators(cfg: &ScenarioConfig, target: &PureState) -> Result<DissipatorSet, CliError> {
    let s = cfg.scenario;
    let base = match cfg.method {
        Method::Subspace => subspace_dissipators_for(target),
        Method::Single => single_dissipator_for(target, &cfg.coefficient_values(target.dim() - 1)?),
        Method::Lfor2 => Ok(preset_lfor2()),
    }
    .map_err(|e| numerical(s, e))?;
    match &cfg.gamma {
        Gamma::Uniform(g) => base.scaled(*g).map_err(|e| numerical(s, e)),
        Gamma::PerOperator(gs) => {
            if gs.len() != base.len() {
                return Err(CliError::Config(format!(
                    "field `gamma`: {} rates given for {} operators",
                    gs.len(),
                    base.len()
                )));
            }
            let ops = base
                .operators()
                .iter()
                .zip(gs)
                .map(|(d, &g)| Dissipator::new(g * d.gamma, d.op.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| numerical(s, e))?;
            DissipatorSet::new(ops).map_err(|e| numerical(s, e))
        }
    }
}

fn max_dark_residual(ds: &DissipatorSet, target: &PureState) -> f64 {
    ds.operators()
        .iter()
        .map(|d| (&d.op * target.amplitudes()).norm())
        .fold(0.0, f64::max)
}

fn initial_density(cfg: &ScenarioConfig, n: usize) -> Result<DensityMatrix, CliError> {
    match cfg.initial.as_ref() {
        None => Ok(PureState::basis(n, 0).density()),
        Some(StateSpec::Named(s)) if s == "mixed" => Ok(DensityMatrix::maximally_mixed(n)),
        Some(StateSpec::Named(s)) if s == "random" => Ok(DensityMatrix::random(n, &mut rng_for(cfg))),
        Some(spec) => Ok(resolve_state(spec, n, "initial")?.density()),
    }
}

fn initial_pure(cfg: &ScenarioConfig, n: usize) -> Result<PureState, CliError> {
    match cfg.initial.as_ref() {
        None => Ok(PureState::basis(n, 0)),
        Some(StateSpec::Named(s)) if s == "mixed" => Err(CliError::Config(
            "field `initial`: trajectories need a pure initial state".into(),
        )),
        Some(StateSpec::Named(s)) if s == "random" => Ok(PureState::random(n, &mut rng_for(cfg))),
        Some(spec) => resolve_state(spec, n, "initial"),
    }
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn amplitudes(psi: &PureState) -> Vec<[f64; 2]> {
    psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

fn run_synth(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let target = cfg.target_state(n)?;
    let ds = build_dissipators(cfg, &target)?;
    let residual = max_dark_residual(&ds, &target);
    out.put_json("dissipators.json", &ds)?;
    if residual > dissipforge_core::dissipators::DARK_TOL {
        return Err(CliError::Numerical(format!("synth: target is not dark (residual {residual:e})")));
    }
    Ok(Metrics {
        n_operators: Some(ds.len()),
        max_dark_residual: Some(residual),
        ..Default::default()
    })
}

fn run_evolve(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let s = cfg.scenario;
    let target = cfg.target_state(n)?;
    let model = LindbladModel::dissipative(build_dissipators(cfg, &target)?).map_err(|e| numerical(s, e))?;
    let rho0 = initial_density(cfg, n)?;
    let t_max = cfg.t_max.expect("validated");
    let dt = cfg.dt.expect("defaulted");
    let settings = IntegrationSettings::new(t_max, dt).recording_every(cfg.record_every.unwrap_or(1));
    let record = integrate(&model, &rho0, settings, Some(&target)).map_err(|e| numerical(s, e))?;
    let mut csv = Vec::new();
    record.write_csv(&mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    out.put("evolution.csv", &csv)?;
    let fids = record.fidelities.as_deref().unwrap_or(&[]);
    let reached = record
        .times
        .iter()
        .zip(fids)
        .find(|(_, &f)| f >= FIDELITY_MARK)
        .map(|(&t, _)| t);
    Ok(Metrics {
        n_operators: Some(model.dissipators().len()),
        final_fidelity: fids.last().copied(),
        time_to_0_99: reached,
        max_trace_error: Some(record.max_trace_error()),
        min_eigenvalue: Some(record.min_eigenvalue()),
        ..Default::default()
    })
}

#[derive(Serialize)]
struct SteadyJson {
    null_space_dim: usize,
    fidelity: f64,
    purity: f64,
    /// Rows of `[re, im]` pairs.
    representative: Vec<Vec<[f64; 2]>>,
}

fn run_steady(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let s = cfg.scenario;
    let target = cfg.target_state(n)?;
    let model = LindbladModel::dissipative(build_dissipators(cfg, &target)?).map_err(|e| numerical(s, e))?;
    let ss = steady_states_default(&model).map_err(|e| numerical(s, e))?;
    let fid = fidelity(&ss.representative, &target).map_err(|e| numerical(s, e))?;
    let pur = purity(&ss.representative);
    out.put_json(
        "steady_state.json",
        &SteadyJson {
            null_space_dim: ss.dimension(),
            fidelity: fid,
            purity: pur,
            representative: rows(ss.representative.matrix()),
        },
    )?;
    Ok(Metrics {
        n_operators: Some(model.dissipators().len()),
        null_space_dim: Some(ss.dimension()),
        steady_fidelity: Some(fid),
        steady_purity: Some(pur),
        ..Default::default()
    })
}

fn run_qsd(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let s = cfg.scenario;
    let target = cfg.target_state(n)?;
    let ds = build_dissipators(cfg, &target)?;
    // A single channel keeps its rate; several are merged with weights
    // `coefficients` into one operator at unit rate.
    let (op, gamma) = if ds.len() == 1 {
        let d = &ds.operators()[0];
        (d.op.clone(), d.gamma)
    } else {
        let weights = match cfg.method {
            Method::Single => vec![C64::new(1.0, 0.0); ds.len()],
            _ => cfg.coefficient_values(ds.len())?,
        };
        (ds.combined(&weights).map_err(|e| numerical(s, e))?, 1.0)
    };
    let psi0 = initial_pure(cfg, n)?;
    let tc = TrajectoryConfig::new(
        cfg.n_traj.expect("validated"),
        cfg.dt.expect("defaulted"),
        cfg.t_max.expect("validated"),
        cfg.seed,
        gamma,
    )
    .map_err(|e| CliError::Config(format!("qsd settings: {e}")))?
    .recording_every(cfg.record_every.unwrap_or(1));
    let record = ensemble_average(&op, &tc, &psi0).map_err(|e| numerical(s, e))?;
    out.put_json("ensemble.json", &record.summary())?;
    let last = record.rho_mean.last().expect("at least one sample");
    let fid = target.amplitudes().dotc(&(last * target.amplitudes())).re;
    Ok(Metrics {
        final_fidelity: Some(fid),
        excluded: Some(record.excluded),
        ..Default::default()
    })
}

fn run_compile(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let s = cfg.scenario;
    let word: PauliString = cfg
        .pauli_word
        .as_deref()
        .expect("validated")
        .parse()
        .map_err(|e| CliError::Config(format!("field `pauli_word`: {e}")))?;
    let graph = match &cfg.graph {
        Some(g) => g.clone(),
        None => GraphSpec::path(n).map_err(|e| numerical(s, e))?,
    };
    let theta = cfg.theta.expect("validated");
    let seq = compile_coupling(&word, theta, &graph).map_err(|e| numerical(s, e))?;
    let mut rng = rng_for(cfg);
    let bath = BathTestSpace::random_hermitian(cfg.bath_dim.expect("defaulted"), &mut rng)
        .map_err(|e| numerical(s, e))?;
    let mut thetas = vec![theta];
    thetas.extend((0..VERIFY_SAMPLES).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
    let report = verify_sequence(&seq, &bath, &thetas).map_err(|e| numerical(s, e))?;
    let json = seq.to_json().map_err(|e| numerical(s, e))?;
    out.put("sequence.json", format!("{json}\n").as_bytes())?;
    out.put("sequence.txt", seq.render_text().as_bytes())?;
    out.put_json("verification.json", &report)?;
    if !report.passed {
        return Err(CliError::Numerical(format!(
            "compile: sequence deviates by {:e} (tolerance {:e})",
            report.max_deviation, report.tolerance
        )));
    }
    Ok(Metrics {
        conjugator_count: Some(seq.conjugator_count()),
        max_deviation: Some(report.max_deviation),
        ..Default::default()
    })
}

#[derive(Serialize)]
struct GraphStateJson {
    graph: GraphSpec,
    amplitudes: Vec<[f64; 2]>,
    stabilizer_residual: f64,
}

/// Largest `‖K_v|G⟩ − |G⟩‖` over the generators `K_v = X_v Π_{u~v} Z_u`.
fn stabilizer_residual(g: &GraphSpec, psi: &PureState) -> f64 {
    let n = g.n();
    (1..=n)
        .map(|v| {
            let mut terms = vec![(v - 1, Pauli::X)];
            terms.extend(g.neighbours(v).into_iter().map(|u| (u - 1, Pauli::Z)));
            let k = PauliString::from_sparse(n, &terms).dense();
            (k * psi.amplitudes() - psi.amplitudes()).norm()
        })
        .fold(0.0, f64::max)
}

fn run_graph_state(cfg: &ScenarioConfig, n: usize, out: &mut Writer) -> Result<Metrics, CliError> {
    let s = cfg.scenario;
    let graph = match (&cfg.graph, &cfg.target) {
        (Some(g), _) => g.clone(),
        (None, Some(StateSpec::Named(name))) if name.starts_with("cluster-") => {
            GraphSpec::path(n).map_err(|e| numerical(s, e))?
        }
        _ => {
            return Err(CliError::Config(
                "field `target`: graph-state takes a graph or a \"cluster-n\" target".into(),
            ))
        }
    };
    let psi = graph_state(&graph);
    let residual = stabilizer_residual(&graph, &psi);
    out.put_json(
        "state.json",
        &GraphStateJson {
            graph,
            amplitudes: amplitudes(&psi),
            stabilizer_residual: residual,
        },
    )?;
    if residual > STABILIZER_TOL {
        return Err(CliError::Numerical(format!("graph-state: stabilizer residual {residual:e}")));
    }
    Ok(Metrics {
        stabilizer_residual: Some(residual),
        ..Default::default()
    })
}
