//! Scenario configuration.
//!
//! The file is a flat JSON object. Unknown keys are rejected. Fields that a
//! scenario does not use are ignored by it; fields it needs are checked in
//! [`ScenarioConfig::validate`] and reported by name.

use std::path::{Path, PathBuf};

use dissipforge_core::algebra::{ComplexVector, C64};
use dissipforge_core::states::{graph_state, GraphSpec, PureState};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Amplitudes within this distance of unit norm are renormalised.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Synth,
    Evolve,
    Steady,
    Qsd,
    Compile,
    GraphState,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Synth => "synth",
            Scenario::Evolve => "evolve",
            Scenario::Steady => "steady",
            Scenario::Qsd => "qsd",
            Scenario::Compile => "compile",
            Scenario::GraphState => "graph-state",
        }
    }
}

/// How dissipators are built for the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `L_j = |target⟩⟨b_j|` over an orthonormal complement.
    #[default]
    Subspace,
    /// One rank-one operator rotated onto the target.
    Single,
    /// The fixed three-operator two-qubit set for the Bell target.
    Lfor2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> C64 {
        match self {
            Amplitude::Real(r) => C64::new(r, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A named preset or an explicit amplitude list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Amplitudes(Vec<Amplitude>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Uniform(f64),
    PerOperator(Vec<f64>),
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma::Uniform(1.0)
    }
}

/// Parsed configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub target: Option<StateSpec>,
    /// Initial state: a target-style spec, or "ground", "mixed", "random".
    #[serde(default)]
    pub initial: Option<StateSpec>,
    #[serde(default)]
    pub method: Method,
    /// `a_β` (single) or `a_j` used to merge a set into one operator (qsd).
    #[serde(default)]
    pub coefficients: Option<Vec<Amplitude>>,
    #[serde(default)]
    pub gamma: Gamma,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub n_traj: Option<usize>,
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub pauli_word: Option<String>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub bath_dim: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

fn field(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{name}`: {msg}"))
}

fn require<T: Copy>(value: Option<T>, name: &str, scenario: Scenario) -> Result<T, CliError> {
    value.ok_or_else(|| field(name, format!("required by scenario \"{}\"", scenario.name())))
}

fn max_rate(g: &Gamma) -> f64 {
    match g {
        Gamma::Uniform(r) => *r,
        Gamma::PerOperator(rs) => rs.iter().copied().fold(0.0, f64::max),
    }
}

impl ScenarioConfig {
    fn fill_defaults(&mut self) {
        if self.dt.is_none() {
            let g = max_rate(&self.gamma);
            let g = if g > 0.0 { g } else { 1.0 };
            self.dt = Some(match self.scenario {
                Scenario::Qsd => 1e-3 / g,
                _ => 0.01 / g,
            });
        }
        if self.scenario == Scenario::Compile && self.bath_dim.is_none() {
            self.bath_dim = Some(4);
        }
        if self.scenario == Scenario::Qsd && self.record_every.is_none() {
            self.record_every = Some(1);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = self.scenario;
        match &self.gamma {
            Gamma::Uniform(g) if !(*g > 0.0 && g.is_finite()) => return Err(field("gamma", "must be positive")),
            Gamma::PerOperator(gs) if gs.is_empty() || gs.iter().any(|g| !(*g > 0.0 && g.is_finite())) => {
                return Err(field("gamma", "every rate must be positive"))
            }
            _ => {}
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(field("dt", "must be positive"));
            }
        }
        if let Some(n) = self.n_qubits {
            if n == 0 || n > 12 {
                return Err(field("n_qubits", "must lie in 1..=12"));
            }
        }
        match s {
            Scenario::Synth | Scenario::Steady => {}
            Scenario::Evolve => {
                let t = require(self.t_max, "t_max", s)?;
                if !(t >= self.dt.unwrap_or(0.0) && t.is_finite()) {
                    return Err(field("t_max", "must be at least dt"));
                }
            }
            Scenario::Qsd => {
                let t = require(self.t_max, "t_max", s)?;
                if !(t >= self.dt.unwrap_or(0.0) && t.is_finite()) {
                    return Err(field("t_max", "must be at least dt"));
                }
                if require(self.n_traj, "n_traj", s)? == 0 {
                    return Err(field("n_traj", "must be at least 1"));
                }
                if self.record_every == Some(0) {
                    return Err(field("record_every", "must be at least 1"));
                }
            }
            Scenario::Compile => {
                if self.pauli_word.is_none() {
                    return Err(field("pauli_word", "required by scenario \"compile\""));
                }
                let theta = require(self.theta, "theta", s)?;
                if !theta.is_finite() {
                    return Err(field("theta", "must be finite"));
                }
                if self.bath_dim.is_some_and(|d| d < 2) {
                    return Err(field("bath_dim", "must be at least 2"));
                }
            }
            Scenario::GraphState => {
                if self.graph.is_none() && self.target.is_none() {
                    return Err(field("graph", "graph-state needs a graph or a \"cluster-n\" target"));
                }
            }
        }
        Ok(())
    }

    /// Qubit count implied by the config, checked for consistency.
    pub fn qubits(&self) -> Result<usize, CliError> {
        let mut implied: Vec<(&str, usize)> = Vec::new();
        if let Some(n) = self.n_qubits {
            implied.push(("n_qubits", n));
        }
        if let Some(g) = &self.graph {
            implied.push(("graph", g.n()));
        }
        if let Some(t) = &self.target {
            if let Some(n) = spec_qubits(t, "target")? {
                implied.push(("target", n));
            }
        }
        if self.method == Method::Lfor2 {
            implied.push(("method", 2));
        }
        if self.scenario == Scenario::Compile {
            if let Some(w) = &self.pauli_word {
                implied.push(("pauli_word", w.trim_start_matches(['+', '-', 'i']).len()));
            }
        }
        let Some(&(_, n)) = implied.first() else {
            return Err(field("n_qubits", "cannot be inferred; set n_qubits, graph or target"));
        };
        if let Some((name, m)) = implied.iter().find(|(_, m)| *m != n) {
            return Err(field(name, format!("implies {m} qubits but {} implies {n}", implied[0].0)));
        }
        Ok(n)
    }

    /// The target state. Without an explicit target, a graph gives its graph
    /// state and the `lfor2` method gives the Bell state.
    pub fn target_state(&self, n: usize) -> Result<PureState, CliError> {
        match (&self.target, &self.graph) {
            (Some(spec), _) => resolve_state(spec, n, "target"),
            (None, Some(g)) => Ok(graph_state(g)),
            (None, None) if self.method == Method::Lfor2 => Ok(PureState::bell()),
            (None, None) => Err(field("target", format!("required by scenario \"{}\"", self.scenario.name()))),
        }
    }

    pub fn coefficient_values(&self, expected: usize) -> Result<Vec<C64>, CliError> {
        match &self.coefficients {
            None => Ok(vec![C64::new(1.0, 0.0); expected]),
            Some(a) if a.len() == expected => Ok(a.iter().map(|x| x.value()).collect()),
            Some(a) => Err(field("coefficients", format!("expected {expected} values, got {}", a.len()))),
        }
    }
}

fn spec_qubits(spec: &StateSpec, name: &str) -> Result<Option<usize>, CliError> {
    match spec {
        StateSpec::Named(s) => match s.as_str() {
            "bell" => Ok(Some(2)),
            "plus" => Ok(Some(1)),
            "ground" | "mixed" | "random" => Ok(None),
            other => cluster_size(other).map(Some).ok_or_else(|| field(name, format!("unknown preset {other:?}"))),
        },
        StateSpec::Amplitudes(a) => {
            let len = a.len();
            if len < 2 || !len.is_power_of_two() {
                return Err(field(name, format!("{len} amplitudes is not a power of two >= 2")));
            }
            Ok(Some(len.trailing_zeros() as usize))
        }
    }
}

fn cluster_size(s: &str) -> Option<usize> {
    s.strip_prefix("cluster-")?.parse().ok().filter(|&n| n >= 1)
}

/// Resolves a state spec on `n` qubits. Named presets: "bell", "plus",
/// "cluster-n", and "ground" (`|0…0⟩`).
pub fn resolve_state(spec: &StateSpec, n: usize, name: &str) -> Result<PureState, CliError> {
    let state = match spec {
        StateSpec::Named(s) => match s.as_str() {
            "bell" => PureState::bell(),
            "plus" => PureState::plus(),
            "ground" => PureState::basis(n, 0),
            other => {
                let m = cluster_size(other).ok_or_else(|| field(name, format!("unknown preset {other:?}")))?;
                graph_state(&GraphSpec::path(m).map_err(|e| field(name, e))?)
            }
        },
        StateSpec::Amplitudes(a) => {
            let v = ComplexVector::from_iterator(a.len(), a.iter().map(|x| x.value()));
            let norm = v.norm();
            if (norm - 1.0).abs() > RENORMALIZE_TOL {
                return Err(field(name, format!("amplitudes have norm {norm}, not 1")));
            }
            if norm != 1.0 {
                eprintln!("warning: field `{name}`: renormalising amplitudes (norm {norm})");
            }
            PureState::normalized(v).map_err(|e| field(name, e))?
        }
    };
    if state.n_qubits() != n {
        return Err(field(name, format!("state has {} qubits, scenario has {n}", state.n_qubits())));
    }
    Ok(state)
}
