//! Lindblad generator, its vectorised form, steady states and time
//! integration.
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_j γ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})
//! ```
//!
//! Vectorisation is column stacking, under which the generator reads
//!
//! ```text
//! ℒ = Σ_j γ_j [L̄_j ⊗ L_j − ½ I ⊗ L_j†L_j − ½ (L_j†L_j)ᵀ ⊗ I] − i(I ⊗ H − Hᵀ ⊗ I)
//! ```

use std::io::{self, Write};

use crate::algebra::{
    self, eigenvalues, hermiticity_error, kron, matexp, unvectorize, vectorize, ComplexMatrix, ComplexVector, C64,
    I, NULL_SPACE_TOL,
};
use crate::dissipators::DissipatorSet;
use crate::error::{Error, Result};
use crate::states::{fidelity, purity, DensityMatrix, PureState};

/// Largest accepted `|H − H†|` entry.
pub const HAMILTONIAN_TOL: f64 = 1e-12;
/// Per-step trace drift or negativity beyond this aborts integration.
pub const ABORT_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
struct Channel {
    gamma: f64,
    op: ComplexMatrix,
    op_dag: ComplexMatrix,
    /// L†L
    decay: ComplexMatrix,
}

/// `H` (optional) plus a set of dissipators on a `2^n`-dimensional space.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: Option<ComplexMatrix>,
    dissipators: DissipatorSet,
    channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn new(dim: usize, hamiltonian: Option<ComplexMatrix>, dissipators: DissipatorSet) -> Result<Self> {
        algebra::qubit_count(dim)?;
        if let Some(h) = &hamiltonian {
            if h.nrows() != dim || h.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.nrows(),
                });
            }
            let err = hermiticity_error(h);
            if err > HAMILTONIAN_TOL {
                return Err(Error::InvalidArgument(format!("Hamiltonian is not Hermitian ({err:e})")));
            }
        }
        if let Some(d) = dissipators.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
        }
        let channels = dissipators
            .operators()
            .iter()
            .map(|d| {
                let op_dag = d.op.adjoint();
                Channel {
                    gamma: d.gamma,
                    decay: &op_dag * &d.op,
                    op: d.op.clone(),
                    op_dag,
                }
            })
            .collect();
        Ok(Self {
            dim,
            hamiltonian,
            dissipators,
            channels,
        })
    }

    /// Purely dissipative model.
    pub fn dissipative(dissipators: DissipatorSet) -> Result<Self> {
        let dim = dissipators
            .dim()
            .ok_or_else(|| Error::InvalidArgument("empty dissipator set needs an explicit dimension".into()))?;
        Self::new(dim, None, dissipators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> Option<&ComplexMatrix> {
        self.hamiltonian.as_ref()
    }

    pub fn dissipators(&self) -> &DissipatorSet {
        &self.dissipators
    }

    /// Every rate multiplied by `s`; the Hamiltonian is untouched.
    pub fn with_scaled_rates(&self, s: f64) -> Result<Self> {
        Self::new(self.dim, self.hamiltonian.clone(), self.dissipators.scaled(s)?)
    }

    /// `{V L_j V†}` and `V H V†`.
    pub fn transformed(&self, v: &ComplexMatrix) -> Result<Self> {
        let h = self.hamiltonian.as_ref().map(|h| {
            let m = v * h * v.adjoint();
            (&m + m.adjoint()) * C64::from(0.5)
        });
        Self::new(self.dim, h, self.dissipators.transformed(v))
    }

    /// Default step `0.01 / max γ`, or `0.01` with no dissipators.
    pub fn default_dt(&self) -> f64 {
        let g = self.dissipators.max_rate();
        if g > 0.0 {
            0.01 / g
        } else {
            0.01
        }
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = match &self.hamiltonian {
            Some(h) => (h * rho - rho * h) * (-I),
            None => ComplexMatrix::zeros(self.dim, self.dim),
        };
        for ch in &self.channels {
            let jump = &ch.op * rho * &ch.op_dag;
            let anti = &ch.decay * rho + rho * &ch.decay;
            out += (jump - anti * C64::from(0.5)) * C64::from(ch.gamma);
        }
        out
    }
}

/// `ℒρ`
pub fn rhs(model: &LindbladModel, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: rho.dim(),
        });
    }
    Ok(model.apply(rho.matrix()))
}

/// The `N² x N²` matrix of ℒ acting on column-stacked density matrices.
pub fn liouvillian_matrix(model: &LindbladModel) -> ComplexMatrix {
    let n = model.dim;
    let id = ComplexMatrix::identity(n, n);
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    if let Some(h) = &model.hamiltonian {
        m += (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    }
    for ch in &model.channels {
        let jump = kron(&ch.op.map(|z| z.conj()), &ch.op);
        let left = kron(&id, &ch.decay);
        let right = kron(&ch.decay.transpose(), &id);
        m += (jump - (left + right) * C64::from(0.5)) * C64::from(ch.gamma);
    }
    m
}

/// Eigenvalues of [`liouvillian_matrix`].
pub fn liouvillian_spectrum(model: &LindbladModel) -> Result<Vec<C64>> {
    eigenvalues(&liouvillian_matrix(model))
}

/// Null space of the Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyStates {
    /// Orthonormal null vectors of the Liouvillian matrix.
    pub null_vectors: Vec<ComplexVector>,
    /// The null vectors reshaped to `N x N` matrices.
    pub matrices: Vec<ComplexMatrix>,
    /// A valid density matrix in the null space: the unique steady state when
    /// the dimension is one, otherwise the projection of `I/N` renormalised.
    pub representative: DensityMatrix,
}

impl SteadyStates {
    pub fn dimension(&self) -> usize {
        self.null_vectors.len()
    }
}

pub fn steady_states(model: &LindbladModel, tol: f64) -> Result<SteadyStates> {
    let n = model.dim;
    let null_vectors = algebra::null_space(&liouvillian_matrix(model), tol)?;
    if null_vectors.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no steady state found at tolerance {tol:e}; loosen the threshold"
        )));
    }
    let matrices = null_vectors
        .iter()
        .map(|v| unvectorize(v, n))
        .collect::<Result<Vec<_>>>()?;
    let raw = if null_vectors.len() == 1 {
        matrices[0].clone()
    } else {
        let mixed = vectorize(&(ComplexMatrix::identity(n, n) / C64::from(n as f64)));
        let projected = null_vectors
            .iter()
            .fold(ComplexVector::zeros(n * n), |acc, v| acc + v * v.dotc(&mixed));
        unvectorize(&projected, n)?
    };
    let tr = algebra::trace(&raw);
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidArgument("steady-state representative has zero trace".into()));
    }
    let scaled = raw / tr;
    let herm = (&scaled + scaled.adjoint()) * C64::from(0.5);
    Ok(SteadyStates {
        null_vectors,
        matrices,
        representative: DensityMatrix::from_matrix_unchecked(herm)?,
    })
}

/// [`steady_states`] at the default threshold.
pub fn steady_states_default(model: &LindbladModel) -> Result<SteadyStates> {
    steady_states(model, NULL_SPACE_TOL)
}

/// Step size and horizon for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub t_max: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the initial and final states are
    /// always kept).
    pub record_every: usize,
}

impl IntegrationSettings {
    pub fn new(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            dt,
            record_every: 1,
        }
    }

    pub fn for_model(model: &LindbladModel, t_max: f64) -> Self {
        Self::new(t_max, model.default_dt())
    }

    pub fn recording_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt) {
            return Err(Error::InvalidArgument(format!(
                "t_max = {} must be at least dt = {}",
                self.t_max, self.dt
            )));
        }
        Ok((self.t_max / self.dt - 1e-9).ceil() as usize)
    }
}

/// Sampled trajectory of the density matrix with conservation diagnostics.
#[derive(Debug, Clone, Default)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Fidelity with the target, when one was given.
    pub fidelities: Option<Vec<f64>>,
    /// `|Tr ρ − 1|` after each step, before renormalisation.
    pub trace_errors: Vec<f64>,
    pub min_eigs: Vec<f64>,
    pub purities: Vec<f64>,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.trace_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the sample closest to `t`.
    pub fn index_near(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
    }

    /// CSV with header `t,fidelity,trace_error,purity,min_eig`, numbers with
    /// 15 significant digits. The fidelity column is `nan` without a target.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,fidelity,trace_error,purity,min_eig")?;
        for i in 0..self.len() {
            let f = self.fidelities.as_ref().map_or(f64::NAN, |f| f[i]);
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt15(self.times[i]),
                fmt15(f),
                fmt15(self.trace_errors[i]),
                fmt15(self.purities[i]),
                fmt15(self.min_eigs[i])
            )?;
        }
        Ok(())
    }
}

/// Scientific notation with 15 significant digits.
pub fn fmt15(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.14e}")
    }
}

/// Fixed-step classical RK4.
///
/// After each step the trace drift is recorded and then removed, and the
/// state is re-Hermitised. A drift or negative eigenvalue beyond
/// [`ABORT_TOL`] aborts with [`Error::Unstable`].
pub fn integrate(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    settings: IntegrationSettings,
    target: Option<&PureState>,
) -> Result<EvolutionRecord> {
    integrate_until(model, rho0, settings, target, |_| false)
}

fn integrate_until(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    settings: IntegrationSettings,
    target: Option<&PureState>,
    mut stop: impl FnMut(f64) -> bool,
) -> Result<EvolutionRecord> {
    if rho0.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: rho0.dim(),
        });
    }
    if let Some(t) = target {
        if t.dim() != model.dim {
            return Err(Error::DimensionMismatch {
                expected: model.dim,
                found: t.dim(),
            });
        }
    }
    let steps = settings.steps()?;
    let dt = settings.dt;
    let mut record = EvolutionRecord {
        fidelities: target.map(|_| Vec::new()),
        ..Default::default()
    };

    let push = |record: &mut EvolutionRecord, t: f64, rho: &DensityMatrix, trace_error: f64, min_eig: f64| -> Result<f64> {
        let fid = match target {
            Some(phi) => fidelity(rho, phi)?,
            None => f64::NAN,
        };
        record.times.push(t);
        record.trace_errors.push(trace_error);
        record.min_eigs.push(min_eig);
        record.purities.push(purity(rho));
        if let Some(f) = record.fidelities.as_mut() {
            f.push(fid);
        }
        record.states.push(rho.clone());
        Ok(fid)
    };

    let mut rho = rho0.matrix().clone();
    let fid0 = push(&mut record, 0.0, rho0, rho0.trace_error(), rho0.min_eigenvalue())?;
    if stop(fid0) {
        return Ok(record);
    }
    let half = C64::from(dt / 2.0);
    let full = C64::from(dt);
    let sixth = C64::from(dt / 6.0);
    for step in 1..=steps {
        let k1 = model.apply(&rho);
        let k2 = model.apply(&(&rho + &k1 * half));
        let k3 = model.apply(&(&rho + &k2 * half));
        let k4 = model.apply(&(&rho + &k3 * full));
        rho += (k1 + (k2 + k3) * C64::from(2.0) + k4) * sixth;

        let tr = algebra::trace(&rho);
        let trace_error = (tr - C64::from(1.0)).norm();
        rho = (&rho + rho.adjoint()) * C64::from(0.5) / C64::from(tr.re);
        let state = DensityMatrix::from_matrix_unchecked(rho.clone())?;
        let min_eig = state.min_eigenvalue();
        let t = step as f64 * dt;
        if trace_error > ABORT_TOL || min_eig < -ABORT_TOL || !min_eig.is_finite() {
            return Err(Error::Unstable { t, trace_error, min_eig });
        }
        if step % settings.record_every == 0 || step == steps {
            let fid = push(&mut record, t, &state, trace_error, min_eig)?;
            if stop(fid) {
                break;
            }
        }
    }
    Ok(record)
}

/// `exp(t ℒ) ρ₀` through the matrix exponential of the vectorised generator.
pub fn exact_evolution(model: &LindbladModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let prop = matexp(&(liouvillian_matrix(model) * C64::from(t)))?;
    let v = prop * vectorize(rho0.matrix());
    DensityMatrix::from_matrix_unchecked(unvectorize(&v, model.dim)?)
}

/// First sampled time at which the fidelity with `target` reaches
/// `threshold`, or `f64::INFINITY` if it never does within `settings.t_max`.
pub fn time_to_fidelity(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    target: &PureState,
    threshold: f64,
    settings: IntegrationSettings,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let record = integrate_until(model, rho0, settings.recording_every(1), Some(target), |f| f >= threshold)?;
    let fids = record.fidelities.as_ref().expect("target given");
    Ok(fids
        .iter()
        .position(|&f| f >= threshold)
        .map_or(f64::INFINITY, |i| record.times[i]))
}
