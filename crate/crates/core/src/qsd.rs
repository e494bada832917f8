//! Linear quantum-state-diffusion trajectories in the Markov limit.
//!
//! Each trajectory follows
//!
//! ```text
//! ∂ψ/∂t = [L z*_t − (γ/2) L†L] ψ
//! ```
//!
//! with white complex noise `M[z_t z*_s] = γ δ(t − s)`, discretised by
//! Euler–Maruyama. The norm is not preserved; the ensemble mean of the
//! unnormalised projectors `|ψ_t⟩⟨ψ_t|` is the Lindblad density matrix.
//!
//! Noise for trajectory `k` is drawn from a ChaCha8 generator seeded with the
//! master seed and switched to stream `k`, so any single trajectory can be
//! regenerated on its own and the ensemble splits across threads freely.
//! Partial sums are formed over fixed blocks of [`REDUCTION_BLOCK`]
//! consecutive trajectories and added in block order, which makes the result
//! independent of the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{ensure_square, ComplexMatrix, ComplexVector, C64};
use crate::error::{Error, Result};
use crate::states::PureState;

/// Trajectories whose norm exceeds this are abandoned.
pub const OVERFLOW_NORM: f64 = 1e6;
/// Largest tolerated fraction of abandoned trajectories.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;
/// Trajectories per partial sum in [`ensemble_average`].
pub const REDUCTION_BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub t_max: f64,
    pub master_seed: u64,
    pub gamma: f64,
    /// Keep every `record_every`-th step; the first and last are always kept.
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl TrajectoryConfig {
    pub fn new(n_traj: usize, dt: f64, t_max: f64, master_seed: u64, gamma: f64) -> Result<Self> {
        let cfg = Self {
            n_traj,
            dt,
            t_max,
            master_seed,
            gamma,
            record_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn recording_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidArgument("n_traj must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_max = {} must be at least dt = {}",
                self.t_max, self.dt
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }

    fn is_recorded(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == self.steps()
    }

    /// Sample times shared by every trajectory of this configuration.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps())
            .filter(|&k| self.is_recorded(k))
            .map(|k| k as f64 * self.dt)
            .collect()
    }
}

/// The increments `z*_k` for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub traj_index: u64,
    pub increments: Vec<C64>,
}

impl NoisePath {
    /// All-zero path: the deterministic contraction alone.
    pub fn zero(cfg: &TrajectoryConfig) -> Self {
        Self {
            traj_index: 0,
            increments: vec![C64::new(0.0, 0.0); cfg.steps()],
        }
    }
}

fn trajectory_rng(master_seed: u64, traj_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(traj_index);
    rng
}

/// Complex Gaussian increments with real and imaginary variance `γ/(2dt)`.
pub fn sample_noise(cfg: &TrajectoryConfig, traj_index: u64) -> NoisePath {
    let mut rng = trajectory_rng(cfg.master_seed, traj_index);
    let sigma = (cfg.gamma / (2.0 * cfg.dt)).sqrt();
    let increments = (0..cfg.steps())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(sigma * re, sigma * im)
        })
        .collect();
    NoisePath { traj_index, increments }
}

/// Unnormalised state vectors at the sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
}

struct Stepper<'a> {
    op: &'a ComplexMatrix,
    /// `(γ/2) L†L`
    drift: ComplexMatrix,
    dt: C64,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a ComplexMatrix, gamma: f64, dt: f64) -> Self {
        Self {
            op,
            drift: op.adjoint() * op * C64::from(gamma / 2.0),
            dt: C64::from(dt),
        }
    }

    fn step(&self, psi: &ComplexVector, z: C64) -> ComplexVector {
        let kick = self.op * psi * z - &self.drift * psi;
        psi + kick * self.dt
    }
}

fn check_inputs(op: &ComplexMatrix, cfg: &TrajectoryConfig, psi0: &PureState) -> Result<()> {
    cfg.validate()?;
    let dim = ensure_square(op)?;
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi0.dim(),
        });
    }
    Ok(())
}

/// Euler–Maruyama integration of one trajectory along `noise`.
pub fn evolve_trajectory(op: &ComplexMatrix, cfg: &TrajectoryConfig, psi0: &PureState, noise: &NoisePath) -> Result<Trajectory> {
    check_inputs(op, cfg, psi0)?;
    if noise.increments.len() != cfg.steps() {
        return Err(Error::DimensionMismatch {
            expected: cfg.steps(),
            found: noise.increments.len(),
        });
    }
    let stepper = Stepper::new(op, cfg.gamma, cfg.dt);
    let mut psi = psi0.amplitudes().clone();
    let mut out = Trajectory {
        times: vec![0.0],
        states: vec![psi.clone()],
    };
    for (k, &z) in noise.increments.iter().enumerate() {
        psi = stepper.step(&psi, z);
        let step = k + 1;
        let norm = psi.norm();
        if !(norm <= OVERFLOW_NORM) {
            return Err(Error::TrajectoryOverflow {
                index: noise.traj_index,
                step,
                norm,
            });
        }
        if cfg.is_recorded(step) {
            out.times.push(step as f64 * cfg.dt);
            out.states.push(psi.clone());
        }
    }
    Ok(out)
}

/// Running sums over a block of trajectories.
#[derive(Debug, Clone)]
struct Accumulator {
    kept: usize,
    excluded: usize,
    sum: Vec<ComplexMatrix>,
    /// Entrywise `Σ (Re ρ)² + i Σ (Im ρ)²`.
    sum_sq: Vec<ComplexMatrix>,
    norm_sum: Vec<f64>,
    norm_sq: Vec<f64>,
}

impl Accumulator {
    fn new(samples: usize, dim: usize) -> Self {
        Self {
            kept: 0,
            excluded: 0,
            sum: vec![ComplexMatrix::zeros(dim, dim); samples],
            sum_sq: vec![ComplexMatrix::zeros(dim, dim); samples],
            norm_sum: vec![0.0; samples],
            norm_sq: vec![0.0; samples],
        }
    }

    fn add(&mut self, traj: &Trajectory) {
        self.kept += 1;
        for (i, psi) in traj.states.iter().enumerate() {
            let proj = psi * psi.adjoint();
            self.sum_sq[i] += proj.map(|z| C64::new(z.re * z.re, z.im * z.im));
            self.sum[i] += proj;
            let n2 = psi.norm_squared();
            self.norm_sum[i] += n2;
            self.norm_sq[i] += n2 * n2;
        }
    }

    fn merge(mut self, other: Accumulator) -> Self {
        self.kept += other.kept;
        self.excluded += other.excluded;
        for i in 0..self.sum.len() {
            self.sum[i] += &other.sum[i];
            self.sum_sq[i] += &other.sum_sq[i];
            self.norm_sum[i] += other.norm_sum[i];
            self.norm_sq[i] += other.norm_sq[i];
        }
        self
    }
}

/// Ensemble mean of `|ψ_t⟩⟨ψ_t|` with elementwise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub n_traj: usize,
    pub excluded: usize,
    pub times: Vec<f64>,
    pub rho_mean: Vec<ComplexMatrix>,
    /// Standard error of the real part in `.re`, of the imaginary part in `.im`.
    pub rho_se: Vec<ComplexMatrix>,
    /// `M[⟨ψ_t|ψ_t⟩]`
    pub norm_mean: Vec<f64>,
    pub norm_se: Vec<f64>,
}

fn standard_error(sum: f64, sum_sq: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (var / nf).sqrt()
}

impl EnsembleRecord {
    fn from_accumulator(cfg: &TrajectoryConfig, acc: Accumulator) -> Self {
        let n = acc.kept;
        let nf = n as f64;
        let rho_mean = acc.sum.iter().map(|s| s / C64::from(nf)).collect();
        let rho_se = acc
            .sum
            .iter()
            .zip(&acc.sum_sq)
            .map(|(s, q)| {
                s.zip_map(q, |a, b| C64::new(standard_error(a.re, b.re, n), standard_error(a.im, b.im, n)))
            })
            .collect();
        let norm_mean = acc.norm_sum.iter().map(|s| s / nf).collect();
        let norm_se = acc
            .norm_sum
            .iter()
            .zip(&acc.norm_sq)
            .map(|(&s, &q)| standard_error(s, q, n))
            .collect();
        Self {
            n_traj: cfg.n_traj,
            excluded: acc.excluded,
            times: cfg.sample_times(),
            rho_mean,
            rho_se,
            norm_mean,
            norm_se,
        }
    }

    pub fn kept(&self) -> usize {
        self.n_traj - self.excluded
    }

    /// Index of the sample closest to `t`.
    pub fn index_near(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
    }

    pub fn summary(&self) -> EnsembleSummary {
        let flat = |m: &ComplexMatrix| -> Vec<[f64; 2]> {
            (0..m.nrows())
                .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
                .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        };
        EnsembleSummary {
            n_traj: self.n_traj,
            excluded: self.excluded,
            times: self.times.clone(),
            rho_mean: self.rho_mean.iter().map(flat).collect(),
            rho_se: self.rho_se.iter().map(flat).collect(),
        }
    }
}

/// Serialised form of an [`EnsembleRecord`]. Each matrix is flattened row by
/// row into `[re, im]` pairs; for `rho_se` the pair holds the standard errors
/// of the real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_traj: usize,
    pub excluded: usize,
    pub times: Vec<f64>,
    pub rho_mean: Vec<Vec<[f64; 2]>>,
    pub rho_se: Vec<Vec<[f64; 2]>>,
}

/// Runs `cfg.n_traj` trajectories in parallel and averages the unnormalised
/// projectors. Overflowing trajectories are dropped and counted; more than
/// [`MAX_EXCLUDED_FRACTION`] of them fails the run.
pub fn ensemble_average(op: &ComplexMatrix, cfg: &TrajectoryConfig, psi0: &PureState) -> Result<EnsembleRecord> {
    check_inputs(op, cfg, psi0)?;
    let samples = cfg.sample_times().len();
    let dim = psi0.dim();
    let blocks = cfg.n_traj.div_ceil(REDUCTION_BLOCK);
    let partials: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(samples, dim);
            let end = ((b + 1) * REDUCTION_BLOCK).min(cfg.n_traj);
            for k in b * REDUCTION_BLOCK..end {
                let noise = sample_noise(cfg, k as u64);
                match evolve_trajectory(op, cfg, psi0, &noise) {
                    Ok(traj) => acc.add(&traj),
                    Err(Error::TrajectoryOverflow { .. }) => acc.excluded += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let acc = partials
        .into_iter()
        .reduce(Accumulator::merge)
        .expect("n_traj >= 1");
    if acc.excluded as f64 > MAX_EXCLUDED_FRACTION * cfg.n_traj as f64 || acc.kept == 0 {
        return Err(Error::TooManyExclusions {
            excluded: acc.excluded,
            total: cfg.n_traj,
        });
    }
    Ok(EnsembleRecord::from_accumulator(cfg, acc))
}
