//! Pure states, density matrices and graph/cluster states.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    c, hermitian_eigenvalues, hermiticity_error, kron, kron_all, outer, qubit_count, trace, ComplexMatrix,
    ComplexVector, Pauli, C64, I, ONE, ZERO,
};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: ComplexVector,
}

impl PureState {
    /// Wrap a normalised amplitude vector of length `2^n`.
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n = qubit_count(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n, amplitudes })
    }

    /// Normalise an arbitrary non-zero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        Self::new(amplitudes / C64::from(norm))
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1 << n;
        let amplitudes = ComplexVector::from_fn(dim, |k, _| if k == index { ONE } else { ZERO });
        Self { n, amplitudes }
    }

    /// `|+⟩`
    pub fn plus() -> Self {
        let h = c(FRAC_1_SQRT_2, 0.0);
        Self {
            n: 1,
            amplitudes: ComplexVector::from_vec(vec![h, h]),
        }
    }

    /// `(|00⟩ + |11⟩)/√2`
    pub fn bell() -> Self {
        let h = c(FRAC_1_SQRT_2, 0.0);
        Self {
            n: 2,
            amplitudes: ComplexVector::from_vec(vec![h, ZERO, ZERO, h]),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            matrix: self.projector(),
        }
    }

    /// `|⟨self|other⟩|`
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }

    /// Apply a unitary and renormalise away round-off.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<PureState> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        PureState::normalized(u * &self.amplitudes)
    }

    /// Haar-ish random state from complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let v = ComplexVector::from_fn(1 << n, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(v).expect("gaussian vector is non-zero")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        let herm = hermiticity_error(&rho.matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr_err = rho.trace_error();
        if tr_err > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace off by {tr_err:e}")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    /// Only checks the shape; used for intermediate integrator states.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let n = qubit_count(matrix.nrows())?;
        Ok(Self { n, matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        Self {
            n,
            matrix: ComplexMatrix::identity(dim, dim) / C64::from(dim as f64),
        }
    }

    /// Random full-rank state `G G† / Tr(G G†)` from a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let dim = 1 << n;
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = trace(&m).re;
        let mut matrix = m / C64::from(tr);
        // exact Hermiticity
        matrix = (&matrix + matrix.adjoint()) * C64::from(0.5);
        Self { n, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace_error(&self) -> f64 {
        (trace(&self.matrix) - ONE).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)
            .ok()
            .and_then(|v| v.first().copied())
            .unwrap_or(f64::NAN)
    }

    /// `U ρ U†`
    pub fn transform(&self, u: &ComplexMatrix) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            matrix: u * &self.matrix * u.adjoint(),
        }
    }
}

/// `⟨φ|ρ|φ⟩`, clipped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, phi: &PureState) -> Result<f64> {
    if rho.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: phi.dim(),
        });
    }
    let v = phi.amplitudes();
    let f = v.dotc(&(rho.matrix() * v)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// `Tr(ρ²)`
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(ρ²) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Simple undirected graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawGraph")]
pub struct GraphSpec {
    n: usize,
    edges: Vec<[usize; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    n: usize,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        GraphSpec::new(raw.n, raw.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl GraphSpec {
    /// Edges use 1-based vertex labels. Self-loops, duplicates (in either
    /// orientation) and out-of-range vertices are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) outside 1..={n}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a},{b})")));
            }
            out.push([a, b]);
        }
        Ok(Self { n, edges: out })
    }

    /// Path `1 – 2 – … – n`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v, v + 1)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&[a, b]| (a, b))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&[x, y]| (x == a && y == b) || (x == b && y == a))
    }

    /// Neighbours of vertex `v` (1-based), ascending.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&[a, b]| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// `Π_edges CZ |+⟩^⊗n`.
///
/// Every amplitude is `±2^{-n/2}`, negative when an odd number of edges join
/// two vertices in state `|1⟩`.
pub fn graph_state(g: &GraphSpec) -> PureState {
    let n = g.n();
    let dim = 1usize << n;
    let scale = (dim as f64).sqrt().recip();
    let bit = |index: usize, v: usize| (index >> (n - v)) & 1;
    let amplitudes = ComplexVector::from_fn(dim, |index, _| {
        let odd = g.edges().filter(|&(a, b)| bit(index, a) & bit(index, b) == 1).count() % 2;
        C64::from(if odd == 1 { -scale } else { scale })
    });
    PureState { n, amplitudes }
}

/// Literal expansion of `2^{-n/2} ⊗_q (|0⟩_q Z_{q+1} + |1⟩_q)` with
/// `Z_{n+1} ≡ 1`.
///
/// Built right to left: each factor is the map `|0⟩⊗Z + |1⟩⊗I` from the
/// qubits after `q` to the qubits from `q` on, applied to the tail state.
pub fn cluster_formula(n: usize) -> Result<PureState> {
    if n < 1 {
        return Err(Error::InvalidArgument("cluster state needs n >= 1".into()));
    }
    let ket0 = ComplexVector::from_vec(vec![ONE, ZERO]);
    let ket1 = ComplexVector::from_vec(vec![ZERO, ONE]);
    let ket0m = ComplexMatrix::from_column_slice(2, 1, ket0.as_slice());
    let ket1m = ComplexMatrix::from_column_slice(2, 1, ket1.as_slice());
    let plus_unnormalized = &ket0 + &ket1;
    let mut tail = plus_unnormalized;
    for _ in 1..n {
        let rest = tail.len();
        let z_first = kron(&Pauli::Z.matrix(), &ComplexMatrix::identity(rest / 2, rest / 2));
        let factor = kron(&ket0m, &z_first) + kron(&ket1m, &ComplexMatrix::identity(rest, rest));
        tail = factor * tail;
    }
    let scale = C64::from((1usize << n) as f64).sqrt().inv();
    PureState::new(tail * scale)
}

/// The eight single-qubit corrections searched by [`local_equivalence`]:
/// `I, X, Z, XZ, H, S, HS, SH`.
pub fn local_corrections() -> Vec<(&'static str, ComplexMatrix)> {
    let h = (Pauli::X.matrix() + Pauli::Z.matrix()) * C64::from(FRAC_1_SQRT_2);
    let s = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![ONE, I]));
    let x = Pauli::X.matrix();
    let z = Pauli::Z.matrix();
    vec![
        ("I", ComplexMatrix::identity(2, 2)),
        ("X", x.clone()),
        ("Z", z.clone()),
        ("XZ", &x * &z),
        ("H", h.clone()),
        ("S", s.clone()),
        ("HS", &h * &s),
        ("SH", &s * &h),
    ]
}

/// Best `|⟨target| C₁⊗…⊗Cₙ |source⟩|` over all products of
/// [`local_corrections`], with the labels of the maximising correction.
pub fn local_equivalence(source: &PureState, target: &PureState) -> Result<(f64, Vec<&'static str>)> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: source.dim(),
        });
    }
    let n = source.n_qubits();
    let set = local_corrections();
    let k = set.len();
    let mut best = (-1.0, Vec::new());
    for code in 0..k.pow(n as u32) {
        let picks: Vec<usize> = (0..n).map(|q| (code / k.pow((n - 1 - q) as u32)) % k).collect();
        let u = kron_all(picks.iter().map(|&i| &set[i].1));
        let ov = target.amplitudes().dotc(&(u * source.amplitudes())).norm();
        if ov > best.0 + 1e-13 {
            best = (ov, picks.iter().map(|&i| set[i].0).collect());
        }
    }
    Ok(best)
}
