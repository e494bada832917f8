//! Synthesis of Lindblad operators whose dark space is a chosen state or
//! subspace.
//!
//! Two constructions are provided:
//!
//! * [`synth_subspace`]: one operator `L_j = |φ_j⟩⟨j|` per level outside the
//!   target block, with `|φ_j⟩ = Σ_{p≤k} a_{jp}|p⟩`. Populations and coherences
//!   outside the `k x k` block decay; the block itself is untouched.
//! * [`synth_single`]: a single operator `L' = |φ₀⟩ Σ_{β>0} a_β⟨φ_β|`, optionally
//!   rotated into another frame as `𝒰† L' 𝒰`. The target is dark, but being
//!   rank one the operator also leaves the `N − 2` directions orthogonal to
//!   both `|φ₀⟩` and `Σ a_β*|φ_β⟩` dark, so the steady state is unique only
//!   for `N = 2`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{c, outer, ComplexMatrix, ComplexVector, PauliString, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::states::PureState;

/// Orthonormality tolerance for a working basis.
pub const BASIS_TOL: f64 = 1e-12;
/// `‖L|φ⟩‖` at or below this counts as dark.
pub const DARK_TOL: f64 = 1e-10;

/// One dissipation channel `γ D[L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub gamma: f64,
    pub op: ComplexMatrix,
}

impl Dissipator {
    pub fn new(gamma: f64, op: ComplexMatrix) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("decay rate must be positive, got {gamma}")));
        }
        if op.nrows() != op.ncols() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        Ok(Self { gamma, op })
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }
}

/// A list of dissipation channels acting on the same space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DissipatorSet {
    operators: Vec<Dissipator>,
}

impl DissipatorSet {
    pub fn new(operators: Vec<Dissipator>) -> Result<Self> {
        if let Some(first) = operators.first() {
            let dim = first.dim();
            if let Some(bad) = operators.iter().find(|d| d.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bad.dim(),
                });
            }
        }
        Ok(Self { operators })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Every operator with the same rate.
    pub fn uniform(gamma: f64, ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(ops.into_iter().map(|op| Dissipator::new(gamma, op)).collect::<Result<_>>()?)
    }

    pub fn operators(&self) -> &[Dissipator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.operators.first().map(Dissipator::dim)
    }

    pub fn max_rate(&self) -> f64 {
        self.operators.iter().map(|d| d.gamma).fold(0.0, f64::max)
    }

    /// Multiply every rate by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.operators
                .iter()
                .map(|d| Dissipator::new(d.gamma * s, d.op.clone()))
                .collect::<Result<_>>()?,
        )
    }

    /// `V L V†` for every operator.
    pub fn transformed(&self, v: &ComplexMatrix) -> Self {
        Self {
            operators: self
                .operators
                .iter()
                .map(|d| Dissipator {
                    gamma: d.gamma,
                    op: v * &d.op * v.adjoint(),
                })
                .collect(),
        }
    }

    /// `Σ_j a_j √γ_j L_j`, a single operator with the same dark states.
    pub fn combined(&self, coeffs: &[C64]) -> Result<ComplexMatrix> {
        let dim = self
            .dim()
            .ok_or_else(|| Error::InvalidArgument("cannot combine an empty set".into()))?;
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        Ok(self
            .operators
            .iter()
            .zip(coeffs)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (d, &a)| acc + &d.op * (a * d.gamma.sqrt())))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DissipatorJson {
    gamma: f64,
    matrix: Vec<[f64; 2]>,
}

impl Serialize for DissipatorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<DissipatorJson> = self
            .operators
            .iter()
            .map(|d| DissipatorJson {
                gamma: d.gamma,
                // row-major
                matrix: d.op.transpose().iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        list.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DissipatorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let list = Vec::<DissipatorJson>::deserialize(deserializer)?;
        let ops = list
            .into_iter()
            .map(|d| {
                let dim = (d.matrix.len() as f64).sqrt().round() as usize;
                if dim * dim != d.matrix.len() {
                    return Err(Error::Serialization(format!(
                        "matrix with {} entries is not square",
                        d.matrix.len()
                    )));
                }
                let op = ComplexMatrix::from_row_iterator(dim, dim, d.matrix.iter().map(|&[re, im]| c(re, im)));
                Dissipator::new(d.gamma, op)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        DissipatorSet::new(ops).map_err(D::Error::custom)
    }
}

/// Coefficients of a synthesis request.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// `a_{jp}` for `j = k+1..N` (outer index) and `p = 1..k` (inner index).
    Subspace(Vec<Vec<C64>>),
    /// `a_β` for `β = 1..N-1`.
    Single(Vec<C64>),
}

/// Target subspace `span{|1⟩..|k⟩}` of a working frame `|1⟩..|N⟩`, plus the
/// coupling coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    basis: Vec<ComplexVector>,
    k: usize,
    coeffs: Coefficients,
}

impl SynthesisSpec {
    pub fn new(basis: Vec<ComplexVector>, k: usize, coeffs: Coefficients) -> Result<Self> {
        let n = basis.len();
        if n < 2 {
            return Err(Error::InvalidSpec("system dimension must be at least 2".into()));
        }
        if k < 1 || k >= n {
            return Err(Error::InvalidSpec(format!("target dimension k = {k} must satisfy 1 <= k < N = {n}")));
        }
        if let Some(v) = basis.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { ONE } else { ZERO };
                let err = (u.dotc(v) - expected).norm();
                if err > BASIS_TOL {
                    return Err(Error::InvalidSpec(format!(
                        "basis not orthonormal: <{i}|{j}> off by {err:e}"
                    )));
                }
            }
        }
        match &coeffs {
            Coefficients::Subspace(rows) => {
                if rows.len() != n - k {
                    return Err(Error::InvalidSpec(format!("expected {} coefficient rows, got {}", n - k, rows.len())));
                }
                for (r, row) in rows.iter().enumerate() {
                    if row.len() != k {
                        return Err(Error::InvalidSpec(format!("row {} has {} coefficients, expected {k}", k + r + 1, row.len())));
                    }
                    if row.iter().all(|a| *a == ZERO) {
                        return Err(Error::InvalidSpec(format!("level {} has all-zero coefficients and never decays", k + r + 1)));
                    }
                }
            }
            Coefficients::Single(a) => {
                if k != 1 {
                    return Err(Error::InvalidSpec("single-dissipator form needs k = 1".into()));
                }
                if a.len() != n - 1 {
                    return Err(Error::InvalidSpec(format!("expected {} coefficients, got {}", n - 1, a.len())));
                }
                if let Some(b) = a.iter().position(|z| *z == ZERO) {
                    return Err(Error::InvalidSpec(format!(
                        "a_{} = 0: the steady state would not be unique",
                        b + 1
                    )));
                }
            }
        }
        Ok(Self { basis, k, coeffs })
    }

    /// Computational basis of dimension `dim`.
    pub fn computational_basis(dim: usize) -> Vec<ComplexVector> {
        (0..dim)
            .map(|i| ComplexVector::from_fn(dim, |r, _| if r == i { ONE } else { ZERO }))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[ComplexVector] {
        &self.basis
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }
}

/// `L_j = |φ_j⟩⟨j|` for `j = k+1..N`, each with rate 1.
pub fn synth_subspace(spec: &SynthesisSpec) -> Result<DissipatorSet> {
    let Coefficients::Subspace(rows) = &spec.coeffs else {
        return Err(Error::InvalidSpec("synth_subspace needs a_{jp} coefficients".into()));
    };
    let n = spec.dim();
    let k = spec.k;
    let ops = rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let phi = row
                .iter()
                .zip(&spec.basis[..k])
                .fold(ComplexVector::zeros(n), |acc, (&a, v)| acc + v * a);
            outer(&phi, &spec.basis[k + r])
        })
        .collect();
    DissipatorSet::uniform(1.0, ops)
}

/// `L = 𝒰† L' 𝒰` with `L' = |φ₀⟩ Σ_{β>0} a_β⟨φ_β|`. `frame = None` means
/// `𝒰 = I`.
///
/// `𝒰†|φ₀⟩` is dark, but so is every vector orthogonal to
/// `𝒰†Σ a_β*|φ_β⟩`: `L` has rank one, its dark space has dimension `N − 1`
/// and the Liouvillian null space dimension `(N − 1)²`. The steady state is
/// unique only for `N = 2`; for larger `N` the state reached depends on the
/// initial state (for diagonal initial states in the `φ` frame it is still
/// `𝒰†|φ₀⟩`).
pub fn synth_single(spec: &SynthesisSpec, frame: Option<&ComplexMatrix>) -> Result<DissipatorSet> {
    let Coefficients::Single(a) = &spec.coeffs else {
        return Err(Error::InvalidSpec("synth_single needs a_β coefficients".into()));
    };
    let n = spec.dim();
    let bra = a
        .iter()
        .zip(&spec.basis[1..])
        .fold(ComplexVector::zeros(n), |acc, (&ab, v)| acc + v * ab.conj());
    let l_prime = outer(&spec.basis[0], &bra);
    let op = match frame {
        None => l_prime,
        Some(u) => {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: u.nrows(),
                });
            }
            let unitarity = (u.adjoint() * u - ComplexMatrix::identity(n, n)).norm();
            if unitarity > 1e-10 {
                return Err(Error::InvalidArgument(format!("frame is not unitary ({unitarity:e})")));
            }
            u.adjoint() * l_prime * u
        }
    };
    DissipatorSet::uniform(1.0, vec![op])
}

/// Orthonormal basis whose first vector is `target`.
///
/// The rest comes from Gram–Schmidt over the computational basis vectors,
/// skipping the one with the largest overlap with `target` (lowest index on
/// ties).
pub fn complete_basis(target: &PureState) -> Vec<ComplexVector> {
    let dim = target.dim();
    let t = target.amplitudes();
    let mut drop = 0;
    let mut best = -1.0;
    for (i, z) in t.iter().enumerate() {
        // ties broken towards the lower index
        if z.norm() > best + 1e-12 {
            best = z.norm();
            drop = i;
        }
    }
    let mut basis = vec![t.clone()];
    for i in (0..dim).filter(|&i| i != drop) {
        let mut v = ComplexVector::from_fn(dim, |r, _| if r == i { ONE } else { ZERO });
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        v /= C64::from(norm);
        basis.push(v);
    }
    basis
}

/// The unitary `𝒰 = Σ_β |e_β⟩⟨b_β|` that maps the completed basis `b` of
/// `target` onto the computational basis, so `𝒰†|0…0⟩ = |target⟩`.
pub fn frame_for_target(target: &PureState) -> ComplexMatrix {
    let b = complete_basis(target);
    let dim = b.len();
    // rows of 𝒰 are ⟨b_β|
    ComplexMatrix::from_fn(dim, dim, |r, col| b[r][col].conj())
}

/// `k = 1` subspace construction with working frame [`complete_basis`] of
/// `target` and all `a_{j1} = 1`: `N − 1` operators `|target⟩⟨b_j|`.
pub fn subspace_dissipators_for(target: &PureState) -> Result<DissipatorSet> {
    let basis = complete_basis(target);
    let rows = vec![vec![ONE]; basis.len() - 1];
    synth_subspace(&SynthesisSpec::new(basis, 1, Coefficients::Subspace(rows))?)
}

/// Single operator with `target` dark, built in the computational frame and
/// rotated by [`frame_for_target`]. See [`synth_single`] for the size of its
/// dark space.
pub fn single_dissipator_for(target: &PureState, coeffs: &[C64]) -> Result<DissipatorSet> {
    let dim = target.dim();
    let spec = SynthesisSpec::new(
        SynthesisSpec::computational_basis(dim),
        1,
        Coefficients::Single(coeffs.to_vec()),
    )?;
    synth_single(&spec, Some(&frame_for_target(target)))
}

/// The three two-qubit operators
///
/// ```text
/// L₁ = i(X₁Y₂ + Y₁X₂) − (Z₁ + Z₂)
/// L₂ = i(Z₁Y₂ + Y₁Z₂) + (X₁ + X₂)
/// L₃ = (Z₁X₂ − X₁Z₂) − i(Y₁ − Y₂)
/// ```
///
/// each with rate 1. Their common dark state is `(|00⟩ + |11⟩)/√2`.
pub fn preset_lfor2() -> DissipatorSet {
    let p = |w: &str| w.parse::<PauliString>().expect("valid word").dense();
    let l1 = (p("XY") + p("YX")) * I - p("ZI") - p("IZ");
    let l2 = (p("ZY") + p("YZ")) * I + p("XI") + p("IX");
    let l3 = p("ZX") - p("XZ") - (p("YI") - p("IY")) * I;
    DissipatorSet::uniform(1.0, vec![l1, l2, l3]).expect("consistent preset")
}

/// Single-qubit example: `H = ωX` and `L = Z − iY = 2|+⟩⟨−|`, which together
/// leave `|+⟩` as the unique steady state.
pub fn preset_two_level(omega: f64) -> (ComplexMatrix, DissipatorSet) {
    let p = |w: &str| w.parse::<PauliString>().expect("valid word").dense();
    let h = p("X") * C64::from(omega);
    let l = p("Z") - p("Y") * I;
    (h, DissipatorSet::uniform(1.0, vec![l]).expect("consistent preset"))
}

/// True when every operator annihilates `phi` (to [`DARK_TOL`]).
pub fn is_dark(ds: &DissipatorSet, phi: &PureState) -> Result<bool> {
    for d in ds.operators() {
        if d.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                found: phi.dim(),
            });
        }
        if (&d.op * phi.amplitudes()).norm() > DARK_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{distance, matexp, Pauli};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_nonzero<R: Rng>(rng: &mut R) -> C64 {
        let mag = rng.random_range(0.2..2.0);
        let arg = rng.random_range(0.0..std::f64::consts::TAU);
        C64::from_polar(mag, arg)
    }

    fn plus_minus_basis() -> Vec<ComplexVector> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            ComplexVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]),
            ComplexVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)]),
        ]
    }

    #[test]
    fn two_level_subspace_matches_z_minus_iy() {
        let spec = SynthesisSpec::new(plus_minus_basis(), 1, Coefficients::Subspace(vec![vec![ONE]])).unwrap();
        let ds = synth_subspace(&spec).unwrap();
        assert_eq!(ds.len(), 1);
        let (_, preset) = preset_two_level(1.0);
        // Z − iY = 2|+⟩⟨−|
        assert!(distance(&(&ds.operators()[0].op * C64::from(2.0)), &preset.operators()[0].op) < 1e-15);
    }

    #[test]
    fn bell_target_gets_three_dark_operators() {
        let ds = subspace_dissipators_for(&PureState::bell()).unwrap();
        assert_eq!(ds.len(), 3);
        for d in ds.operators() {
            assert!((&d.op * PureState::bell().amplitudes()).norm() < 1e-15);
        }
        assert!(is_dark(&ds, &PureState::bell()).unwrap());
    }

    #[test]
    fn subspace_operators_annihilate_the_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = complete_basis(&PureState::random(2, &mut rng));
        let rows = (0..2).map(|_| (0..2).map(|_| random_nonzero(&mut rng)).collect()).collect();
        let spec = SynthesisSpec::new(basis.clone(), 2, Coefficients::Subspace(rows)).unwrap();
        let ds = synth_subspace(&spec).unwrap();
        assert_eq!(ds.len(), 2);
        for d in ds.operators() {
            for v in &basis[..2] {
                assert!((&d.op * v).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn subspace_spec_errors() {
        let basis = SynthesisSpec::computational_basis(4);
        assert!(SynthesisSpec::new(basis.clone(), 4, Coefficients::Subspace(vec![])).is_err());
        assert!(SynthesisSpec::new(basis.clone(), 0, Coefficients::Subspace(vec![])).is_err());
        let rows = vec![vec![ONE, ZERO], vec![ZERO, ZERO]];
        assert!(matches!(
            SynthesisSpec::new(basis.clone(), 2, Coefficients::Subspace(rows)),
            Err(Error::InvalidSpec(_))
        ));
        let mut skew = basis;
        skew[1][0] = c(0.1, 0.0);
        assert!(SynthesisSpec::new(skew, 2, Coefficients::Subspace(vec![vec![ONE, ONE]; 2])).is_err());
    }

    #[test]
    fn single_operator_with_unit_coefficients() {
        let spec = SynthesisSpec::new(SynthesisSpec::computational_basis(4), 1, Coefficients::Single(vec![ONE; 3])).unwrap();
        let ds = synth_single(&spec, None).unwrap();
        let l = &ds.operators()[0].op;
        let expected = ComplexMatrix::from_fn(4, 4, |r, col| if r == 0 && col > 0 { ONE } else { ZERO });
        assert_eq!(*l, expected);
    }

    #[test]
    fn single_two_level_is_sigma_minus() {
        let spec = SynthesisSpec::new(SynthesisSpec::computational_basis(2), 1, Coefficients::Single(vec![ONE])).unwrap();
        let ds = synth_single(&spec, None).unwrap();
        let sigma_minus = (Pauli::X.matrix() + Pauli::Y.matrix() * I) * C64::from(0.5);
        assert_eq!(ds.operators()[0].op, sigma_minus);
    }

    #[test]
    fn single_rejects_zero_coefficient() {
        let res = SynthesisSpec::new(
            SynthesisSpec::computational_basis(4),
            1,
            Coefficients::Single(vec![ONE, ZERO, ONE]),
        );
        assert!(matches!(res, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn frame_rotation_moves_the_dark_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<C64> = (0..3).map(|_| random_nonzero(&mut rng)).collect();
        let ds = single_dissipator_for(&PureState::bell(), &a).unwrap();
        assert!(is_dark(&ds, &PureState::bell()).unwrap());
        let u = frame_for_target(&PureState::bell());
        assert!(distance(&(u.adjoint() * &u), &ComplexMatrix::identity(4, 4)) < 1e-14);
        let non_unitary = ComplexMatrix::identity(4, 4) * C64::from(2.0);
        let spec = SynthesisSpec::new(SynthesisSpec::computational_basis(4), 1, Coefficients::Single(a)).unwrap();
        assert!(synth_single(&spec, Some(&non_unitary)).is_err());
    }

    #[test]
    fn complete_basis_is_orthonormal_and_deterministic() {
        let b = complete_basis(&PureState::bell());
        // |00⟩ and |11⟩ tie; |00⟩ is dropped
        assert!((b[1][1] - ONE).norm() < 1e-15);
        assert!((b[2][2] - ONE).norm() < 1e-15);
        for (i, u) in b.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((u.dotc(v) - C64::from(expected)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn lfor2_annihilates_bell() {
        let ds = preset_lfor2();
        for d in ds.operators() {
            assert!((&d.op * PureState::bell().amplitudes()).norm() <= 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<C64> = (0..3).map(|_| random_nonzero(&mut rng)).collect();
        let l = ds.combined(&a).unwrap();
        assert!((&l * PureState::bell().amplitudes()).norm() <= 1e-13);
    }

    /// Each preset operator is rank one, `L_j = s_j |φ₂⟩⟨ϕ_j|`, and the induced
    /// `ϕ_j` are orthonormal and orthogonal to `φ₂`.
    #[test]
    fn lfor2_induced_states_are_orthonormal() {
        let bell = PureState::bell();
        let phi: Vec<ComplexVector> = preset_lfor2()
            .operators()
            .iter()
            .map(|d| {
                let v = d.op.adjoint() * bell.amplitudes();
                let reconstructed = outer(bell.amplitudes(), &v);
                assert!(distance(&reconstructed, &d.op) < 1e-13, "not rank one onto |φ₂⟩");
                let norm = v.norm();
                v / C64::from(norm)
            })
            .collect();
        for (j, u) in phi.iter().enumerate() {
            assert!(bell.amplitudes().dotc(u).norm() < 1e-14);
            for (k, v) in phi.iter().enumerate() {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((u.dotc(v) - C64::from(expected)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn is_dark_examples() {
        let ds = preset_lfor2();
        assert!(is_dark(&ds, &PureState::bell()).unwrap());
        assert!(!is_dark(&ds, &PureState::basis(2, 0)).unwrap());
        assert!(is_dark(&DissipatorSet::empty(), &PureState::basis(3, 4)).unwrap());
        assert!(is_dark(&ds, &PureState::plus()).is_err());
    }

    #[test]
    fn l1_on_ground_state() {
        let ds = preset_lfor2();
        let l1 = &ds.operators()[0].op;
        let out = l1 * PureState::basis(2, 0).amplitudes();
        let expected = ComplexVector::from_vec(vec![c(-2.0, 0.0), ZERO, ZERO, c(-2.0, 0.0)]);
        assert!((out - expected).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let ds = preset_lfor2().scaled(0.5).unwrap();
        let text = serde_json::to_string(&ds).unwrap();
        assert!(text.starts_with(r#"[{"gamma":0.5,"matrix":[["#));
        let back: DissipatorSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ds);
        assert!(serde_json::from_str::<DissipatorSet>(r#"[{"gamma":1.0,"matrix":[[1,0],[0,0],[0,0]]}]"#).is_err());
        assert!(serde_json::from_str::<DissipatorSet>(r#"[{"gamma":-1.0,"matrix":[[1,0]]}]"#).is_err());
    }

    #[test]
    fn rates_must_be_positive() {
        assert!(Dissipator::new(0.0, ComplexMatrix::identity(2, 2)).is_err());
        assert!(Dissipator::new(f64::NAN, ComplexMatrix::identity(2, 2)).is_err());
        let mixed = DissipatorSet::new(vec![
            Dissipator::new(1.0, ComplexMatrix::identity(2, 2)).unwrap(),
            Dissipator::new(1.0, ComplexMatrix::identity(4, 4)).unwrap(),
        ]);
        assert!(mixed.is_err());
    }

    #[test]
    fn transformed_conjugates_each_operator() {
        let v = matexp(&(Pauli::Y.matrix() * c(0.0, 0.3))).unwrap();
        let (_, ds) = preset_two_level(1.0);
        let t = ds.transformed(&v);
        assert!(distance(&t.operators()[0].op, &(&v * &ds.operators()[0].op * v.adjoint())) < 1e-15);
    }
}
