//! Compilation of many-body system–bath couplings `exp(iθ W⊗B)` into
//! conjugations by one- and two-qubit Pauli rotations around a single-qubit
//! seed coupling `exp(iθ Y_s⊗B)`.
//!
//! With `U_A = exp(i π/4 A)` and `A` anticommuting with `G`,
//!
//! ```text
//! U_A exp(iθ G⊗B) U_A† = exp(iθ (iAG)⊗B)
//! ```
//!
//! so a chain `A_1, …, A_k` maps the seed word to `i A_k ⋯ (i A_1 Y_s)`.
//! The bath factor is never touched, which is why verification can use an
//! arbitrary test matrix for `B`.
//!
//! Qubit labels in gates, JSON and text output are 1-based. Register qubit 0
//! is reserved for the ancilla of the Mølmer–Sørensen lowering.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{distance, identity, kron, kron_all, matexp, C64, ComplexMatrix, Pauli, PauliString, Phase, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::states::GraphSpec;

/// Largest Frobenius deviation accepted by the verifiers.
pub const VERIFY_TOL: f64 = 1e-10;

/// One element of a compiled sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(i·angle·A)`; `angle` is `±π/4` and `A` has weight 1 or 2.
    Conjugation { pauli: PauliString, angle: f64 },
    /// `exp(iθ Y_q⊗B)` on system qubit `qubit` (0-based).
    SeedCoupling { qubit: usize, theta: f64 },
    /// `exp(−i·angle·Z_0)` on the ancilla.
    AncillaRotation { angle: f64 },
    /// `exp[−iμ (cos ν S_x + sin ν S_y)² / 4]` with `S` summed over `qubits`
    /// (register indices, ancilla first).
    MsGate { qubits: Vec<usize>, mu: f64, nu: f64 },
}

/// Ordered gates (first applied first) realising `exp(iθ W⊗B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub target: PauliString,
    pub theta: f64,
}

/// `i·A·G`, the image of `G` under conjugation by `exp(i π/4 A)`.
pub fn conjugation_step(a: &PauliString, g: &PauliString) -> Result<PauliString> {
    if a.weight() == 0 || a.weight() > 2 {
        return Err(Error::InvalidArgument(format!(
            "conjugator {} must have weight 1 or 2",
            a.label()
        )));
    }
    if a.phase() != Phase::ONE {
        return Err(Error::InvalidArgument(format!("conjugator {a} must carry phase +1")));
    }
    if a.n_qubits() != g.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: g.n_qubits(),
            found: a.n_qubits(),
        });
    }
    if a.commutes_with(g) {
        return Err(Error::CommutingPair(a.label(), g.label()));
    }
    Ok(a.mul(g)?.times_phase(Phase::I))
}

impl GateSequence {
    /// `U_k⋯U_1 S U_1†⋯U_k†` for the chain `A_1, …, A_k`, as a time-ordered
    /// gate list. The target is computed from the chain and must have phase +1.
    pub fn from_chain(n_qubits: usize, seed_qubit: usize, theta: f64, chain: &[PauliString]) -> Result<Self> {
        if seed_qubit >= n_qubits {
            return Err(Error::InvalidArgument(format!("seed qubit {} outside register", seed_qubit + 1)));
        }
        let mut word = PauliString::single(n_qubits, seed_qubit, Pauli::Y);
        for a in chain {
            word = conjugation_step(a, &word)?;
        }
        if word.phase() != Phase::ONE {
            return Err(Error::InvalidArgument(format!("chain produces {word}, not a +1 word")));
        }
        let mut gates: Vec<Gate> = chain
            .iter()
            .rev()
            .map(|a| Gate::Conjugation {
                pauli: a.clone(),
                angle: -FRAC_PI_4,
            })
            .collect();
        gates.push(Gate::SeedCoupling { qubit: seed_qubit, theta });
        gates.extend(chain.iter().map(|a| Gate::Conjugation {
            pauli: a.clone(),
            angle: FRAC_PI_4,
        }));
        Ok(Self {
            n_qubits,
            gates,
            target: word,
            theta,
        })
    }

    /// The conjugators in the order they act on the seed word.
    pub fn chain(&self) -> Vec<PauliString> {
        let seed = self.gates.iter().position(|g| matches!(g, Gate::SeedCoupling { .. }));
        match seed {
            Some(i) => self.gates[i + 1..]
                .iter()
                .filter_map(|g| match g {
                    Gate::Conjugation { pauli, .. } => Some(pauli.clone()),
                    _ => None,
                })
                .collect(),
            None => Vec::new(),
        }
    }

    /// Number of distinct conjugators (each appears once on either side of
    /// the seed).
    pub fn conjugator_count(&self) -> usize {
        self.chain().len()
    }

    /// One gate per line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# exp(i theta {} B), theta = {}", self.target.label(), self.theta);
        for g in &self.gates {
            let _ = match g {
                Gate::Conjugation { pauli, angle } => {
                    let sign = if *angle < 0.0 { "-" } else { "+" };
                    writeln!(out, "U[{}]({}pi/4)", pauli.label(), sign)
                }
                Gate::SeedCoupling { qubit, theta } => writeln!(out, "SEED[Y{} B]({theta})", qubit + 1),
                Gate::AncillaRotation { angle } => writeln!(out, "RZ[0]({angle})"),
                Gate::MsGate { qubits, mu, nu } => {
                    let q: Vec<String> = qubits.iter().map(|q| q.to_string()).collect();
                    writeln!(out, "MS[{}](mu={mu}, nu={nu})", q.join(","))
                }
            };
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&SequenceJson::from(self)).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SequenceJson = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        raw.try_into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateJson {
    kind: String,
    qubits: Vec<usize>,
    pauli_word: Option<String>,
    angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceJson {
    n_qubits: usize,
    target: String,
    theta: f64,
    gates: Vec<GateJson>,
}

impl From<&GateSequence> for SequenceJson {
    fn from(seq: &GateSequence) -> Self {
        let gates = seq
            .gates
            .iter()
            .map(|g| match g {
                Gate::Conjugation { pauli, angle } => GateJson {
                    kind: "conjugation".into(),
                    qubits: pauli.support().iter().map(|q| q + 1).collect(),
                    pauli_word: Some(pauli.word_string()),
                    angle: *angle,
                    nu: None,
                },
                Gate::SeedCoupling { qubit, theta } => GateJson {
                    kind: "seed".into(),
                    qubits: vec![qubit + 1],
                    pauli_word: Some("Y".into()),
                    angle: *theta,
                    nu: None,
                },
                Gate::AncillaRotation { angle } => GateJson {
                    kind: "ancilla_rotation".into(),
                    qubits: vec![0],
                    pauli_word: Some("Z".into()),
                    angle: *angle,
                    nu: None,
                },
                Gate::MsGate { qubits, mu, nu } => GateJson {
                    kind: "ms".into(),
                    qubits: qubits.clone(),
                    pauli_word: None,
                    angle: *mu,
                    nu: Some(*nu),
                },
            })
            .collect();
        Self {
            n_qubits: seq.n_qubits,
            target: seq.target.to_string(),
            theta: seq.theta,
            gates,
        }
    }
}

impl TryFrom<SequenceJson> for GateSequence {
    type Error = Error;

    fn try_from(raw: SequenceJson) -> Result<Self> {
        let bad = |msg: String| Error::Serialization(msg);
        let target: PauliString = raw.target.parse()?;
        let gates = raw
            .gates
            .into_iter()
            .enumerate()
            .map(|(i, g)| match g.kind.as_str() {
                "conjugation" => {
                    let word = g.pauli_word.ok_or_else(|| bad(format!("gate {i}: missing pauli_word")))?;
                    let pauli: PauliString = word.parse()?;
                    if pauli.n_qubits() != raw.n_qubits {
                        return Err(bad(format!("gate {i}: word {word} has the wrong length")));
                    }
                    Ok(Gate::Conjugation { pauli, angle: g.angle })
                }
                "seed" => match g.qubits.as_slice() {
                    [q] if *q >= 1 && *q <= raw.n_qubits => Ok(Gate::SeedCoupling {
                        qubit: q - 1,
                        theta: g.angle,
                    }),
                    _ => Err(bad(format!("gate {i}: seed needs one qubit in 1..={}", raw.n_qubits))),
                },
                "ancilla_rotation" => Ok(Gate::AncillaRotation { angle: g.angle }),
                "ms" => Ok(Gate::MsGate {
                    qubits: g.qubits,
                    mu: g.angle,
                    nu: g.nu.unwrap_or(0.0),
                }),
                other => Err(bad(format!("gate {i}: unknown kind {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GateSequence {
            n_qubits: raw.n_qubits,
            gates,
            target,
            theta: raw.theta,
        })
    }
}

/// Compile `exp(iθ W⊗B)` for a +1-phase word `W` whose support is connected
/// in `allowed` (vertices `1..=n`).
///
/// The seed is `Y` on the lowest support qubit. The support is covered by a
/// breadth-first spanning tree; each tree vertex, in BFS order, attaches its
/// children with two-qubit conjugators `P_p ⊗ W_c` and uses single-qubit
/// conjugators on itself to land on `W_p` with overall phase +1. Within one
/// vertex the shortest such move list is found by breadth-first search.
pub fn compile_coupling(w: &PauliString, theta: f64, allowed: &GraphSpec) -> Result<GateSequence> {
    let n = w.n_qubits();
    if allowed.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: allowed.n(),
        });
    }
    if w.phase() != Phase::ONE {
        return Err(Error::InvalidArgument(format!(
            "target {w} must carry phase +1; absorb the phase into theta"
        )));
    }
    let support = w.support();
    let Some(&seed) = support.first() else {
        return Err(Error::InvalidArgument("target is the identity".into()));
    };

    // Spanning tree of the support-induced subgraph, 0-based.
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut order = vec![seed];
    let mut seen = vec![false; n];
    seen[seed] = true;
    let mut queue = VecDeque::from([seed]);
    while let Some(v) = queue.pop_front() {
        for u in allowed.neighbours(v + 1).into_iter().map(|u| u - 1) {
            if !seen[u] && w.letter(u) != Pauli::I {
                seen[u] = true;
                children.entry(v).or_default().push(u);
                order.push(u);
                queue.push_back(u);
            }
        }
    }
    if order.len() != support.len() {
        return Err(Error::DisconnectedSupport(w.label()));
    }

    let mut current = PauliString::single(n, seed, Pauli::Y);
    let mut chain = Vec::new();
    for &p in &order {
        let kids = children.get(&p).map(Vec::as_slice).unwrap_or(&[]);
        let moves = vertex_moves(&current, p, kids, w)?;
        for a in moves {
            current = conjugation_step(&a, &current)?;
            chain.push(a);
        }
    }
    debug_assert_eq!(current, *w);
    GateSequence::from_chain(n, seed, theta, &chain)
}

/// Search node: letter at the vertex, phase, children attached so far.
type MoveKey = (Pauli, Phase, usize);

/// Shortest conjugator list that attaches every child of `p` and leaves `p`
/// holding `W_p` with phase +1.
fn vertex_moves(start: &PauliString, p: usize, kids: &[usize], w: &PauliString) -> Result<Vec<PauliString>> {
    let n = start.n_qubits();
    let key = |g: &PauliString, k: usize| (g.letter(p), g.phase(), k);
    let mut prev: HashMap<MoveKey, Option<(MoveKey, PauliString)>> = HashMap::new();
    let mut queue = VecDeque::new();
    prev.insert(key(start, 0), None);
    queue.push_back((start.clone(), 0usize));
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    while let Some((g, k)) = queue.pop_front() {
        let here = key(&g, k);
        if k == kids.len() && g.letter(p) == w.letter(p) && g.phase() == Phase::ONE {
            let mut moves = Vec::new();
            let mut at = here;
            while let Some(Some((from, a))) = prev.get(&at) {
                moves.push(a.clone());
                at = *from;
            }
            moves.reverse();
            return Ok(moves);
        }
        let mut candidates: Vec<(PauliString, usize)> = letters
            .iter()
            .map(|&l| (PauliString::single(n, p, l), k))
            .collect();
        if let Some(&c) = kids.get(k) {
            candidates.extend(
                letters
                    .iter()
                    .map(|&l| (PauliString::from_sparse(n, &[(p, l), (c, w.letter(c))]), k + 1)),
            );
        }
        for (a, next_k) in candidates {
            if a.commutes_with(&g) {
                continue;
            }
            let next = conjugation_step(&a, &g)?;
            let nk = key(&next, next_k);
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(nk) {
                e.insert(Some((here, a)));
                queue.push_back((next, next_k));
            }
        }
    }
    Err(Error::InvalidArgument(format!(
        "no conjugator route at qubit {} towards {}",
        p + 1,
        w.label()
    )))
}

/// Test matrix standing in for the bath operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BathTestSpace {
    op: ComplexMatrix,
}

impl BathTestSpace {
    pub fn new(op: ComplexMatrix) -> Result<Self> {
        let d = crate::algebra::ensure_square(&op)?;
        if d < 2 {
            return Err(Error::InvalidArgument("bath test space needs dimension at least 2".into()));
        }
        Ok(Self { op })
    }

    /// `(G + G†)/2` for a complex Gaussian `G`.
    pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        let g = Self::random_complex(d, rng)?.op;
        Self::new((&g + g.adjoint()) * C64::from(0.5))
    }

    /// Entries drawn independently from the standard complex Gaussian.
    pub fn random_complex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        let op = ComplexMatrix::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        Self::new(op)
    }

    /// Lowering operator of an oscillator truncated to `d` levels.
    pub fn oscillator_lowering(d: usize) -> Result<Self> {
        Self::new(ComplexMatrix::from_fn(d, d, |i, j| {
            if j == i + 1 {
                C64::from((j as f64).sqrt())
            } else {
                ZERO
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }
}

/// Outcome of a dense verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// `(θ, deviation)` per sample.
    pub samples: Vec<(f64, f64)>,
}

impl VerificationReport {
    fn from_samples(samples: Vec<(f64, f64)>) -> Self {
        let max_deviation = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        Self {
            passed: samples.iter().all(|s| s.1 <= VERIFY_TOL),
            max_deviation,
            tolerance: VERIFY_TOL,
            samples,
        }
    }
}

/// `cos(angle) I + i sin(angle) A`, which equals `exp(i·angle·A)` for a Pauli
/// word `A`.
fn pauli_rotation(a: &PauliString, angle: f64) -> ComplexMatrix {
    let d = 1usize << a.n_qubits();
    identity(d) * C64::from(angle.cos()) + a.dense() * (I * angle.sin())
}

/// Dense product of a conjugation/seed sequence on system ⊗ bath, with the
/// seed angle replaced by `theta`.
fn coupling_unitary(seq: &GateSequence, bath: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let d = bath.nrows();
    let dim = (1usize << seq.n_qubits) * d;
    let bath_id = identity(d);
    let mut u = identity(dim);
    for g in &seq.gates {
        let step = match g {
            Gate::Conjugation { pauli, angle } => {
                if pauli.n_qubits() != seq.n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: seq.n_qubits,
                        found: pauli.n_qubits(),
                    });
                }
                kron(&pauli_rotation(pauli, *angle), &bath_id)
            }
            Gate::SeedCoupling { qubit, .. } => {
                let y = PauliString::single(seq.n_qubits, *qubit, Pauli::Y).dense();
                matexp(&(kron(&y, bath) * (I * theta)))?
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "verify_sequence handles conjugation and seed gates only, found {other:?}"
                )))
            }
        };
        u = step * u;
    }
    Ok(u)
}

/// Compares the dense product of `seq` with `exp(iθ W⊗B)` at each sampled
/// angle. A deviation above [`VERIFY_TOL`] yields a failing report.
pub fn verify_sequence(seq: &GateSequence, bath: &BathTestSpace, thetas: &[f64]) -> Result<VerificationReport> {
    if seq.target.n_qubits() != seq.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: seq.n_qubits,
            found: seq.target.n_qubits(),
        });
    }
    let generator = kron(&seq.target.dense(), bath.op());
    let samples = thetas
        .iter()
        .map(|&theta| {
            let realised = coupling_unitary(seq, bath.op(), theta)?;
            let expected = matexp(&(&generator * (I * theta)))?;
            Ok((theta, distance(&realised, &expected)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_samples(samples))
}

/// `U_MS(−π/2, 0) · exp(−iθ Z_0) · U_MS(π/2, 0)` on the register
/// `{0 (ancilla), p, q}` with `p, q ≥ 1`. With the ancilla in `|0⟩` this acts
/// as `exp(iθ X_p X_q)` on the system and returns the ancilla to `|0⟩` with no
/// extra phase; in general it equals `exp(iθ Z_0 X_p X_q)`.
pub fn ms_decompose(p: usize, q: usize, theta: f64) -> Result<GateSequence> {
    if p == q {
        return Err(Error::InvalidArgument(format!("MS lowering needs distinct qubits, got {p} twice")));
    }
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("register qubit 0 is the ancilla".into()));
    }
    let n = p.max(q) + 1;
    let target = PauliString::from_sparse(n, &[(p, Pauli::X), (q, Pauli::X)]);
    let qubits = vec![0, p, q];
    Ok(GateSequence {
        n_qubits: n,
        gates: vec![
            Gate::MsGate {
                qubits: qubits.clone(),
                mu: std::f64::consts::FRAC_PI_2,
                nu: 0.0,
            },
            Gate::AncillaRotation { angle: theta },
            Gate::MsGate {
                qubits,
                mu: -std::f64::consts::FRAC_PI_2,
                nu: 0.0,
            },
        ],
        target,
        theta,
    })
}

/// `exp[−iμ (cos ν S_x + sin ν S_y)² / 4]` on an `n`-qubit register.
pub fn ms_unitary(n: usize, qubits: &[usize], mu: f64, nu: f64) -> Result<ComplexMatrix> {
    if qubits.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!("MS qubits {qubits:?} outside a {n}-qubit register")));
    }
    let d = 1usize << n;
    let mut s = ComplexMatrix::zeros(d, d);
    for &q in qubits {
        s += PauliString::single(n, q, Pauli::X).dense() * C64::from(nu.cos());
        s += PauliString::single(n, q, Pauli::Y).dense() * C64::from(nu.sin());
    }
    matexp(&(&s * &s * C64::new(0.0, -mu / 4.0)))
}

/// Dense register unitary of an MS lowering, with the ancilla angle replaced
/// by `theta`.
pub fn ms_sequence_unitary(seq: &GateSequence, theta: f64) -> Result<ComplexMatrix> {
    let n = seq.n_qubits;
    let mut u = identity(1 << n);
    for g in &seq.gates {
        let step = match g {
            Gate::MsGate { qubits, mu, nu } => ms_unitary(n, qubits, *mu, *nu)?,
            Gate::AncillaRotation { .. } => pauli_rotation(&PauliString::single(n, 0, Pauli::Z), -theta),
            Gate::Conjugation { pauli, angle } => pauli_rotation(pauli, *angle),
            Gate::SeedCoupling { .. } => {
                return Err(Error::InvalidArgument("seed couplings need a bath factor".into()))
            }
        };
        u = step * u;
    }
    Ok(u)
}

/// Checks an MS lowering on the ancilla-`|0⟩` sector:
/// `‖U (|0⟩⟨0| ⊗ I) − |0⟩⟨0| ⊗ exp(iθ W)‖_F` per sampled angle, where `W` is
/// the sequence target.
pub fn verify_ms(seq: &GateSequence, thetas: &[f64]) -> Result<VerificationReport> {
    let n = seq.n_qubits;
    let p0 = kron_all(
        std::iter::once(&from_projector0()).chain(std::iter::repeat_n(&identity(2), n - 1)),
    );
    let samples = thetas
        .iter()
        .map(|&theta| {
            let u = ms_sequence_unitary(seq, theta)?;
            let expected = &p0 * pauli_rotation(&seq.target, theta);
            Ok((theta, distance(&(u * &p0), &expected)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_samples(samples))
}

fn from_projector0() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 0 { ONE } else { ZERO })
}

/// Generator `c W⊗B† + c̄ W†⊗B` of one coupling term.
fn term_generator(w: &PauliString, coeff: C64, bath: &ComplexMatrix) -> ComplexMatrix {
    let fwd = kron(&w.dense(), &bath.adjoint()) * coeff;
    &fwd + fwd.adjoint()
}

fn check_terms(terms: &[(PauliString, C64)], dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let n = terms
        .first()
        .map(|t| t.0.n_qubits())
        .ok_or_else(|| Error::InvalidArgument("no coupling terms".into()))?;
    if let Some(t) = terms.iter().find(|t| t.0.n_qubits() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.0.n_qubits(),
        });
    }
    Ok(n)
}

/// First-order product `Π_α exp[−i(c_α W_α⊗B† + h.c.) dt]`, the first term
/// leftmost.
pub fn trotter_step(terms: &[(PauliString, C64)], dt: f64, bath: &BathTestSpace) -> Result<ComplexMatrix> {
    let n = check_terms(terms, dt)?;
    let dim = (1usize << n) * bath.dim();
    terms.iter().try_fold(identity(dim), |acc, (w, c)| {
        Ok(acc * matexp(&(term_generator(w, *c, bath.op()) * C64::new(0.0, -dt)))?)
    })
}

/// `exp[−i Σ_α (c_α W_α⊗B† + h.c.) dt]`
pub fn exact_step(terms: &[(PauliString, C64)], dt: f64, bath: &BathTestSpace) -> Result<ComplexMatrix> {
    let n = check_terms(terms, dt)?;
    let dim = (1usize << n) * bath.dim();
    let total = terms
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, (w, c)| acc + term_generator(w, *c, bath.op()));
    matexp(&(total * C64::new(0.0, -dt)))
}

/// `‖trotter_step − exact_step‖_F`
pub fn trotter_error(terms: &[(PauliString, C64)], dt: f64, bath: &BathTestSpace) -> Result<f64> {
    Ok(distance(&trotter_step(terms, dt, bath)?, &exact_step(terms, dt, bath)?))
}
