//! Symbolic Pauli strings and sums.
//!
//! A [`PauliString`] is `i^k · P₁ ⊗ P₂ ⊗ … ⊗ Pₙ` with each `Pⱼ ∈ {I, X, Y, Z}`.
//! Letters are stored with qubit 1 at index 0, matching the tensor order of
//! [`kron`](super::matrix::kron).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::{c, from_rows, identity, kron_all, qubit_count, ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped by [`PauliSum::decompose`].
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => identity(2),
            Pauli::X => from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Pauli::Y => from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            Pauli::Z => from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
        }
    }

    /// Single-qubit product `self · other = i^k · letter`.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Pauli> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Bit flipped by this letter, and the factor it picks up when acting on
    /// a basis state whose bit is `input`.
    #[inline]
    fn act(self, input: u8) -> (u8, C64) {
        match (self, input) {
            (Pauli::I, b) => (b, ONE),
            (Pauli::X, b) => (b ^ 1, ONE),
            (Pauli::Y, 0) => (1, I),
            (Pauli::Y, _) => (0, -I),
            (Pauli::Z, 0) => (0, ONE),
            (Pauli::Z, _) => (1, -ONE),
        }
    }
}

/// A power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Phase {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self::with_phase(Phase::ONE, letters)
    }

    pub fn with_phase(phase: Phase, letters: Vec<Pauli>) -> Self {
        Self { phase, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// `letter` on `qubit` (0-based) and identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Self::new(letters)
    }

    /// Build from `(qubit, letter)` pairs, 0-based.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in terms {
            letters[q] = p;
        }
        Self::new(letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    /// The same letters with phase `+1`.
    pub fn word(&self) -> PauliString {
        Self::new(self.letters.clone())
    }

    pub fn negated(&self) -> PauliString {
        Self::with_phase(self.phase * Phase::MINUS_ONE, self.letters.clone())
    }

    pub fn times_phase(&self, phase: Phase) -> PauliString {
        Self::with_phase(self.phase * phase, self.letters.clone())
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| !a.commutes_with(**b))
            .count();
        anti % 2 == 0
    }

    /// Symbolic product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                found: other.n_qubits(),
            });
        }
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = phase * ph;
                p
            })
            .collect();
        Ok(Self::with_phase(phase, letters))
    }

    pub fn adjoint(&self) -> PauliString {
        Self::with_phase(self.phase.conj(), self.letters.clone())
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn dense(&self) -> ComplexMatrix {
        let mats: Vec<ComplexMatrix> = self.letters.iter().map(|p| p.matrix()).collect();
        kron_all(&mats) * self.phase.value()
    }

    /// Column `col` of the dense matrix as `(row, value)`; Pauli strings are
    /// phased permutations so there is exactly one non-zero per column.
    pub fn column_entry(&self, col: usize) -> (usize, C64) {
        let n = self.n_qubits();
        let mut row = 0usize;
        let mut value = self.phase.value();
        for (q, &p) in self.letters.iter().enumerate() {
            let shift = n - 1 - q;
            let bit = ((col >> shift) & 1) as u8;
            let (out, factor) = p.act(bit);
            row |= (out as usize) << shift;
            value *= factor;
        }
        (row, value)
    }

    /// Render with 1-based qubit subscripts, e.g. `Z1 X2`, or `I` when trivial.
    pub fn label(&self) -> String {
        let body: Vec<String> = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, p)| format!("{}{}", p.symbol(), q + 1))
            .collect();
        let body = if body.is_empty() { "I".to_string() } else { body.join(" ") };
        match self.phase {
            Phase::ONE => body,
            ph => format!("{ph}{body}"),
        }
    }

    /// Dense word such as `"XZI"`, without phase.
    pub fn word_string(&self) -> String {
        self.letters.iter().map(|p| p.symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != Phase::ONE {
            write!(f, "{}", self.phase)?;
        }
        f.write_str(&self.word_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses an optional phase prefix (`+`, `-`, `+i`, `-i`, `i`) followed by
    /// a dense word such as `XYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i").or_else(|| s.strip_prefix("i")) {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else {
            (Phase::ONE, s)
        };
        if rest.is_empty() {
            return Err(Error::InvalidArgument(format!("empty pauli word {s:?}")));
        }
        let letters = rest
            .chars()
            .map(|ch| {
                Pauli::from_symbol(ch)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad pauli letter {ch:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::with_phase(phase, letters))
    }
}

/// `Σ_α c_α W_α` in canonical form: phase-free words, each appearing once.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<Vec<Pauli>, C64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Add `coeff · string`, folding the string's phase into the coefficient.
    pub fn add_term(&mut self, coeff: C64, string: &PauliString) -> Result<()> {
        if string.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: string.n_qubits(),
            });
        }
        let entry = self.terms.entry(string.letters.clone()).or_insert(ZERO);
        *entry += coeff * string.phase.value();
        if *entry == ZERO {
            self.terms.remove(&string.letters);
        }
        Ok(())
    }

    pub fn from_terms<'a>(n: usize, terms: impl IntoIterator<Item = (C64, &'a PauliString)>) -> Result<Self> {
        let mut sum = Self::zero(n);
        for (coeff, s) in terms {
            sum.add_term(coeff, s)?;
        }
        Ok(sum)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (C64, PauliString)> + '_ {
        self.terms.iter().map(|(w, &cf)| (cf, PauliString::new(w.clone())))
    }

    pub fn coefficient(&self, word: &PauliString) -> C64 {
        self.terms.get(&word.letters).copied().unwrap_or(ZERO) * word.phase.value().conj()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let dim = 1usize << self.n;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (cf, s) in self.terms() {
            for col in 0..dim {
                let (row, v) = s.column_entry(col);
                out[(row, col)] += cf * v;
            }
        }
        out
    }

    /// Expand `m` in the Pauli basis: `c_α = Tr(W_α† M) / 2^n`.
    pub fn decompose(m: &ComplexMatrix) -> Result<PauliSum> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let dim = m.nrows();
        let n = qubit_count(dim)?;
        let norm = c(1.0 / dim as f64, 0.0);
        let mut sum = Self::zero(n);
        for code in 0..(1usize << (2 * n)) {
            let letters: Vec<Pauli> = (0..n).map(|q| Pauli::ALL[(code >> (2 * (n - 1 - q))) & 3]).collect();
            let w = PauliString::new(letters);
            let overlap: C64 = (0..dim)
                .map(|col| {
                    let (row, v) = w.column_entry(col);
                    v.conj() * m[(row, col)]
                })
                .sum();
            let coeff = overlap * norm;
            if coeff.norm() >= DROP_TOL {
                sum.terms.insert(w.letters, coeff);
            }
        }
        Ok(sum)
    }
}

/// Expand `m` (a `2^n x 2^n` matrix) in the Pauli basis.
pub fn pauli_decompose(m: &ComplexMatrix, n: usize) -> Result<PauliSum> {
    let dim = m.nrows();
    if qubit_count(dim)? != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: dim,
        });
    }
    PauliSum::decompose(m)
}

/// Symbolic product of two Pauli strings.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.mul(q)
}
