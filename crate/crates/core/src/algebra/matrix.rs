//! Dense complex matrices and the handful of decompositions the rest of the
//! crate needs.
//!
//! Everything is dense. Operators on `n` qubits are `2^n x 2^n`, with qubit 1
//! as the most significant (leftmost) tensor factor.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default relative threshold for [`null_space`].
pub const NULL_SPACE_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a matrix from row-major nested slices of complex entries.
pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    DMatrix::from_fn(r, cols, |i, j| rows[i][j])
}

/// Build a matrix from row-major nested slices of real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    DMatrix::from_fn(r, cols, |i, j| C64::from(rows[i][j]))
}

pub fn identity(dim: usize) -> ComplexMatrix {
    DMatrix::identity(dim, dim)
}

/// Kronecker product with `(A ⊗ B)[i·p + k, j·q + l] = A[i, j] B[k, l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, leftmost factor most significant.
pub fn kron_all<'a, It>(factors: It) -> ComplexMatrix
where
    It: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

pub fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Matrix exponential by scaling and squaring with Padé approximants.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(a.clone());
    }
    Ok(a.exp())
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of `a - b`.
pub fn distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    frobenius(&(a - b))
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Largest entry of `|A - A†|`.
pub fn hermiticity_error(a: &ComplexMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part `(A + A†)/2` is used.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_square(a)?;
    let h = (a + a.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(h);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalues of a general square complex matrix via the complex Schur form.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::new(a.clone());
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Orthonormal basis of the numerical null space of `a`.
///
/// A right singular vector is kept when its singular value is at most
/// `tol` times the largest singular value. The zero matrix has a full null
/// space.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexVector>> {
    let n = ensure_square(a)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "null space tolerance must be positive, got {tol}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = max_abs(a);
    if scale == 0.0 {
        return Ok((0..n).map(|i| ComplexVector::from_fn(n, |k, _| if k == i { ONE } else { ZERO })).collect());
    }
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("requested V");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * sigma_max)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect();
    Ok(basis)
}

/// Column-stacking vectorisation: `vec(A)[i + j·rows] = A[i, j]`.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    // nalgebra storage is column-major already.
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`] for a square `dim x dim` matrix.
pub fn unvectorize(v: &ComplexVector, dim: usize) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(ComplexMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// `|a⟩⟨b|`
pub fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.adjoint()
}

/// Number of qubits for a `2^n`-dimensional space.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_x() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn pauli_y() -> ComplexMatrix {
        from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    fn pauli_z() -> ComplexMatrix {
        from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// Taylor series to a fixed number of terms; only sensible for small norms.
    fn series_exp(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let n = a.nrows();
        let mut out = identity(n);
        let mut term = identity(n);
        for k in 1..terms {
            term = &term * a / C64::from(k as f64);
            out += &term;
        }
        out
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zi = kron(&pauli_z(), &identity(2));
        let expected = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            ONE, ONE, -ONE, -ONE,
        ]));
        assert_eq!(zi, expected);
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = pauli_x();
        let b = pauli_y();
        let k = kron(&a, &b);
        for i in 0..2 {
            for p in 0..2 {
                for j in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(2 * i + p, 2 * j + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
        // blocks [[0, Y], [Y, 0]]
        assert_eq!(k.view((0, 2), (2, 2)), pauli_y());
        assert_eq!(k.view((2, 0), (2, 2)), pauli_y());
        assert_eq!(k.view((0, 0), (2, 2)), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn matexp_examples() {
        assert_eq!(matexp(&ComplexMatrix::zeros(3, 3)).unwrap(), identity(3));

        let theta = std::f64::consts::FRAC_PI_2;
        let u = matexp(&(pauli_z() * c(0.0, theta))).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 0)].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(1, 1)].im, -1.0, epsilon = 1e-15);

        let gen = pauli_x() * c(0.0, std::f64::consts::FRAC_PI_4);
        let oracle = series_exp(&gen, 30);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = from_rows(&[&[c(h, 0.0), c(0.0, h)], &[c(0.0, h), c(h, 0.0)]]);
        assert!(distance(&oracle, &expected) < 1e-14);
        assert!(distance(&matexp(&gen).unwrap(), &oracle) < 1e-14);
    }

    #[test]
    fn matexp_rejects_non_square() {
        assert!(matches!(
            matexp(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn null_space_examples() {
        assert!(null_space(&identity(3), NULL_SPACE_TOL).unwrap().is_empty());
        assert_eq!(null_space(&ComplexMatrix::zeros(4, 4), NULL_SPACE_TOL).unwrap().len(), 4);
        let d = from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let ns = null_space(&d, NULL_SPACE_TOL).unwrap();
        assert_eq!(ns.len(), 1);
        assert_abs_diff_eq!(ns[0][0].norm(), 1.0, epsilon = 1e-14);
        assert!(null_space(&d, 0.0).is_err());
        assert!(null_space(&d, -1.0).is_err());
    }

    #[test]
    fn vectorize_is_column_stacking() {
        let a = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = vectorize(&a);
        let flat: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(flat, vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvectorize(&v, 2).unwrap(), a);
        // vec(A X B) = (Bᵀ ⊗ A) vec(X)
        let x = from_rows(&[&[c(0.5, 1.0), c(-2.0, 0.0)], &[c(0.0, 3.0), c(1.0, -1.0)]]);
        let b = pauli_y();
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let a = from_rows(&[&[c(1.0, 1.0), c(5.0, 0.0)], &[ZERO, c(-2.0, 0.5)]]);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert_abs_diff_eq!(ev[0].re, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[0].im, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qubit_count_requires_power_of_two() {
        assert_eq!(qubit_count(8).unwrap(), 3);
        assert!(matches!(qubit_count(6), Err(Error::NotPowerOfTwo(6))));
    }
}
