//! Dense complex linear algebra: adjoints, Hermitian spectral splits,
//! invertibility tests.
//!
//! Every tolerance is relative: a quantity is treated as zero when it is at
//! most `tol * max(1, scale)`, where `scale` is the norm of the operator the
//! quantity was derived from.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix carrying every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Default tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `tol` scaled by the size of the operator it is compared against.
pub fn threshold(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Lift a real (typically integer) matrix into the complex carrier.
pub fn from_real<T: nalgebra::Scalar + Copy + Into<f64>>(m: &DMatrix<T>) -> CMatrix {
    m.map(|x| Complex64::new(x.into(), 0.0))
}

pub fn from_i64(m: &DMatrix<i64>) -> CMatrix {
    m.map(|x| Complex64::new(x as f64, 0.0))
}

/// Block-diagonal matrix from the given blocks.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `‖u* u − 1‖` for a square matrix.
pub fn unitary_residual(u: &CMatrix) -> f64 {
    norm(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigen-decomposition of a Hermitian matrix (symmetrized before solving).
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence(n))?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Positive, negative and kernel spectral projections of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub p_plus: CMatrix,
    pub p_minus: CMatrix,
    pub p_zero: CMatrix,
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub rank_zero: usize,
    /// Smallest `|λ|` among eigenvalues classified as nonzero (`+∞` if none).
    pub min_abs_nonzero_eigenvalue: f64,
    /// Classification threshold actually applied.
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
}

impl SpectralSplit {
    pub fn size(&self) -> usize {
        self.p_plus.nrows()
    }
}

/// Split a Hermitian matrix into its positive, negative and (near-)kernel
/// spectral subspaces. Eigenvalues with `|λ| ≤ tol·max(1, ‖h‖)` count as
/// zero, ties included.
pub fn spectral_split(h: &CMatrix, tol: f64) -> Result<SpectralSplit> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "spectral split of a {}x{} matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let asym = norm(&(h - h.adjoint()));
    let asym_thr = threshold(tol, norm(h));
    if asym > asym_thr {
        return Err(Error::NotSelfAdjoint {
            residual: asym,
            threshold: asym_thr,
        });
    }
    let n = h.nrows();
    let (values, vectors) = hermitian_eigen(h)?;
    let op_norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let thr = threshold(tol, op_norm);

    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut zero = Vec::new();
    let mut min_abs = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > thr {
            plus.push(i);
            min_abs = min_abs.min(v.abs());
        } else if v < -thr {
            minus.push(i);
            min_abs = min_abs.min(v.abs());
        } else {
            zero.push(i);
        }
    }
    let projector = |idx: &[usize]| -> CMatrix {
        let mut basis = zeros(n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            basis.set_column(c, &vectors.column(i));
        }
        &basis * basis.adjoint()
    };
    Ok(SpectralSplit {
        p_plus: projector(&plus),
        p_minus: projector(&minus),
        p_zero: projector(&zero),
        rank_plus: plus.len(),
        rank_minus: minus.len(),
        rank_zero: zero.len(),
        min_abs_nonzero_eigenvalue: min_abs,
        threshold: thr,
        eigenvalues: values,
    })
}

/// Singular values of `m` in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Invertibility of a square matrix: true iff the smallest singular value
/// exceeds `tol·max(1, ‖m‖₂)`. The empty matrix is invertible with smallest
/// singular value `+∞`.
///
/// # Panics
/// If `m` is not square.
pub fn is_invertible(m: &CMatrix, tol: f64) -> (bool, f64) {
    assert!(m.is_square(), "is_invertible requires a square matrix");
    let sv = singular_values(m);
    let Some(&largest) = sv.first() else {
        return (true, f64::INFINITY);
    };
    let smallest = *sv.last().unwrap();
    (smallest > threshold(tol, largest), smallest)
}

/// Invertibility test for a Hermitian matrix through its spectrum; the
/// singular values of a Hermitian matrix are the absolute eigenvalues.
pub fn hermitian_is_invertible(h: &CMatrix, tol: f64) -> Result<(bool, f64)> {
    let (values, _) = hermitian_eigen(h)?;
    let Some(largest) = values.iter().map(|v| v.abs()).reduce(f64::max) else {
        return Ok((true, f64::INFINITY));
    };
    let smallest = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Ok((smallest > threshold(tol, largest), smallest))
}

/// Numerical rank with the relative threshold used throughout.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&largest) = sv.first() else {
        return 0;
    };
    let thr = threshold(tol, largest);
    sv.iter().filter(|&&s| s > thr).count()
}

/// `exp(iH)` for Hermitian `H`; always unitary.
pub fn exp_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::from_polar(1.0, v)),
    ));
    Ok(&vectors * phases * vectors.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && norm(&(a - b)) <= eps
    }

    #[test]
    fn adjoint_examples() {
        let nil = real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(adjoint(&nil), real(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        let i = CMatrix::from_element(1, 1, I);
        assert_eq!(adjoint(&i)[(0, 0)], c(0.0, -1.0));
        let z = zeros(3, 2);
        assert_eq!(adjoint(&z), zeros(2, 3));
    }

    #[test]
    fn split_of_diagonal_sign_matrix() {
        let s = spectral_split(&real(2, 2, &[1.0, 0.0, 0.0, -1.0]), DEFAULT_TOL).unwrap();
        assert_eq!((s.rank_plus, s.rank_minus, s.rank_zero), (1, 1, 0));
        assert!(close(&s.p_plus, &real(2, 2, &[1.0, 0.0, 0.0, 0.0]), 1e-12));
    }

    #[test]
    fn split_of_zero_matrix() {
        let s = spectral_split(&zeros(2, 2), DEFAULT_TOL).unwrap();
        assert_eq!((s.rank_plus, s.rank_minus, s.rank_zero), (0, 0, 2));
        assert!(close(&s.p_zero, &identity(2), 1e-12));
        assert_eq!(s.min_abs_nonzero_eigenvalue, f64::INFINITY);
    }

    #[test]
    fn split_of_swap() {
        // eigenvectors (1,1)/√2 for +1 and (1,-1)/√2 for -1
        let s = spectral_split(&real(2, 2, &[0.0, 1.0, 1.0, 0.0]), DEFAULT_TOL).unwrap();
        assert_eq!((s.rank_plus, s.rank_minus, s.rank_zero), (1, 1, 0));
        assert!(close(&s.p_plus, &real(2, 2, &[0.5, 0.5, 0.5, 0.5]), 1e-12));
        assert!(close(&s.p_minus, &real(2, 2, &[0.5, -0.5, -0.5, 0.5]), 1e-12));
    }

    #[test]
    fn split_rejects_non_hermitian() {
        let err = spectral_split(&real(2, 2, &[0.0, 1.0, 0.0, 0.0]), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::NotSelfAdjoint { .. }));
        let err = spectral_split(&zeros(2, 3), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn ties_at_threshold_are_zero() {
        let h = real(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
        let s = spectral_split(&h, 1e-9).unwrap();
        assert_eq!((s.rank_plus, s.rank_zero), (1, 1));
    }

    #[test]
    fn invertibility_examples() {
        assert_eq!(is_invertible(&identity(3), DEFAULT_TOL), (true, 1.0));
        assert_eq!(is_invertible(&zeros(1, 1), DEFAULT_TOL), (false, 0.0));
        let (ok, s) = is_invertible(&real(2, 2, &[0.0, 1.0, 1.0, 0.0]), DEFAULT_TOL);
        assert!(ok);
        assert!((s - 1.0).abs() < 1e-14);
        assert_eq!(is_invertible(&zeros(0, 0), DEFAULT_TOL), (true, f64::INFINITY));
    }

    #[test]
    fn exp_of_hermitian_is_unitary() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, -2.0), c(0.1, 2.0), c(-1.0, 0.0)]);
        let u = exp_i_hermitian(&h).unwrap();
        assert!(unitary_residual(&u) < 1e-12);
    }
}
