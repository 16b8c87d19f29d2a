#![allow(dead_code)]

use std::path::PathBuf;

use hpsig::hpcomplex::HilbertPoincareComplex;
use hpsig::io::{parse_smf, SmfInstance};
use hpsig::CMatrix;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(name)
}

pub fn smf(name: &str) -> SmfInstance {
    parse_smf(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

pub fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the kernel of `a`, via the eigenvectors of `a*a`.
pub fn kernel_basis(a: &CMatrix, cols: usize, rel: f64) -> CMatrix {
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    let gram = a.adjoint() * a;
    let scale = frob(&gram).max(1.0);
    let eig = SymmetricEigen::new(gram);
    let keep: Vec<usize> = (0..cols).filter(|&i| eig.eigenvalues[i].abs() <= rel * scale).collect();
    let mut v = CMatrix::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        v.set_column(j, &eig.eigenvectors.column(i));
    }
    v
}

/// Character of the middle-degree homology form: `S_m` compressed to the
/// harmonic space `ker b_m ∩ ker b*_{m+1}`, split by eigenvalue sign and
/// traced against `ρ(g)`. One value per group element.
pub fn middle_form_character(hp: &HilbertPoincareComplex) -> Vec<Complex64> {
    let n = hp.top_degree();
    assert_eq!(n % 2, 0);
    let m = n / 2;
    let dims = hp.dims();
    let d = dims[m];
    let mut rows: Vec<CMatrix> = Vec::new();
    if m >= 1 {
        rows.push(hp.complex().differential(m).clone());
    }
    if m < n {
        rows.push(hp.complex().differential(m + 1).adjoint());
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut a = CMatrix::zeros(total, d);
    let mut at = 0;
    for r in &rows {
        a.view_mut((at, 0), (r.nrows(), d)).copy_from(r);
        at += r.nrows();
    }
    let v = kernel_basis(&a, d, 1e-10);
    let q = v.adjoint() * hp.duality().block(m) * &v;
    let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
    let h = q.nrows();
    let elements = hp.action().map_or(1, |a| a.group().order());
    if h == 0 {
        return vec![Complex64::new(0.0, 0.0); elements];
    }
    let eig = SymmetricEigen::new(q);
    let mut sign = CMatrix::zeros(h, h);
    for i in 0..h {
        let lam = eig.eigenvalues[i];
        assert!(lam.abs() > 1e-8, "degenerate middle form");
        let u = eig.eigenvectors.column(i);
        sign += u * u.adjoint() * Complex64::new(lam.signum(), 0.0);
    }
    match hp.action() {
        None => vec![sign.trace()],
        Some(act) => (0..elements)
            .map(|g| (v.adjoint() * act.matrix(g, m) * &v * &sign).trace())
            .collect(),
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn inertia(h: &CMatrix, eps: f64) -> (usize, usize, usize) {
    let e = eigenvalues(h);
    (
        e.iter().filter(|&&x| x > eps).count(),
        e.iter().filter(|&&x| x < -eps).count(),
        e.iter().filter(|&&x| x.abs() <= eps).count(),
    )
}
