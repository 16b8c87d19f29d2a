//! The three signatures of an even-dimensional Hilbert–Poincaré complex and
//! the check that they coincide.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hpcomplex::{duality_cone, ConeOrder, HilbertPoincareComplex, MappingCone};
use crate::ktheory::{k0_equal, k0_from_projections, K0Class, Representation, CHARACTER_TOL};
use crate::spectral::{norm, spectral_split, zeros, CMatrix, SpectralSplit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mishchenko,
    HigsonRoe,
    Reduced,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mishchenko, Method::HigsonRoe, Method::Reduced];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mishchenko => "mishchenko",
            Method::HigsonRoe => "higson-roe",
            Method::Reduced => "reduced",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureDiagnostics {
    /// Smallest `|λ|` over the operators that were split.
    pub min_abs_eigenvalue: f64,
    /// Largest classification threshold applied.
    pub threshold: f64,
    /// Size of the matrices that were diagonalised.
    pub operator_size: usize,
    /// `‖τB_S − B_Sτ‖` for the exchange symmetry (cone method only).
    pub exchange_commutator: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureResult {
    pub method: Method,
    pub k0: K0Class,
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub residuals: SignatureDiagnostics,
}

fn require_even(hp: &HilbertPoincareComplex) -> Result<()> {
    let n = hp.top_degree();
    if n % 2 == 1 {
        Err(Error::OddDimension(n))
    } else {
        Ok(())
    }
}

fn split_nondegenerate(h: &CMatrix, name: &'static str, tol: f64) -> Result<SpectralSplit> {
    let split = spectral_split(h, tol)?;
    if split.rank_zero > 0 {
        return Err(Error::DegenerateOperator {
            operator: name,
            kernel_rank: split.rank_zero,
            threshold: split.threshold,
        });
    }
    Ok(split)
}

fn b_plus_b_star(hp: &HilbertPoincareComplex) -> CMatrix {
    let b = hp.total_b();
    &b + b.adjoint()
}

/// `[P₊(B+S)] − [P₊(B−S)]` with `B = b + b*`.
pub fn higson_roe_signature(hp: &HilbertPoincareComplex, tol: f64) -> Result<SignatureResult> {
    require_even(hp)?;
    let b = b_plus_b_star(hp);
    let s = hp.total_s();
    let plus = split_nondegenerate(&(&b + &s), "B+S", tol)?;
    let minus = split_nondegenerate(&(&b - &s), "B-S", tol)?;
    let rep = hp.action().map(|a| a.total());
    let k0 = k0_from_projections(&plus.p_plus, &minus.p_plus, rep.as_ref(), tol)?;
    Ok(SignatureResult {
        method: Method::HigsonRoe,
        k0,
        rank_plus: plus.rank_plus,
        rank_minus: minus.rank_plus,
        residuals: SignatureDiagnostics {
            min_abs_eigenvalue: plus.min_abs_nonzero_eigenvalue.min(minus.min_abs_nonzero_eigenvalue),
            threshold: plus.threshold.max(minus.threshold),
            operator_size: plus.size(),
            exchange_commutator: None,
        },
    })
}

/// Isometry from `E` onto the +1 eigenspace of the copy exchange inside the
/// cone of `S`: `x ↦ (x' + x)/√2`, where `x'` is the copy of `x` in the
/// shifted dual summand.
pub fn exchange_isometry(hp: &HilbertPoincareComplex, cone: &MappingCone) -> (CMatrix, CMatrix) {
    let n = hp.top_degree();
    let g = hp.grading();
    let total = cone.complex.grading().total();
    let mut v = zeros(total, g.total());
    let mut tau = zeros(total, total);
    let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for d in 0..=n {
        let src = cone.source_range(n - d);
        let dst = cone.target_range(d);
        for (i, x) in g.range(d).enumerate() {
            let (p, q) = (src.start + i, dst.start + i);
            v[(p, x)] = w;
            v[(q, x)] = w;
            tau[(p, q)] = one;
            tau[(q, p)] = one;
        }
    }
    (v, tau)
}

fn cone_representation(hp: &HilbertPoincareComplex, cone: &MappingCone) -> Option<Representation> {
    let action = hp.action()?;
    let n = hp.top_degree();
    let total = cone.complex.grading().total();
    let matrices = (0..action.group().order())
        .map(|el| {
            let mut m = zeros(total, total);
            for d in 0..=n {
                let rho = action.matrix(el, d);
                let src = cone.source_range(n - d);
                let dst = cone.target_range(d);
                m.view_mut((src.start, src.start), (src.len(), src.len())).copy_from(rho);
                m.view_mut((dst.start, dst.start), (dst.len(), dst.len())).copy_from(rho);
            }
            m
        })
        .collect();
    Some(Representation {
        group: action.group().clone(),
        matrices,
    })
}

/// `[Q₊] − [Q₋]` of `B_S = b_S + b_S*` on the cone of `S`, restricted to
/// the +1 eigenspace of the symmetry exchanging the two copies of `E`.
pub fn mishchenko_signature(hp: &HilbertPoincareComplex, tol: f64) -> Result<SignatureResult> {
    mishchenko_signature_with(hp, ConeOrder::SourceFirst, tol)
}

/// As [`mishchenko_signature`] with an explicit summand order for the cone.
pub fn mishchenko_signature_with(hp: &HilbertPoincareComplex, order: ConeOrder, tol: f64) -> Result<SignatureResult> {
    require_even(hp)?;
    let cone = duality_cone(hp, order);
    let bs = cone.laplace_type_operator();
    let (v, tau) = exchange_isometry(hp, &cone);
    let commutator = norm(&(&tau * &bs - &bs * &tau));
    let restricted = v.adjoint() * &bs * &v;
    let split = split_nondegenerate(&restricted, "B_S on the exchange-invariant subspace", tol)?;
    let rep = cone_representation(hp, &cone).map(|r| r.compress(&v));
    let k0 = k0_from_projections(&split.p_plus, &split.p_minus, rep.as_ref(), tol)?;
    Ok(SignatureResult {
        method: Method::Mishchenko,
        k0,
        rank_plus: split.rank_plus,
        rank_minus: split.rank_minus,
        residuals: SignatureDiagnostics {
            min_abs_eigenvalue: split.min_abs_nonzero_eigenvalue,
            threshold: split.threshold,
            operator_size: split.size(),
            exchange_commutator: Some(commutator),
        },
    })
}

/// `[P₊] − [P₋]` of `b + b* + S` on `E`.
pub fn reduced_signature(hp: &HilbertPoincareComplex, tol: f64) -> Result<SignatureResult> {
    require_even(hp)?;
    let g = &b_plus_b_star(hp) + hp.total_s();
    let split = split_nondegenerate(&g, "b+b*+S", tol)?;
    let rep = hp.action().map(|a| a.total());
    let k0 = k0_from_projections(&split.p_plus, &split.p_minus, rep.as_ref(), tol)?;
    Ok(SignatureResult {
        method: Method::Reduced,
        k0,
        rank_plus: split.rank_plus,
        rank_minus: split.rank_minus,
        residuals: SignatureDiagnostics {
            min_abs_eigenvalue: split.min_abs_nonzero_eigenvalue,
            threshold: split.threshold,
            operator_size: split.size(),
            exchange_commutator: None,
        },
    })
}

pub fn signature(hp: &HilbertPoincareComplex, method: Method, tol: f64) -> Result<SignatureResult> {
    match method {
        Method::Mishchenko => mishchenko_signature(hp, tol),
        Method::HigsonRoe => higson_roe_signature(hp, tol),
        Method::Reduced => reduced_signature(hp, tol),
    }
}

/// The grading symmetry `φ = (−1)^k` on `E_k`.
pub fn grading_symmetry(hp: &HilbertPoincareComplex) -> CMatrix {
    let g = hp.grading();
    let mut phi = zeros(g.total(), g.total());
    for k in 0..=hp.top_degree() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for x in g.range(k) {
            phi[(x, x)] = Complex64::new(sign, 0.0);
        }
    }
    phi
}

/// `‖φ(B−S)φ + (B+S)‖`.
pub fn intertwining_residual(hp: &HilbertPoincareComplex) -> f64 {
    let phi = grading_symmetry(hp);
    let b = b_plus_b_star(hp);
    let s = hp.total_s();
    norm(&(&phi * (&b - &s) * &phi + (&b + &s)))
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceReport {
    pub mishchenko: SignatureResult,
    pub higson_roe: SignatureResult,
    pub reduced: SignatureResult,
    pub intertwining_residual: f64,
    pub agree: bool,
}

impl CoincidenceReport {
    pub fn results(&self) -> [&SignatureResult; 3] {
        [&self.mishchenko, &self.higson_roe, &self.reduced]
    }

    /// The common class, or `CoincidenceFailed`.
    pub fn into_result(self) -> Result<K0Class> {
        if self.agree {
            Ok(self.higson_roe.k0)
        } else {
            Err(Error::CoincidenceFailed(format!(
                "mishchenko {}, higson-roe {}, reduced {}",
                self.mishchenko.k0, self.higson_roe.k0, self.reduced.k0
            )))
        }
    }
}

/// Compute all three signatures and compare them as K₀-classes with the
/// character tolerance.
pub fn check_coincidence(hp: &HilbertPoincareComplex, tol: f64) -> Result<CoincidenceReport> {
    let mishchenko = mishchenko_signature(hp, tol)?;
    let higson_roe = higson_roe_signature(hp, tol)?;
    let reduced = reduced_signature(hp, tol)?;
    let agree = k0_equal(&mishchenko.k0, &higson_roe.k0, CHARACTER_TOL)?
        && k0_equal(&higson_roe.k0, &reduced.k0, CHARACTER_TOL)?;
    Ok(CoincidenceReport {
        intertwining_residual: intertwining_residual(hp),
        mishchenko,
        higson_roe,
        reduced,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hpcomplex::{ChainComplex, DualityOperator};
    use crate::spectral::identity;

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    fn hp(dims: Vec<usize>, s: Vec<CMatrix>) -> HilbertPoincareComplex {
        let c = ChainComplex::zero(dims.clone()).unwrap();
        HilbertPoincareComplex::new(c, DualityOperator::new(&dims, s).unwrap(), None).unwrap()
    }

    fn values(hp: &HilbertPoincareComplex) -> [i64; 3] {
        let r = check_coincidence(hp, 1e-9).unwrap();
        assert!(r.agree);
        assert_eq!(r.intertwining_residual, 0.0);
        [r.mishchenko.k0.virtual_dimension(), r.higson_roe.k0.virtual_dimension(), r.reduced.k0.virtual_dimension()]
    }

    #[test]
    fn form_on_c2() {
        assert_eq!(values(&hp(vec![2], vec![real(2, 2, &[1.0, 0.0, 0.0, -1.0])])), [0, 0, 0]);
        assert_eq!(values(&hp(vec![2], vec![identity(2)])), [2, 2, 2]);
    }

    #[test]
    fn s2_model() {
        let h = hp(vec![1, 0, 1], vec![identity(1), zeros(0, 0), identity(1)]);
        assert_eq!(values(&h), [0, 0, 0]);
        let m = mishchenko_signature(&h, 1e-9).unwrap();
        assert_eq!(m.residuals.operator_size, 2);
        assert_eq!(m.residuals.exchange_commutator, Some(0.0));
    }

    #[test]
    fn cp2_model() {
        let h = hp(
            vec![1, 0, 1, 0, 1],
            vec![identity(1), zeros(0, 0), identity(1), zeros(0, 0), identity(1)],
        );
        assert_eq!(values(&h), [1, 1, 1]);
        let interchanged = mishchenko_signature_with(&h, ConeOrder::TargetFirst, 1e-9).unwrap();
        assert_eq!(interchanged.k0.virtual_dimension(), 1);
    }

    #[test]
    fn odd_and_degenerate() {
        let odd = hp(vec![1, 1], vec![identity(1), identity(1)]);
        assert!(matches!(higson_roe_signature(&odd, 1e-9), Err(Error::OddDimension(1))));
        let zero = hp(vec![2], vec![zeros(2, 2)]);
        let err = higson_roe_signature(&zero, 1e-9).unwrap_err();
        assert!(err.is_degeneracy());
        assert!(reduced_signature(&zero, 1e-9).unwrap_err().is_degeneracy());
        assert!(mishchenko_signature(&zero, 1e-9).unwrap_err().is_degeneracy());
    }
}
