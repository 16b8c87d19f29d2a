mod common;

use common::{eigenvalues, inertia, middle_form_character, real};
use hpsig::generate::{generate, Profile};
use hpsig::hpcomplex::{
    cone_of_duality, dual_complex, verify_duality, ChainComplex, DualityOperator, HilbertPoincareComplex,
};
use hpsig::ktheory::{k0_from_projections, FiniteGroup, Representation};
use hpsig::signature::{check_coincidence, exchange_isometry, higson_roe_signature, mishchenko_signature};
use hpsig::spectral::{is_invertible, singular_values, spectral_split};
use hpsig::CMatrix;
use num_complex::Complex64;
use std::sync::Arc;

fn closed(dims: Vec<usize>, b: Vec<CMatrix>, s: Vec<CMatrix>) -> HilbertPoincareComplex {
    let c = ChainComplex::new(dims.clone(), b).unwrap();
    HilbertPoincareComplex::new(c, DualityOperator::new(&dims, s).unwrap(), None).unwrap()
}

fn sphere_model() -> HilbertPoincareComplex {
    closed(
        vec![1, 0, 1],
        vec![CMatrix::zeros(1, 0), CMatrix::zeros(0, 1)],
        vec![real(1, 1, &[1.0]), CMatrix::zeros(0, 0), real(1, 1, &[1.0])],
    )
}

fn cp2_model() -> HilbertPoincareComplex {
    closed(
        vec![1, 0, 1, 0, 1],
        vec![CMatrix::zeros(1, 0), CMatrix::zeros(0, 1), CMatrix::zeros(1, 0), CMatrix::zeros(0, 1)],
        vec![
            real(1, 1, &[1.0]),
            CMatrix::zeros(0, 0),
            real(1, 1, &[1.0]),
            CMatrix::zeros(0, 0),
            real(1, 1, &[1.0]),
        ],
    )
}

#[test]
fn swap_split_by_hand() {
    let swap = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let split = spectral_split(&swap, 1e-9).unwrap();
    assert_eq!((split.rank_plus, split.rank_minus, split.rank_zero), (1, 1, 0));
    let half = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
    assert!((&split.p_plus - half).norm() < 1e-12);
    let (inv, smin) = is_invertible(&swap, 1e-9);
    assert!(inv);
    assert!((smin - 1.0).abs() < 1e-12);
}

#[test]
fn dual_differential_is_adjoint() {
    let b1 = CMatrix::from_row_slice(2, 1, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let c = ChainComplex::new(vec![2, 1], vec![b1]).unwrap();
    let d = dual_complex(&c);
    let expected = CMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)]);
    assert_eq!(d.differential(1), &expected);
}

#[test]
fn sphere_model_cone_and_bs() {
    let hp = sphere_model();
    let cone = cone_of_duality(&hp, 1e-9).unwrap();
    assert_eq!(cone.complex.dims(), &[1, 1, 1, 1]);
    let bs = cone.laplace_type_operator();
    assert_eq!(bs.nrows(), 4);
    for s in singular_values(&bs) {
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }
    assert!(verify_duality(&hp, 1e-9).unwrap().passed);
}

#[test]
fn sphere_model_restricted_bs() {
    // B_S restricted to the +1 eigenspace of the exchange, computed here by
    // projecting with the eigenvectors of the exchange itself
    let hp = sphere_model();
    let cone = cone_of_duality(&hp, 1e-9).unwrap();
    let bs = cone.laplace_type_operator();
    let (_, tau) = exchange_isometry(&hp, &cone);
    let split = spectral_split(&tau, 1e-9).unwrap();
    assert_eq!(split.rank_plus, 2);
    let eig = nalgebra::SymmetricEigen::new(tau.clone());
    let cols: Vec<usize> = (0..tau.nrows()).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut v = CMatrix::zeros(tau.nrows(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        v.set_column(j, &eig.eigenvectors.column(i));
    }
    let restricted = v.adjoint() * bs * &v;
    let (p, m, z) = inertia(&restricted, 1e-9);
    assert_eq!(z, 0);
    assert_eq!(p as i64 - m as i64, 0);
    assert_eq!(mishchenko_signature(&hp, 1e-9).unwrap().k0.virtual_dimension(), 0);
}

#[test]
fn cp2_model_brute_force() {
    let hp = cp2_model();
    let flip = real(3, 3, &[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    let e = eigenvalues(&flip);
    let brute = e.iter().filter(|&&x| x > 0.0).count() as i64 - e.iter().filter(|&&x| x < 0.0).count() as i64;
    assert_eq!(brute, 1);
    let r = check_coincidence(&hp, 1e-9).unwrap();
    assert!(r.agree);
    for s in r.results() {
        assert_eq!(s.k0.virtual_dimension(), brute);
    }
    assert_eq!(middle_form_character(&hp)[0].re.round() as i64, brute);
}

#[test]
fn regular_representation_trace() {
    let group = Arc::new(FiniteGroup::cyclic(2).unwrap());
    let rep = Representation {
        group,
        matrices: vec![real(2, 2, &[1.0, 0.0, 0.0, 1.0]), real(2, 2, &[0.0, 1.0, 1.0, 0.0])],
    };
    let p = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
    let zero = CMatrix::zeros(2, 2);
    let k = k0_from_projections(&p, &zero, Some(&rep), 1e-9).unwrap();
    // tr(p) = 1 and tr(swap · p) = 1
    assert!((k.at(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((k.at(1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn generated_signatures_match_middle_form() {
    for (i, group) in [None, Some(2), Some(3), Some(4)].into_iter().enumerate() {
        for n in [0, 2, 4] {
            for seed in 0..6u64 {
                let profile = Profile { n, max_dim: 6, group };
                let hp = generate(1000 * i as u64 + 10 * n as u64 + seed, &profile);
                let oracle = middle_form_character(&hp);
                let k0 = higson_roe_signature(&hp, 1e-9).unwrap().k0;
                for (g, want) in oracle.iter().enumerate() {
                    assert!((k0.at(g) - want).norm() < 1e-6, "{profile} seed {seed}: {} vs {want}", k0.at(g));
                }
            }
        }
    }
}
