mod common;

use common::middle_form_character;
use hpsig::bordism::{
    boundary_complex, boundary_signature_is_zero, hyperbolic, verify_boundary_conditions, verify_cone_identities,
};
use hpsig::generate::{generate, generate_with_boundary, random_self_adjoint_family, random_unitary, Profile};
use hpsig::hpcomplex::{
    direct_sum, dual_complex, mapping_cone, opposite, perturb_duality, twist, verify_duality, HilbertPoincareComplex,
};
use hpsig::io::{parse_hpx, write_hpx, HpxInstance};
use hpsig::ktheory::{k0_add, k0_equal, k0_negate, GroupAction, K0Class, CHARACTER_TOL};
use hpsig::signature::{check_coincidence, higson_roe_signature};
use hpsig::spectral::{identity, is_invertible};
use hpsig::CMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn profiles() -> impl Strategy<Value = Profile> {
    (
        prop_oneof![Just(0usize), Just(2), Just(4)],
        2usize..=6,
        prop_oneof![Just(None), Just(Some(2usize)), Just(Some(3)), Just(Some(4))],
    )
        .prop_map(|(n, max_dim, group)| Profile { n, max_dim, group })
}

fn sig(hp: &HilbertPoincareComplex) -> K0Class {
    higson_roe_signature(hp, TOL).unwrap().k0
}

fn same(a: &K0Class, b: &K0Class) -> bool {
    k0_equal(a, b, CHARACTER_TOL).unwrap()
}

fn averaged(a: &GroupAction, r: &[CMatrix], shift: usize) -> Vec<CMatrix> {
    let order = a.group().order() as f64;
    let top = r.len() - 1;
    r.iter()
        .enumerate()
        .map(|(j, rj)| {
            let p = shift as isize - j as isize;
            if p < 0 || p as usize > top {
                return rj.clone();
            }
            let mut sum = CMatrix::zeros(rj.nrows(), rj.ncols());
            for g in 0..a.group().order() {
                sum += a.matrix(g, j) * rj * a.matrix(g, p as usize).adjoint();
            }
            sum / num_complex::Complex64::new(order, 0.0)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn generated_instances_are_valid(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let report = verify_duality(&hp, TOL).unwrap();
        prop_assert!(report.passed, "{:?}", report.failure());
    }

    #[test]
    fn three_signatures_coincide(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let r = check_coincidence(&hp, TOL).unwrap();
        prop_assert!(r.agree);
        prop_assert!(r.intertwining_residual <= 1e-12);
        let oracle = middle_form_character(&hp);
        for (g, v) in oracle.iter().enumerate() {
            prop_assert!((r.mishchenko.k0.at(g) - v).norm() < 1e-6);
        }
        prop_assert_eq!(r.reduced.k0.virtual_dimension(), r.reduced.rank_plus as i64 - r.reduced.rank_minus as i64);
    }

    #[test]
    fn double_dual_is_identity(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let c = hp.complex();
        let back = dual_complex(&dual_complex(c));
        prop_assert_eq!(back.dims(), c.dims());
        for k in 1..=c.top_degree() {
            prop_assert_eq!(back.differential(k), c.differential(k));
        }
    }

    #[test]
    fn identity_cone_is_acyclic(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let c = hp.complex();
        let ids: Vec<CMatrix> = c.dims().iter().map(|&d| identity(d)).collect();
        let cone = mapping_cone(&ids, c, c, TOL).unwrap();
        prop_assert!(cone.complex.homology_ranks(TOL).iter().all(|&h| h == 0));
        prop_assert!(is_invertible(&cone.laplace_type_operator(), TOL).0);
    }

    #[test]
    fn twist_preserves_signature(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let u: Vec<CMatrix> = hp.dims().iter().map(|&d| random_unitary(&mut rng, d)).collect();
        let t = twist(&hp, &u, TOL).unwrap();
        prop_assert!(verify_duality(&t, TOL).unwrap().passed);
        prop_assert!(same(&sig(&hp), &sig(&t)));
    }

    #[test]
    fn perturbation_preserves_signature(seed in any::<u64>(), profile in profiles(), scale in 0.05f64..1.0) {
        let hp = generate(seed, &profile);
        let n = hp.top_degree();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let r = random_self_adjoint_family(&mut rng, hp.dims(), n + 2, scale);
        let r = match hp.action() {
            Some(a) => averaged(a, &r, n + 2),
            None => r,
        };
        let p = perturb_duality(&hp, &r, TOL).unwrap();
        prop_assert!(verify_duality(&p, TOL).unwrap().passed);
        prop_assert!(same(&sig(&hp), &sig(&p)));
    }

    #[test]
    fn opposite_negates_and_sum_adds(a in any::<u64>(), b in any::<u64>(), profile in profiles()) {
        let x = generate(a, &profile);
        let y = generate(b, &profile);
        prop_assert!(same(&sig(&opposite(&x)), &k0_negate(&sig(&x))));
        let sum = direct_sum(&x, &y).unwrap();
        prop_assert!(same(&sig(&sum), &k0_add(&sig(&x), &sig(&y)).unwrap()));
        let cancel = direct_sum(&x, &opposite(&x)).unwrap();
        prop_assert!(sig(&cancel).is_zero(CHARACTER_TOL));
    }

    #[test]
    fn k0_group_laws(seed in any::<u64>(), profile in profiles()) {
        let a = sig(&generate(seed, &profile));
        prop_assert!(k0_add(&a, &k0_negate(&a)).unwrap().is_zero(CHARACTER_TOL));
        prop_assert!(same(&k0_negate(&k0_negate(&a)), &a));
        let zero = K0Class::zero(a.group().clone());
        prop_assert!(same(&k0_add(&a, &zero).unwrap(), &a));
    }

    #[test]
    fn hpx_round_trip_keeps_signature(seed in any::<u64>(), profile in profiles()) {
        let hp = generate(seed, &profile);
        let HpxInstance::Closed(back) = parse_hpx(&write_hpx(&hp)).unwrap() else {
            panic!("closed document expected");
        };
        prop_assert_eq!(back.total_b(), hp.total_b());
        prop_assert_eq!(back.total_s(), hp.total_s());
        prop_assert!(same(&sig(&back), &sig(&hp)));
    }

    #[test]
    fn profile_text_round_trip(profile in profiles()) {
        let back: Profile = profile.to_string().parse().unwrap();
        prop_assert_eq!(back, profile);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn boundaries_have_zero_signature(seed in any::<u64>(), n in prop_oneof![Just(0usize), Just(2)], max_dim in 2usize..=5) {
        let cwb = generate_with_boundary(seed, &Profile { n, max_dim, group: None });
        let conditions = verify_boundary_conditions(&cwb, TOL).unwrap();
        prop_assert!(conditions.passed, "{:?}", conditions.failure());
        let bc = boundary_complex(&cwb, TOL).unwrap();
        prop_assert!(bc.formula_residual <= 1e-9);
        prop_assert!(bc.commutation_residual <= 1e-9);
        prop_assert!(verify_duality(&bc.hp, TOL).unwrap().passed);
        let ids = verify_cone_identities(&cwb, TOL).unwrap();
        prop_assert!(ids.passed, "{:?}", ids.failed_identity());
        prop_assert!(boundary_signature_is_zero(&cwb, TOL).unwrap().passed);
    }

    #[test]
    fn hyperbolic_complexes_have_zero_signature(seed in any::<u64>(), profile in profiles(), zero_s in any::<bool>()) {
        // two hyperbolic steps bring an even complex back to even top degree
        let base = generate(seed, &Profile { group: None, ..profile });
        let odd = hyperbolic(base.complex(), base.duality().blocks(), TOL).unwrap();
        prop_assert_eq!(odd.top_degree(), base.top_degree() + 1);
        prop_assert!(verify_duality(&odd, TOL).unwrap().passed);
        let s1: Vec<CMatrix> = if zero_s {
            odd.duality().blocks().iter().map(|b| CMatrix::zeros(b.nrows(), b.ncols())).collect()
        } else {
            odd.duality().blocks().to_vec()
        };
        let even = hyperbolic(odd.complex(), &s1, TOL).unwrap();
        prop_assert!(verify_duality(&even, TOL).unwrap().passed);
        prop_assert!(check_coincidence(&even, TOL).unwrap().agree);
        prop_assert!(sig(&even).is_zero(CHARACTER_TOL));
    }
}
