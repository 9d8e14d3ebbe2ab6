mod common;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use common::{rand_q, rand_vec, random_theta, rng};
use troptheta::exact::rational::{self as rat, q, qf, Rational};
use troptheta::theta::{
    linear_to_norm_vectors, quasi_period_residual, section_to_rational_fn, verify_class_equality, AffineFunctionClass,
    DeltaFunction,
};
use troptheta::torus::{alpha_111_torus, alpha_family_torus, coset_system, principal_circle};

/// Direct maximum over a fixed box of covectors.
fn brute_value(th: &troptheta::theta::ThetaFunction, v: &[Rational], radius: i64) -> Rational {
    let p = &th.polarization;
    let cot = p.torus.cotangent_lattice();
    let u = rat::add(v, &th.w);
    let two_k = q(2 * th.k as i64);
    let mut best: Option<Rational> = None;
    for a in -radius..=radius {
        for b in -radius..=radius {
            let z = vec![BigInt::from(a), BigInt::from(b)];
            let alpha = cot.point_int(&z);
            let s = rat::dot(&alpha, &u) - p.metric.covector_norm_sq(&alpha) / &two_k + th.delta.at(&z);
            if best.as_ref().is_none_or(|m| s > *m) {
                best = Some(s);
            }
        }
    }
    best.unwrap()
}

#[test]
fn surface_theta_matches_box_maximum() {
    let p = alpha_111_torus();
    let mut r = rng(11);
    for k in 1..=2 {
        let th = random_theta(&p, k, &mut r);
        for _ in 0..25 {
            let v = rand_vec(&mut r, 2, -3, 3, 37);
            let e = th.evaluate(&v);
            assert!(e.certified());
            assert_eq!(e.value, brute_value(&th, &v, 11), "k={k} v={v:?}");
        }
    }
}

#[test]
fn circle_level_three_matches_closed_form() {
    // f_{3,0}(v) = max_m (m v − m²/6)
    let th = troptheta::theta::standard_theta(&principal_circle(), 3, vec![q(0)]).unwrap();
    let mut r = rng(3);
    for _ in 0..200 {
        let v = rand_q(&mut r, -4, 4, 53);
        let expect = (-40i64..=40).map(|m| q(m) * &v - qf(m * m, 6)).max().unwrap();
        assert_eq!(th.value(&[v]), expect);
    }
}

fn small_q() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(a, b)| qf(a, b))
}

fn pos_q() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=6).prop_map(|(a, b)| qf(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasi_periodicity_on_alpha_family(
        a in [pos_q(), pos_q(), pos_q()],
        k in 1u64..=2,
        seed in 0u64..1000,
        g in [-2i64..=2, -2i64..=2],
    ) {
        let p = alpha_family_torus(a).unwrap();
        let mut r = rng(seed);
        let th = random_theta(&p, k, &mut r);
        let gamma = p.torus.period(&common::ints(&g));
        let v = rand_vec(&mut r, 2, -1, 1, 29);
        prop_assert_eq!(quasi_period_residual(&th, &gamma, &v).unwrap(), q(0));
    }

    #[test]
    fn norm_vector_constraints(alpha in [small_q(), small_q()], b in small_q(), k in 1u64..=4) {
        let p = alpha_111_torus();
        let cls = AffineFunctionClass::new(alpha.to_vec(), b.clone());
        let nv = linear_to_norm_vectors(&p, k, &cls).unwrap();
        let kq = q(k as i64);
        if nv.affine_trivial {
            prop_assert!(rat::is_zero_vec(&alpha));
        } else {
            let lhs = rat::scale(&kq, &p.apply(&rat::sub(&nv.w_plus, &nv.w_minus)));
            prop_assert_eq!(lhs, alpha.to_vec());
            let quad = &kq / q(2) * (p.metric.norm_sq(&nv.w_plus) - p.metric.norm_sq(&nv.w_minus));
            prop_assert_eq!(quad, b);
        }
    }

    #[test]
    fn rational_function_represents_class(alpha in [small_q(), small_q()], seed in 0u64..1000) {
        let p = alpha_111_torus();
        prop_assume!(!rat::is_zero_vec(&alpha));
        let cls = AffineFunctionClass::new(alpha.to_vec(), Rational::zero());
        let k = 1 + seed % 2;
        let cosets = std::sync::Arc::new(coset_system(&p, k).unwrap());
        let mut r = rng(seed);
        let mut delta = || DeltaFunction::new(cosets.clone(), rand_vec(&mut r, cosets.len(), 0, 1, 19)).unwrap();
        let (dp, dm) = (delta(), delta());
        let phi = section_to_rational_fn(&p, k, &cls, dp, dm).unwrap();
        let mut r = rng(seed + 1);
        let samples: Vec<_> = (0..4)
            .map(|_| (rand_vec(&mut r, 2, -2, 2, 23), p.torus.period(&common::ints(&[r.gen_range(-2..=2), r.gen_range(-2..=2)]))))
            .collect();
        let check = verify_class_equality(&phi, &cls, &samples);
        prop_assert!(check.ok, "{:?}", check.witness);
    }
}
