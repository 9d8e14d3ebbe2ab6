mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use common::{rand_q, random_theta, rng};
use troptheta::cobordism::{verify_filtration_vanishing, FiltrationOutcome};
use troptheta::complex::{check_regular, corner_locus};
use troptheta::exact::rational::{self as rat, frac, Rational};
use troptheta::intersect::{check_transverse, intersect_complexes, perturb_search, replay};
use troptheta::torus::{alpha_111_torus, principal_circle};
use troptheta::Error;

#[test]
fn curves_meet_with_total_weight_two_k_l() {
    let p = alpha_111_torus();
    let mut r = rng(5);
    let mut checked = 0;
    for (k1, k2) in [(1, 1), (1, 2)] {
        for _ in 0..6 {
            let a = corner_locus(&random_theta(&p, k1, &mut r)).unwrap();
            let b = corner_locus(&random_theta(&p, k2, &mut r)).unwrap();
            if !check_transverse(&a, &b).unwrap().pass {
                continue;
            }
            let x = intersect_complexes(&a, &b).unwrap();
            assert_eq!(x.pure_dim(), Some(0));
            let total: BigInt = x.cells.iter().map(|c| c.weight.clone().unwrap()).sum();
            assert_eq!(total, BigInt::from(2 * k1 * k2));
            checked += 1;
        }
    }
    assert!(checked >= 6);
}

#[test]
fn non_transverse_intersection_is_refused() {
    let p = alpha_111_torus();
    let th = random_theta(&p, 1, &mut rng(9));
    let a = corner_locus(&th).unwrap();
    assert!(!check_transverse(&a, &a).unwrap().pass);
    assert!(matches!(intersect_complexes(&a, &a), Err(Error::NotTransverse(_))));
}

/// Corner points of the level-one circle theta with translation `w`.
fn circle_point(w: &Rational) -> Rational {
    frac(&(rat::qf(1, 2) - w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn circle_pipeline_agrees_with_point_sets(seed in 0u64..10_000) {
        let p = principal_circle();
        let mut r = rng(seed);
        let pairs: Vec<(Vec<Rational>, Vec<Rational>)> =
            (0..2).map(|_| (vec![rand_q(&mut r, 0, 1, 41)], vec![rand_q(&mut r, 0, 1, 43)])).collect();
        match verify_filtration_vanishing(&p, &pairs, 1, seed, 8) {
            Ok(FiltrationOutcome::Degenerate { index }) => {
                prop_assert_eq!(frac(&pairs[index].0[0]), frac(&pairs[index].1[0]));
            }
            Ok(FiltrationOutcome::Certified(cert)) => {
                prop_assert!(cert.success);
                // oracle: the four corner points are pairwise distinct
                let pts: BTreeSet<Rational> = cert.hypersurfaces.iter().map(|h| circle_point(&h.w[0])).collect();
                prop_assert_eq!(pts.len(), 4);
                prop_assert!(replay(&cert).unwrap().ok);
            }
            Err(Error::Exhausted { partial, .. }) => {
                // two of the four corner points coincide; δ cannot move them at k = 1
                let pts: Vec<Rational> = partial.hypersurfaces.iter().map(|h| circle_point(&h.w[0])).collect();
                let set: BTreeSet<&Rational> = pts.iter().collect();
                prop_assert_eq!(set.len(), pts.len());
                prop_assert!(pts.len() < 4);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn search_is_deterministic_in_the_seed() {
    let p = alpha_111_torus();
    let groups = vec![
        (rat::qvec(&[(1, 3), (0, 1)]), rat::qvec(&[(-1, 5), (1, 7)])),
        (rat::qvec(&[(2, 9), (-1, 4)]), rat::qvec(&[(0, 1), (3, 8)])),
    ];
    let a = perturb_search(&p, 2, &groups, 42, 20).unwrap();
    let b = perturb_search(&p, 2, &groups, 42, 20).unwrap();
    assert_eq!(a, b);
    assert!(a.dimension_audit);
    assert!(a.hypersurfaces.iter().all(|h| h.regular && h.balanced));
    assert!(!a.success, "two groups on a surface leave points");
    let c = perturb_search(&p, 2, &groups, 43, 20).unwrap();
    assert_ne!(a.payload_digest, c.payload_digest);
}

#[test]
fn perturbed_level_two_curves_are_regular() {
    let p = alpha_111_torus();
    let groups = vec![(rat::qvec(&[(1, 3), (0, 1)]), rat::qvec(&[(-1, 5), (1, 7)]))];
    let cert = perturb_search(&p, 2, &groups, 1, 20).unwrap();
    for h in &cert.hypersurfaces {
        let cosets = std::sync::Arc::new(troptheta::torus::coset_system(&p, 2).unwrap());
        let th = troptheta::theta::make_theta(&p, 2, troptheta::theta::DeltaFunction::new(cosets, h.delta.clone()).unwrap(), h.w.clone())
            .unwrap();
        let c = corner_locus(&th).unwrap();
        assert!(check_regular(&c));
        assert_eq!(c.digest(), h.digest);
    }
}
