use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use troptheta::cobordism::{
    albanese, augmentation, filtration_generator, fiberwise_sum_sections, fourier_object, fourier_on_cob, pontryagin,
    tensor_sections, BraneKind, BraneSymbol, FormalSum, Side, TorusPoint,
};
use troptheta::exact::rational::qf;

fn point(n: usize) -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec((-12i64..=12).prop_map(|a| qf(a, 6)), n).prop_map(TorusPoint::new)
}

fn element(n: usize) -> impl Strategy<Value = FormalSum> {
    prop::collection::vec((point(n), -3i64..=3), 0..=5)
        .prop_map(move |ts| FormalSum::from_terms(n, ts.into_iter().map(|(b, a)| (b, BigInt::from(a)))).unwrap())
}

fn degree_zero(n: usize) -> impl Strategy<Value = FormalSum> {
    (element(n), point(n)).prop_map(|(e, b)| {
        let a = augmentation(&e);
        &e - &FormalSum::monomial(b, a)
    })
}

fn symbol(n: usize) -> impl Strategy<Value = BraneSymbol> {
    (point(n), any::<bool>(), any::<bool>(), -5i64..=5).prop_map(|(b, fiber, base, shift)| {
        let side = if base { Side::Base } else { Side::Dual };
        let s = if fiber { BraneSymbol::fiber(side, b) } else { BraneSymbol::flat_section(side, b) };
        BraneSymbol { shift, ..s }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in element(2), b in element(2), c in element(2)) {
        let star = |x: &FormalSum, y: &FormalSum| pontryagin(x, y).unwrap();
        prop_assert_eq!(star(&a, &b), star(&b, &a));
        prop_assert_eq!(star(&star(&a, &b), &c), star(&a, &star(&b, &c)));
        prop_assert_eq!(star(&a, &(&b + &c)), &star(&a, &b) + &star(&a, &c));
        prop_assert_eq!(star(&FormalSum::one(2), &a), a.clone());
        prop_assert!(star(&FormalSum::zero(2), &a).is_zero());
    }

    #[test]
    fn augmentation_is_a_ring_map(a in element(2), b in element(2)) {
        prop_assert_eq!(augmentation(&pontryagin(&a, &b).unwrap()), augmentation(&a) * augmentation(&b));
        prop_assert_eq!(augmentation(&(&a + &b)), augmentation(&a) + augmentation(&b));
    }

    #[test]
    fn albanese_is_additive_on_degree_zero(a in degree_zero(2), b in degree_zero(2)) {
        let sum = albanese(&(&a + &b)).unwrap();
        prop_assert_eq!(sum, albanese(&a).unwrap().add(&albanese(&b).unwrap()).unwrap());
        prop_assert!(albanese(&pontryagin(&a, &b).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn higher_generators_die_under_albanese(pairs in prop::collection::vec((point(2), point(2)), 2..=3)) {
        let g = filtration_generator(&pairs).unwrap();
        prop_assert_eq!(augmentation(&g), BigInt::zero());
        prop_assert!(albanese(&g).unwrap().is_zero());
    }

    #[test]
    fn fourier_exchanges_products(a in element(2), b in element(2)) {
        let lhs = fourier_on_cob(&pontryagin(&a, &b).unwrap());
        prop_assert_eq!(lhs, tensor_sections(&fourier_on_cob(&a), &fourier_on_cob(&b)).unwrap());
    }

    #[test]
    fn double_fourier_negates(s in symbol(2)) {
        let once = fourier_object(&s, 2).unwrap();
        prop_assert_ne!(once.kind, s.kind);
        prop_assert_ne!(once.side, s.side);
        let twice = fourier_object(&once, 2).unwrap();
        prop_assert_eq!(twice.kind, s.kind);
        prop_assert_eq!(twice.side, s.side);
        prop_assert_eq!(&twice.level, &s.level.neg());
        prop_assert_eq!(&twice.grading, &s.grading);
        prop_assert_eq!(twice.shift, s.shift + 2);
    }

    #[test]
    fn fiberwise_sum_matches_fourier_of_product(b1 in point(2), b2 in point(2)) {
        let f = |b: &TorusPoint| fourier_object(&BraneSymbol::fiber(Side::Base, b.clone()), 2).unwrap();
        let sum = fiberwise_sum_sections(&f(&b1), &f(&b2)).unwrap();
        prop_assert_eq!(sum.kind, BraneKind::FlatSection);
        prop_assert_eq!(sum, f(&b1.add(&b2).unwrap()));
    }
}

#[test]
fn symbol_json_round_trip() {
    let s = BraneSymbol::fiber(Side::Base, TorusPoint::new(vec![qf(1, 3), qf(-1, 4)]));
    let text = serde_json::to_string(&s).unwrap();
    assert_eq!(text, r#"{"kind":"fiber","side":"base","level":["1/3","3/4"],"grading":"1","shift":0}"#);
    assert_eq!(serde_json::from_str::<BraneSymbol>(&text).unwrap(), s);
}
