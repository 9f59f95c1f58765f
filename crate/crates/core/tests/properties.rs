use proptest::prelude::*;

use urysohn::extension::{generic_space, GrowingSpace, ValueDomain};
use urysohn::group2::{generic_invariant_metric, squares_to_identity, translation_invariant};
use urysohn::isometry::{back_and_forth_bounded, PartialIsometry};
use urysohn::rational::{int, Rational};
use urysohn::toeplitz::{
    cyclic_metric, grow_prefix, induced_violations, is_admissible, prolong, ToeplitzPrefix,
};
use urysohn::{is_toeplitz, validate_matrix};

fn domain() -> impl Strategy<Value = ValueDomain> {
    prop_oneof![
        (1u32..6).prop_map(|max| ValueDomain::Integer { max }),
        (1u32..4, 1u32..5).prop_map(|(denominator, max)| ValueDomain::Rational { denominator, max }),
        Just(ValueDomain::Graph),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip_through_text(p in -1000i64..1000, q in 1i64..1000) {
        let r = Rational::new(p, q);
        let back: Rational = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn generic_spaces_are_metric_and_replay_exactly(n in 1usize..9, d in domain(), seed: u64) {
        let gs = generic_space(n, d, seed).unwrap();
        prop_assert!(validate_matrix(gs.space().matrix()).unwrap().is_ok());
        let again = GrowingSpace::replay(gs.log()).unwrap();
        prop_assert_eq!(again.space(), gs.space());
        prop_assert_eq!(generic_space(n, d, seed).unwrap(), gs);
    }

    #[test]
    fn grown_prefixes_stay_toeplitz(start in 1i64..6, len in 1usize..12) {
        let f = grow_prefix(&ToeplitzPrefix::from_ints(&[start]).unwrap(), len);
        prop_assert_eq!(f.len(), len);
        prop_assert!(is_toeplitz(f.values()).is_ok());
        let m = cyclic_metric(&f, len).unwrap();
        prop_assert!(m.validate().is_ok());
    }

    #[test]
    fn corrupting_a_prefix_shows_up_in_the_cyclic_metric(
        start in 1i64..5, len in 2usize..8, at in 0usize..8, value in 1i64..20,
    ) {
        let mut v = grow_prefix(&ToeplitzPrefix::from_ints(&[start]).unwrap(), len).into_values();
        v[at % len] = int(value);
        let (toeplitz, metric) = induced_violations(&v);
        prop_assert_eq!(toeplitz.is_ok(), metric.is_ok());
    }

    #[test]
    fn prolongation_ends_in_the_window(
        (f, h) in (1usize..4).prop_flat_map(|n| {
            (prop::collection::vec(1i64..6, n), prop::collection::vec(1i64..6, n))
        }),
    ) {
        let Ok(fp) = ToeplitzPrefix::from_ints(&f) else { return Ok(()) };
        let hr: Vec<Rational> = h.iter().map(|&x| int(x)).collect();
        if !is_admissible(&fp, &hr).is_ok() {
            return Ok(());
        }
        let p = prolong(&fp, &hr).unwrap();
        let vals = p.prefix.values();
        prop_assert!(is_toeplitz(vals).is_ok());
        prop_assert_eq!(&vals[..f.len()], fp.values());
        prop_assert_eq!(&vals[vals.len() - h.len()..], &hr[..]);
    }

    #[test]
    fn invariant_metrics_are_invariant(levels in 1usize..5, d in domain(), seed: u64) {
        let m = generic_invariant_metric(levels, d, seed).unwrap();
        let mat = m.matrix();
        prop_assert!(validate_matrix(&mat).unwrap().is_ok());
        prop_assert!(translation_invariant(&mat));
        prop_assert!(squares_to_identity(&m));
    }

    #[test]
    fn bounded_back_and_forth_keeps_its_bound(seed: u64, n in 2usize..6, k in 1i64..5) {
        let mut gs = generic_space(n, ValueDomain::Integer { max: 4 }, seed).unwrap();
        let mut f = PartialIsometry::with_bound(int(k));
        // a single point maps to itself; always within any bound
        f.insert(0, 0).unwrap();
        back_and_forth_bounded(&mut gs, &mut f, 3).unwrap();
        prop_assert!(f.check(gs.space()).is_ok());
        prop_assert!(f.max_displacement(gs.space()) <= int(k));
    }
}
