use cutstack_core::scalar::{rat, Scalar};
use cutstack_core::IntervalSet;
use proptest::prelude::*;

fn arb_point() -> impl Strategy<Value = Scalar> {
    (1i64..=720, 0i64..=720).prop_map(|(den, num)| rat(num.min(den), den))
}

fn arb_set() -> impl Strategy<Value = IntervalSet> {
    proptest::collection::vec(arb_point(), 0..8).prop_map(|mut cuts| {
        cuts.sort();
        cuts.dedup();
        let pieces = cuts
            .chunks_exact(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        IntervalSet::from_pieces(pieces).unwrap()
    })
}

proptest! {
    #[test]
    fn triangle_inequality(a in arb_set(), b in arb_set(), c in arb_set()) {
        prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c));
    }

    #[test]
    fn inclusion_exclusion(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(
            a.union(&b).measure() + a.intersect(&b).measure(),
            a.measure() + b.measure()
        );
    }

    #[test]
    fn de_morgan(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
        prop_assert_eq!(a.intersect(&b).complement(), a.complement().union(&b.complement()));
    }

    #[test]
    fn complement_involution(a in arb_set()) {
        prop_assert_eq!(a.complement().complement(), a);
    }

    #[test]
    fn distance_is_a_metric_on_canonical_sets(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(a.distance(&b), b.distance(&a));
        prop_assert_eq!(a.distance(&b) == cutstack_core::scalar::zero(), a == b);
    }

    #[test]
    fn symdiff_matches_difference_decomposition(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(a.symdiff(&b), a.difference(&b).union(&b.difference(&a)));
    }

    #[test]
    fn serialization_round_trips_byte_identically(a in arb_set()) {
        let json = serde_json::to_string(&a).unwrap();
        let back: IntervalSet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
