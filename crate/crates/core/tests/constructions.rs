use cutstack_core::constructions::{
    first_return_decomposition, lemma1_check, thm1_dense_family, thm3_algebra_generators,
    thm3_refine_pairs, thm4_mm_pair, thm6_obstruction, PatternPiece, RawPair,
};
use cutstack_core::scalar::{self, rat};
use cutstack_core::scheme::{SchemeSpec, StageRule};
use cutstack_core::{Engine, Error, IntervalSet, OrbitResult};

fn chacon() -> Engine {
    Engine::new(SchemeSpec::chacon3())
}

#[test]
fn thm1_height_one_is_the_full_space() {
    let eng = chacon();
    let elem = thm1_dense_family(&eng, 1).unwrap();
    assert_eq!(elem.a, elem.b);
    assert_eq!(elem.abar, elem.b);
    assert_eq!(elem.d, IntervalSet::unit());
}

#[test]
fn thm1_height_four_slices_the_base() {
    let eng = chacon();
    let elem = thm1_dense_family(&eng, 4).unwrap();
    assert_eq!(elem.b, IntervalSet::interval(rat(0, 1), rat(2, 9)).unwrap());
    assert_eq!(elem.abar, IntervalSet::interval(rat(0, 1), rat(1, 18)).unwrap());
    assert_eq!(elem.a.measure(), rat(2, 9));
    assert!(elem.e.measure() < rat(1, 4));
}

#[test]
fn thm1_error_mass_stays_under_one_over_h() {
    for spec in [SchemeSpec::chacon3(), SchemeSpec::staircase4()] {
        let eng = Engine::new(spec);
        for h in [2u128, 3, 5, 8] {
            let elem = thm1_dense_family(&eng, h).unwrap();
            assert!(elem.e.measure() < rat(1, h as i64));
            elem.verify(&eng).unwrap();
        }
    }
}

#[test]
fn lemma1_margins_nonnegative_for_height_four() {
    let eng = chacon();
    let elem = thm1_dense_family(&eng, 4).unwrap();
    // the lemma's target set is B u E: the tower levels sweep out
    // everything else within h steps
    let target = elem.b.union(&elem.e);
    let report = lemma1_check(&eng, &elem.abar, 4, &target, -20..=60, &rat(1, 1_000_000))
        .unwrap();
    assert!(report.refuted.is_empty());
    assert!(*report.min_lower_margin().unwrap() >= scalar::zero());
    assert!(report.uncovered_mass <= rat(1, 1_000_000));
}

#[test]
fn lemma1_full_space_margin_is_zero() {
    let eng = chacon();
    let full = IntervalSet::unit();
    let report = lemma1_check(&eng, &full, 1, &full, 1..=5, &rat(1, 1000)).unwrap();
    for (_, lo, hi) in &report.margins {
        // lo dips below zero only by the unresolved pool mass
        assert!(*lo >= rat(-1, 1000) && *lo <= scalar::zero());
        assert_eq!(*hi, scalar::zero());
    }
}

#[test]
fn lemma1_rejects_overlapping_translates() {
    let eng = chacon();
    let abar = IntervalSet::interval(rat(0, 1), rat(1, 3)).unwrap();
    let b = IntervalSet::interval(rat(0, 1), rat(2, 9)).unwrap();
    match lemma1_check(&eng, &abar, 2, &b, 1..=1, &rat(1, 1000)) {
        Err(Error::Precondition(msg)) => assert!(msg.contains("hypothesis")),
        other => panic!("expected precondition failure, got {other:?}"),
    }
}

#[test]
fn first_return_inside_target_is_time_zero() {
    let eng = chacon();
    let b = IntervalSet::interval(rat(0, 1), rat(2, 9)).unwrap();
    let e = IntervalSet::interval(rat(1, 9), rat(2, 9)).unwrap();
    let dec = first_return_decomposition(&eng, &e, &b, 10, &rat(1, 1000)).unwrap();
    assert_eq!(dec.pieces.len(), 1);
    assert_eq!(dec.pieces[0].1, 0);
    assert_eq!(dec.pieces[0].0, e);
    assert!(dec.unresolved.is_empty());
}

#[test]
fn first_return_of_the_stage2_pool() {
    let eng = chacon();
    let e = IntervalSet::interval(rat(8, 9), rat(1, 1)).unwrap();
    let b = IntervalSet::interval(rat(0, 1), rat(2, 9)).unwrap();
    let eps = rat(1, 100_000);
    let dec = first_return_decomposition(&eng, &e, &b, 400, &eps).unwrap();
    assert!(dec.resolved_mass() >= e.measure() - &eps);
    // oracle: the midpoint of each piece must enter B first at its tagged time
    for (piece, ret) in &dec.pieces {
        let (lo, hi) = &piece.pieces()[0];
        let mid = (lo + hi) / rat(2, 1);
        for i in 0..*ret {
            if let OrbitResult::Point(y) = eng.orbit_point(&mid, i as i64, 30).unwrap() {
                assert!(!b.contains_point(&y), "piece at {mid} hit B early at {i}");
            }
        }
        match eng.orbit_point(&mid, *ret as i64, 30).unwrap() {
            OrbitResult::Point(y) => assert!(b.contains_point(&y)),
            OrbitResult::Unresolved => panic!("midpoint orbit unresolved"),
        }
    }
}

#[test]
fn first_return_of_null_set_is_empty() {
    let eng = chacon();
    let b = IntervalSet::interval(rat(0, 1), rat(2, 9)).unwrap();
    let dec =
        first_return_decomposition(&eng, &IntervalSet::empty(), &b, 10, &rat(1, 1000)).unwrap();
    assert!(dec.pieces.is_empty());
    assert!(dec.unresolved.is_empty());
}

#[test]
fn thm4_pairs_are_disjoint_and_small() {
    let eng = chacon();
    for h in [1u128, 4] {
        let pair = thm4_mm_pair(&eng, h, &rat(1, 10_000)).unwrap();
        assert!(pair.c.is_disjoint_from(&pair.d));
        let bound = rat(2, h as i64 + 1);
        assert!(pair.c.measure() < bound);
        assert!(pair.d.measure() < bound);
        assert!(pair.unresolved <= rat(1, 10_000));
    }
}

#[test]
fn thm4_spacer_free_scheme_takes_the_slice_branch() {
    let odometer = SchemeSpec::new(
        Vec::new(),
        StageRule { cuts: 2, spacers: vec![0, 0] },
    )
    .unwrap();
    let eng = Engine::new(odometer);
    let pair = thm4_mm_pair(&eng, 3, &rat(1, 10_000)).unwrap();
    // no spacers means no error set, so the construction is fully exact
    assert_eq!(pair.unresolved, scalar::zero());
    assert!(pair.c.is_disjoint_from(&pair.d));
    assert!(pair.c.measure() > scalar::zero());
}

#[test]
fn thm3_family_from_thm4_pairs() {
    let eng = chacon();
    let raw: Vec<RawPair> = [4u128, 8, 16]
        .iter()
        .map(|&h| {
            let p = thm4_mm_pair(&eng, h, &rat(1, 10_000)).unwrap();
            RawPair { c: p.c, d: p.d, eps: rat(3, 5) }
        })
        .collect();
    let fam = thm3_refine_pairs(&raw).unwrap();
    assert!(fam.pairs.len() >= 2);
    fam.verify_disjoint().unwrap();
}

#[test]
fn thm3_generators_follow_the_digit_rule() {
    let eng = chacon();
    let raw: Vec<RawPair> = [8u128, 16]
        .iter()
        .map(|&h| {
            let p = thm4_mm_pair(&eng, h, &rat(1, 10_000)).unwrap();
            RawPair { c: p.c, d: p.d, eps: rat(3, 5) }
        })
        .collect();
    let fam = thm3_refine_pairs(&raw).unwrap();
    let trunc = thm3_algebra_generators(&fam, 1, 2).unwrap();
    assert_eq!(trunc.pattern(1, 1), PatternPiece::C);
    assert_eq!(trunc.pattern(1, 2), PatternPiece::D);
    let pair1 = &fam.pairs[0];
    assert_eq!(
        trunc.generators[0].intersect(&pair1.c.union(&pair1.d)),
        pair1.c
    );
}

#[test]
fn thm6_feasibility_and_outer_measure() {
    let eng = chacon();
    let a = IntervalSet::interval(rat(0, 1), rat(1, 5)).unwrap();
    let obs = thm6_obstruction(&eng, 1, &a, &rat(1, 1_000_000)).unwrap();
    assert!(obs.feasible);
    assert!(obs.measure.lo >= rat(3, 5));

    let a3 = IntervalSet::interval(rat(0, 1), rat(1, 3)).unwrap();
    let obs3 = thm6_obstruction(&eng, 1, &a3, &rat(1, 1_000_000)).unwrap();
    assert!(!obs3.feasible);
}

#[test]
fn thm6_empty_set_gives_full_complement() {
    let eng = chacon();
    let obs = thm6_obstruction(&eng, 3, &IntervalSet::empty(), &rat(1, 1000)).unwrap();
    assert_eq!(obs.b_outer, IntervalSet::unit());
    assert_eq!(obs.slack, scalar::zero());
    let up = obs.correlation_upper(&eng, 13, &rat(1, 1000)).unwrap();
    assert!(up <= rat(1, 1000));
}
