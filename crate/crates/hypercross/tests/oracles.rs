use std::collections::BTreeSet;

use hypercross::bounds::sandwich_report;
use hypercross::fixtures::{oracle_family, signed, spec_a1, spec_k1};
use hypercross::{
    brute_force_count, count_cross, cross_records, enumerate_cross, BruteBox, CrossSpec, MultiIndex,
    SmoothnessSequence, SparseIndex, Tail,
};
use proptest::prelude::*;

/// A sequence starting at `r_1 = r` and nondecreasing afterwards.
fn sequence_from(r: f64) -> impl Strategy<Value = SmoothnessSequence> {
    prop_oneof![
        (0.3..2.0f64).prop_map(move |c1| SmoothnessSequence::new(vec![r], Tail::Affine { c0: r, c1 })),
        (0.5..2.0f64).prop_map(move |tau| SmoothnessSequence::new(vec![r], Tail::Power { omega: r, tau })),
        prop::collection::vec(0.0..2.0f64, 0..4).prop_map(move |steps| {
            let mut rates = vec![r];
            for step in steps {
                rates.push(rates.last().unwrap() + step);
            }
            SmoothnessSequence::finite(rates)
        }),
    ]
}

fn small_spec() -> impl Strategy<Value = CrossSpec> {
    let korobov = (1u32..=3, 1.0..3.0f64, 0.0..1.0f64, 0.3..2.5f64)
        .prop_flat_map(|(m, a, beta, r)| {
            sequence_from(r).prop_map(move |seq| CrossSpec::korobov(m, a + beta, beta, 0, r, seq))
        });
    let analytic = (0u32..=3, 1.0..3.0f64, 0.0..1.0f64, 0.2..2.5f64, 0.0..2.0f64, 0.1..1.5f64)
        .prop_flat_map(|(m, a, beta, r, p, q)| {
            let (p, q) = if m == 0 || p < 0.5 { (0.0, 0.0) } else { (p, q) };
            sequence_from(r).prop_map(move |seq| CrossSpec::analytic(m, a + beta, beta, p, q, seq))
        });
    (prop_oneof![korobov, analytic], any::<bool>(), any::<bool>())
        .prop_map(|(spec, xs, ys)| spec.with_signs(xs, ys))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn count_matches_brute_force(spec in small_spec(), t in 1.0..30.0f64) {
        let spec = spec.validate().unwrap();
        let bbox = BruteBox::default_for(&spec, t).unwrap();
        prop_assume!(bbox.points(&spec) < 3e5);
        let fast = count_cross(&spec, t, None).unwrap();
        let slow = brute_force_count(&spec, t, None).unwrap();
        prop_assert_eq!(fast.total, slow.total);
        if !spec.x_signed && !spec.y_signed {
            prop_assert_eq!(fast.records, slow.records);
        }
    }

    #[test]
    fn parallel_records_match_the_walker(spec in small_spec(), t in 1.0..60.0f64) {
        let spec = spec.validate().unwrap();
        let serial: Vec<_> = enumerate_cross(&spec, t, None).unwrap().collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(serial, cross_records(&spec, t, None).unwrap());
    }
}

#[test]
fn expanded_indices_are_exactly_the_members() {
    for (name, spec) in oracle_family() {
        for t in [1.0, 3.0, 7.5, 20.0] {
            let expanded: Vec<MultiIndex> = enumerate_cross(&spec, t, None)
                .unwrap()
                .expand()
                .collect::<Result<_, _>>()
                .unwrap();
            let unique: BTreeSet<_> = expanded.iter().cloned().collect();
            assert_eq!(unique.len(), expanded.len(), "{name}@{t}: duplicates");
            assert!(expanded.windows(2).all(|w| w[0].s <= w[1].s), "{name}@{t}: s order");
            for idx in &expanded {
                assert!(spec.contains(idx, t).unwrap(), "{name}@{t}: {idx:?} outside");
            }
            assert_eq!(expanded.len() as u128, count_cross(&spec, t, None).unwrap().total, "{name}@{t}");
        }
    }
}

#[test]
fn signed_counts_follow_from_records() {
    for (name, base) in oracle_family() {
        for (xs, ys) in [(true, false), (false, true), (true, true)] {
            let spec = signed(&base, xs, ys);
            let t = 12.0;
            let from_records: u128 = cross_records(&base, t, None)
                .unwrap()
                .iter()
                .map(|rec| {
                    let k = if xs { 2 * u128::from(rec.k_radius) - 1 } else { u128::from(rec.k_radius) };
                    let s = if ys { 1u128 << rec.s.nnz() } else { 1 };
                    k.pow(base.m) * s
                })
                .sum();
            assert_eq!(from_records, count_cross(&spec, t, None).unwrap().total, "{name} x{xs} y{ys}");
        }
    }
}

#[test]
fn example_sandwiches() {
    let k1 = sandwich_report(&spec_k1(), 4.0).unwrap();
    assert_eq!((k1.lower, k1.exact), (4, Some(9)));
    assert!((k1.upper.unwrap() - 52.733).abs() < 1e-3);
    let a1 = sandwich_report(&spec_a1(), 8.0).unwrap();
    assert_eq!((a1.lower, a1.exact), (8, Some(12)));
    assert!((a1.upper.unwrap() - 40.8796).abs() < 1e-3);
}

#[test]
fn json_specs_round_trip() {
    for (name, spec) in oracle_family() {
        let text = spec.to_json();
        let back = CrossSpec::from_json(&text).unwrap().validate().unwrap();
        assert_eq!(back.spec(), spec.spec(), "{name}");
    }
}

#[test]
fn sparse_indices_reject_bad_input() {
    assert!(SparseIndex::new(vec![(0, 1)]).is_err());
    assert!(SparseIndex::new(vec![(2, 1), (2, 3)]).is_err());
    assert_eq!(SparseIndex::new(vec![(3, 0), (1, 2)]).unwrap().entries(), &[(1, 2)]);
}
