use std::collections::BTreeSet;

use proptest::prelude::*;

use vcmod::format::{parse_class, parse_set, write_class, write_set};
use vcmod::measures::DiscreteMeasure;
use vcmod::shattering::{vc_dimension, vc_mod_ideal, vc_thick};
use vcmod::stone::{generated_partition, vc_on_stone};
use vcmod::{ConceptClass, Domain, PointSet, PrincipalIdeal, WorkLimits};

fn set(m: usize) -> impl Strategy<Value = PointSet> {
    proptest::collection::vec(any::<bool>(), m).prop_map(|b| PointSet::from_bools(&b))
}

fn class(max_m: usize, max_k: usize) -> impl Strategy<Value = ConceptClass> {
    (1..=max_m).prop_flat_map(move |m| {
        proptest::collection::vec(set(m), 1..=max_k).prop_map(move |cs| ConceptClass::new(Domain::new(m).unwrap(), cs))
    })
}

fn class_and_set(max_m: usize, max_k: usize) -> impl Strategy<Value = (ConceptClass, PointSet)> {
    class(max_m, max_k).prop_flat_map(|c| {
        let m = c.m();
        (Just(c), set(m))
    })
}

fn measure(m: usize) -> impl Strategy<Value = DiscreteMeasure> {
    proptest::collection::vec(0u32..100, m)
        .prop_filter("some mass", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: u32 = w.iter().sum();
            DiscreteMeasure::new(w.iter().map(|&x| x as f64 / total as f64).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pointset_matches_btreeset(a in proptest::collection::btree_set(0usize..130, 0..40),
                                 b in proptest::collection::btree_set(0usize..130, 0..40)) {
        let m = 130;
        let (sa, sb) = (PointSet::from_points(m, a.iter().copied()).unwrap(), PointSet::from_points(m, b.iter().copied()).unwrap());
        prop_assert_eq!(sa.union(&sb).to_vec(), a.union(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection(&sb).to_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.difference(&sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.symmetric_difference(&sb).to_vec(), a.symmetric_difference(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.complement().count(), m - a.len());
        prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
        prop_assert_eq!(sa.is_disjoint(&sb), a.is_disjoint(&b));
        prop_assert_eq!(sa.first(), a.iter().next().copied());
    }

    #[test]
    fn class_format_round_trips(c in class(70, 12)) {
        let text = write_class(&c);
        prop_assert_eq!(parse_class(&text).unwrap(), c);
    }

    #[test]
    fn set_format_round_trips(s in (1usize..200).prop_flat_map(set)) {
        prop_assert_eq!(parse_set(&write_set(&s)).unwrap(), s);
    }

    #[test]
    fn ideal_is_downward_closed_and_union_closed((n, a, b) in (1usize..40).prop_flat_map(|m| (set(m), set(m), set(m)))) {
        let ideal = PrincipalIdeal::new(n.clone());
        let (a, b) = (a.intersection(&n), b.intersection(&n));
        prop_assert!(ideal.contains(&a) && ideal.contains(&b));
        prop_assert!(ideal.contains(&a.union(&b)));
        let smaller = a.intersection(&b);
        prop_assert!(ideal.contains(&smaller));
        prop_assert!(ideal.contains(&PointSet::empty(n.len())));
    }

    #[test]
    fn symdiff_is_a_pseudometric((mu, a, b, c) in (1usize..30).prop_flat_map(|m| (measure(m), set(m), set(m), set(m)))) {
        let d = |x: &PointSet, y: &PointSet| mu.symdiff_distance(x, y).unwrap();
        prop_assert!(d(&a, &a).abs() < 1e-12);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d(&a, &b)));
    }

    #[test]
    fn mixture_atom_bound((ms, raw) in (2usize..20).prop_flat_map(|m| (proptest::collection::vec(measure(m), 1..4), proptest::collection::vec(1u32..10, 3)))) {
        let raw = &raw[..ms.len()];
        let total: u32 = raw.iter().sum();
        let mut coeffs: Vec<f64> = raw.iter().map(|&x| x as f64 / total as f64).collect();
        let last = coeffs.len() - 1;
        coeffs[last] = 1.0 - coeffs[..last].iter().sum::<f64>();
        let mix = DiscreteMeasure::mixture(&ms, &coeffs).unwrap();
        let bound: f64 = ms.iter().zip(&coeffs).map(|(m, c)| c * m.atom_bound()).sum();
        prop_assert!(mix.atom_bound() <= bound + 1e-12);
        prop_assert!((mix.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partition_blocks_cover_and_generate(c in class(40, 8)) {
        let p = generated_partition(c.m(), c.concepts()).unwrap();
        let mut seen = PointSet::empty(c.m());
        for b in p.blocks() {
            prop_assert!(!b.is_empty() && seen.is_disjoint(b));
            seen.union_with(b);
        }
        prop_assert_eq!(seen, PointSet::full(c.m()));
        for concept in c.concepts() {
            prop_assert!(p.is_measurable(concept));
        }
    }

    #[test]
    fn thick_one_is_classical_and_monotone(c in class(8, 16)) {
        let limits = WorkLimits::default();
        let vc = vc_dimension(&c, &limits).unwrap().dimension;
        let dims: Vec<usize> = (1..=c.m()).map(|k| vc_thick(&c, k, &limits).unwrap().dimension).collect();
        prop_assert_eq!(dims[0], vc);
        prop_assert!(dims.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ideal_dimension_agrees_three_ways((c, n) in class_and_set(9, 20)) {
        let limits = WorkLimits::default();
        let ideal = PrincipalIdeal::new(n.clone());
        let direct = vc_mod_ideal(&c, &ideal, &limits).unwrap().dimension;
        prop_assert_eq!(direct, vc_on_stone(&c, &ideal, &limits).unwrap().dimension);
        let restricted = c.restrict(&n.complement()).unwrap().map_or(0, |r| vc_dimension(&r, &limits).unwrap().dimension);
        prop_assert_eq!(direct, restricted);
        prop_assert!(direct <= vc_dimension(&c, &limits).unwrap().dimension);
    }

    #[test]
    fn bigger_ideal_never_raises_dimension((c, n) in class_and_set(8, 16), extra in any::<u64>()) {
        let limits = WorkLimits::default();
        let bigger = PointSet::from_points(c.m(), (0..c.m()).filter(|i| n.contains(*i) || extra >> i & 1 == 1)).unwrap();
        let small = vc_mod_ideal(&c, &PrincipalIdeal::new(n), &limits).unwrap().dimension;
        let large = vc_mod_ideal(&c, &PrincipalIdeal::new(bigger), &limits).unwrap().dimension;
        prop_assert!(large <= small);
    }

    #[test]
    fn sampling_is_deterministic_and_in_support((mu, seed) in ((1usize..30).prop_flat_map(measure), any::<u64>())) {
        let a = mu.sample_iid(50, seed);
        prop_assert_eq!(&a, &mu.sample_iid(50, seed));
        let support: BTreeSet<usize> = mu.support().iter().collect();
        prop_assert!(a.points.iter().all(|p| support.contains(p)));
    }
}
