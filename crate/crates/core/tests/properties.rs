use std::cmp::Ordering;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hydra_core::diagram::{compare, is_regular, k_set, natural_sum, Diagram};
use hydra_core::generate::{self, Target};
use hydra_core::hydra::{Hydra, LabelSet};
use hydra_core::moves::enumerate_moves;
use hydra_core::textio::{parse_hydra, parse_label, parse_labels};
use hydra_core::verify::{check_measure_decrease, measure};

fn diagram(max: usize) -> impl Strategy<Value = Diagram> {
    any::<u64>().prop_map(move |seed| generate::diagram(&mut ChaCha8Rng::seed_from_u64(seed), max))
}

fn position(max: usize) -> impl Strategy<Value = (Hydra, LabelSet)> {
    (any::<u64>(), any::<bool>()).prop_map(move |(seed, h1)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = generate::label_pool(&mut rng, 3);
        let lb = generate::label_set(&mut rng, &pool, 2);
        let target = if h1 { Target::H1 } else { Target::H0 };
        (generate::hydra(&mut rng, max, target, &pool), lb)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn compare_is_antisymmetric(a in diagram(12), b in diagram(12)) {
        prop_assert_eq!(compare(&a, &b), compare(&b, &a).reverse());
        prop_assert_eq!(compare(&a, &b) == Ordering::Equal, a == b);
    }

    #[test]
    fn compare_is_transitive(a in diagram(10), b in diagram(10), c in diagram(10)) {
        if compare(&a, &b).is_lt() && compare(&b, &c).is_lt() {
            prop_assert!(compare(&a, &c).is_lt());
        }
    }

    #[test]
    fn natural_sum_laws(a in diagram(10), b in diagram(10), c in diagram(10)) {
        prop_assert_eq!(natural_sum(&a, &b), natural_sum(&b, &a));
        prop_assert_eq!(
            natural_sum(&natural_sum(&a, &b), &c),
            natural_sum(&a, &natural_sum(&b, &c))
        );
        prop_assert_eq!(natural_sum(&a, &Diagram::Zero), a.clone());
        prop_assert!(natural_sum(&a, &b).is_normal());
        if b != Diagram::Zero {
            prop_assert!(compare(&a, &natural_sum(&a, &b)).is_lt());
        }
    }

    #[test]
    fn k_sets_hold_collapse_terms(a in diagram(14), s in diagram(6)) {
        let sigma = if is_regular(&s) { s } else { Diagram::Mu };
        for m in k_set(&sigma, &a).unwrap().members() {
            prop_assert!(matches!(m, Diagram::Collapse(..)), "{}", m);
        }
    }

    #[test]
    fn print_parse_round_trip((h, lb) in position(14)) {
        prop_assert_eq!(parse_hydra(&h.to_string()).unwrap(), h.clone());
        prop_assert_eq!(parse_labels(&lb.to_string()).unwrap(), lb.clone());
        for l in h.labels_of().iter() {
            prop_assert_eq!(&parse_label(&l.to_string()).unwrap(), l);
        }
    }

    #[test]
    fn fixed_part_is_within_labels((h, _) in position(14)) {
        prop_assert!(h.fixed_part().is_subset(&h.labels_of()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn moves_grow_labels_by_at_most_one((h, lb) in position(8), level in 0u64..3) {
        for mv in enumerate_moves(&h, &lb, level).unwrap() {
            let added = mv.result_labels.difference(&lb);
            prop_assert!(lb.is_subset(&mv.result_labels));
            prop_assert!(added.len() <= 1);
            prop_assert_eq!(added.iter().next(), mv.produced.as_ref());
            prop_assert!(mv.result_hydra.is_valid());
        }
    }

    #[test]
    fn every_move_lowers_the_measure((h, lb) in position(8), level in 0u64..3) {
        let before = measure(&h, &lb).unwrap();
        for mv in enumerate_moves(&h, &lb, level).unwrap() {
            prop_assert!(check_measure_decrease(&h, &lb, &mv).unwrap(), "{} -> {}", h, mv.result_hydra);
            let after = measure(&mv.result_hydra, &mv.result_labels).unwrap();
            prop_assert!(compare(&after, &before).is_lt());
        }
    }
}
