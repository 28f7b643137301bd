use hydra_core::game::{build_tree, game_height, play, Height, Strategy};
use hydra_core::hydra::{Hydra, LabelSet};
use hydra_core::moves::{enumerate_moves, MoveConfig};
use hydra_core::textio::parse_hydra;
use hydra_core::verify::{generate_case, strictly_decreasing, SuiteConfig};

const SMALL: [&str; 8] = ["0", "1", "1+1", "2*1", "w(0)", "w(1)", "{mu}(1)", "w(0)+1"];

#[test]
fn height_is_monotone_under_unit_padding() {
    let lb = LabelSet::new();
    for src in SMALL {
        let h = parse_hydra(src).unwrap();
        let mut prev = 0;
        for n in 0..3 {
            let padded = if n == 0 { h.clone() } else { h.add_units(n) };
            match game_height(&padded, &lb, 200_000, MoveConfig::default()).unwrap() {
                Height::Exact(v) => {
                    assert!(v >= prev, "{padded}: {v} < {prev}");
                    prev = v;
                }
                Height::AtLeast(_) => break,
            }
        }
    }
}

#[test]
fn tree_child_counts_match_enumeration() {
    let lb = LabelSet::new();
    for src in SMALL {
        let tree = build_tree(&parse_hydra(src).unwrap(), &lb, 2_000, MoveConfig::default()).unwrap();
        for node in &tree.nodes {
            if let Some(count) = node.move_count {
                assert_eq!(count, enumerate_moves(&node.hydra, &node.labels, node.level).unwrap().len());
                if !tree.truncated {
                    assert_eq!(count, node.children.len());
                }
            }
        }
    }
}

#[test]
fn plays_from_small_corpus_terminate() {
    let config = SuiteConfig {
        max_size: 8,
        seed: 17,
        ..SuiteConfig::default()
    };
    for i in 0..200 {
        let case = generate_case(&config, i);
        for strategy in [Strategy::First, Strategy::Random { seed: i as u64 }, Strategy::MaxMeasureDrop] {
            let trace = play(&case.hydra, &case.labels, strategy, 100_000, MoveConfig::default()).unwrap();
            assert!(!trace.budget_exhausted, "{}", case.hydra);
            assert!(strictly_decreasing(&trace.measures().unwrap()));
            assert!(trace.last().hydra == Hydra::Zero || enumerate_moves(&trace.last().hydra, &trace.last().labels, trace.last().level).unwrap().is_empty());
        }
    }
}
