//! Seeded random generation of diagrams, hydras and label sets.
//!
//! Every generator respects the constructors' invariants: diagrams come out
//! in normal form and hydras pass [`crate::hydra::sort_of`].

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::diagram::{natural_sum, Diagram};
use crate::hydra::{Head, Hydra, Label, LabelSet, Leaf};

/// Random normal-form diagram with at most `max_size` nodes.
pub fn diagram<R: Rng + ?Sized>(rng: &mut R, max_size: usize) -> Diagram {
    let d = diagram_in(rng, max_size.max(1), false);
    debug_assert!(d.is_normal());
    d
}

fn diagram_in<R: Rng + ?Sized>(rng: &mut R, budget: usize, below_mu: bool) -> Diagram {
    if budget <= 2 {
        return match rng.random_range(0..if below_mu { 2 } else { 3 }) {
            0 => Diagram::Zero,
            1 => Diagram::One,
            _ => Diagram::Mu,
        };
    }
    let kinds: &[u8] = if below_mu { &[0, 1, 3, 3] } else { &[0, 1, 2, 3, 3, 4] };
    match *kinds.choose(rng).unwrap() {
        0 => {
            let n = rng.random_range(2..=3usize).min(budget - 1);
            let each = (budget - 1) / n;
            Diagram::sum((0..n).map(|_| diagram_in(rng, each, below_mu)))
        }
        1 => {
            let left = rng.random_range(1..budget - 1);
            let a = diagram_in(rng, left, true);
            let b = diagram_in(rng, budget - 1 - left, true);
            Diagram::veblen(a, b).expect("arguments generated below mu")
        }
        2 => {
            let rest = diagram_in(rng, budget - 2, false);
            let exp = if rng.random_bool(0.5) {
                natural_sum(&Diagram::Mu, &rest)
            } else {
                match rest {
                    Diagram::OmegaPow(_) => rest,
                    _ => natural_sum(&Diagram::Mu, &rest),
                }
            };
            Diagram::omega_pow(exp).expect("exponent is at least mu")
        }
        3 => {
            let (sigma, used) = if budget >= 4 && rng.random_bool(0.5) {
                let inner = diagram_in(rng, (budget - 2) / 2, false);
                let used = 2 + inner.size();
                (Diagram::collapse(Diagram::Mu, inner).unwrap(), used)
            } else {
                (Diagram::Mu, 1)
            };
            let alpha = diagram_in(rng, budget.saturating_sub(1 + used).max(1), false);
            Diagram::collapse(sigma, alpha).unwrap()
        }
        _ => {
            let rest = diagram_in(rng, budget - 1, false);
            natural_sum(&Diagram::Mu, &rest)
        }
    }
}

/// Which hydra sort a generated term must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    H0,
    H1,
}

/// Random sort-valid hydra with roughly `max_size` nodes, drawing labels from
/// `pool` where a label is needed.
pub fn hydra<R: Rng + ?Sized>(
    rng: &mut R,
    max_size: usize,
    target: Target,
    pool: &[Label],
) -> Hydra {
    hydra_in(rng, max_size.max(1), target, pool)
}

fn pick_label<R: Rng + ?Sized>(rng: &mut R, pool: &[Label]) -> Label {
    match pool.choose(rng) {
        Some(l) => l.clone(),
        None => Label::dmu(Hydra::Zero),
    }
}

fn pick_label_set<R: Rng + ?Sized>(rng: &mut R, pool: &[Label], nonempty: bool) -> LabelSet {
    let n = if nonempty {
        rng.random_range(1..=2)
    } else {
        rng.random_range(0..=2)
    };
    (0..n).map(|_| pick_label(rng, pool)).collect()
}

fn tail<R: Rng + ?Sized>(rng: &mut R, budget: usize, target: Target, pool: &[Label]) -> Hydra {
    // a trailing unit lets the successor rules fire often
    if budget >= 3 && rng.random_bool(0.4) {
        let h = hydra_in(rng, budget - 2, target, pool);
        h.add_units(1)
    } else {
        hydra_in(rng, budget, target, pool)
    }
}

fn hydra_in<R: Rng + ?Sized>(rng: &mut R, budget: usize, target: Target, pool: &[Label]) -> Hydra {
    if budget <= 1 {
        return if rng.random_bool(0.3) { Hydra::Zero } else { Hydra::One };
    }
    let body = budget - 1;
    match target {
        Target::H0 => match rng.random_range(0..8) {
            0 => {
                let n = rng.random_range(2..=3usize).min(budget - 1).max(2);
                let each = ((budget - 1) / n).max(1);
                Hydra::sum((0..n).map(|_| term_in(rng, each, Target::H0, pool)))
            }
            _ => term_in(rng, budget, Target::H0, pool),
        },
        Target::H1 => match rng.random_range(0..6) {
            0 => {
                let n = 2usize;
                let each = (body / n).max(1);
                Hydra::sum((0..n).map(|_| term_in(rng, each, Target::H1, pool)))
            }
            _ => term_in(rng, budget, Target::H1, pool),
        },
    }
}

fn term_in<R: Rng + ?Sized>(rng: &mut R, budget: usize, target: Target, pool: &[Label]) -> Hydra {
    if budget <= 1 {
        return Hydra::One;
    }
    let body = budget - 1;
    match target {
        Target::H0 => match rng.random_range(0..9) {
            0 => {
                let n = rng.random_range(1..=3);
                let leaf = match rng.random_range(0..4) {
                    0 => Leaf::Nat(rng.random_range(1..=3)),
                    1 => Leaf::StarOmega,
                    2 => Leaf::StarMu,
                    _ => Leaf::Label(pick_label(rng, pool)),
                };
                Hydra::scaled(n, leaf)
            }
            1 | 2 => Hydra::omega(tail(rng, body, Target::H0, pool)),
            3 => Hydra::brace(Head::Mu, hydra_in(rng, body, Target::H0, pool)),
            4 => Hydra::brace(Head::StarMu, hydra_in(rng, body, Target::H0, pool)),
            5 => Hydra::brace(
                Head::Label(pick_label(rng, pool)),
                hydra_in(rng, body.saturating_sub(1).max(1), Target::H0, pool),
            ),
            6 => Hydra::One,
            _ => Hydra::omega(hydra_in(rng, body, Target::H0, pool)),
        },
        Target::H1 => match rng.random_range(0..6) {
            0 | 1 => Hydra::d(
                pick_label_set(rng, pool, false),
                tail(rng, body.saturating_sub(1).max(1), Target::H0, pool),
            ),
            2 | 3 => {
                let cs = pick_label_set(rng, pool, true);
                let n = if cs.len() == 1 {
                    rng.random_range(0..=2)
                } else {
                    0
                };
                Hydra::phi(cs, n, tail(rng, body.saturating_sub(1).max(1), Target::H1, pool))
            }
            4 => Hydra::brace(
                Head::Label(pick_label(rng, pool)),
                hydra_in(rng, body.saturating_sub(1).max(1), Target::H1, pool),
            ),
            _ => Hydra::One,
        },
    }
}

/// A small pool of labels built from tiny bodies.
pub fn label_pool<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Label> {
    let mut pool: Vec<Label> = Vec::new();
    for _ in 0..count {
        let label = if pool.is_empty() || rng.random_bool(0.6) {
            let size = rng.random_range(1..=3);
            Label::dmu(hydra_in(rng, size, Target::H0, &pool))
        } else {
            let (s0, s1) = (rng.random_range(1..=2), rng.random_range(1..=3));
            let h0 = hydra_in(rng, s0, Target::H0, &pool);
            let h1 = hydra_in(rng, s1, Target::H1, &pool);
            Label::dsub(h0, h1)
        };
        if !pool.contains(&label) {
            pool.push(label);
        }
    }
    pool
}

/// A random subset of `pool` with at most `max` members.
pub fn label_set<R: Rng + ?Sized>(rng: &mut R, pool: &[Label], max: usize) -> LabelSet {
    let n = rng.random_range(0..=max.min(pool.len()));
    pool.choose_multiple(rng, n).cloned().collect()
}
