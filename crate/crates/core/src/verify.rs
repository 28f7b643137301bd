//! Executable decrease checks for single moves, and a seeded property suite
//! that runs them over random hydras.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assign::{o_hydra, o_label, o_labelset, AssignError};
use crate::diagram::{compare, k_set, natural_sum, Diagram, KSet};
use crate::generate::{self, Target};
use crate::hydra::{Hydra, LabelSet};
use crate::moves::{enumerate_moves_with, Move, MoveConfig, Rule};
use crate::textio::Document;

/// `d_Ω(o(h)#o(lb))`.
pub fn measure(h: &Hydra, lb: &LabelSet) -> Result<Diagram, AssignError> {
    let arg = natural_sum(&o_hydra(h)?, &o_labelset(lb)?);
    Ok(Diagram::collapse(Diagram::omega_cap(), arg)?)
}

/// Outcome of the three decrease conditions for one move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `o(K)#o(A) < o(H)`
    pub cond1_holds: bool,
    /// Levels `σ` where `K_σ(o(K)) ≤ K_σ(o(H)) ∪ K_σ(o(lb′))` fails.
    pub cond2_failures: Vec<String>,
    /// Pairs `(σ, α)` with `α ∈ K_σ(o(A))` outside `K_σ(o(H)) ∪ K_σ(o(lb))` and not below `d_σ(o(H))`.
    pub cond3_failures: Vec<(String, String)>,
    pub sigma_set_used: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.cond1_holds && self.cond2_failures.is_empty() && self.cond3_failures.is_empty()
    }
}

fn regular_subterms(ds: &[&Diagram]) -> Vec<Diagram> {
    let mut out = vec![Diagram::Mu, Diagram::omega_cap()];
    for d in ds {
        for s in d.subterms() {
            if crate::diagram::is_regular(s) && !out.contains(s) {
                out.push(s.clone());
            }
        }
    }
    out
}

fn k(sigma: &Diagram, alpha: &Diagram) -> KSet {
    k_set(sigma, alpha).expect("candidates are regular")
}

/// Checks the three decrease conditions for `(h, lb) → move`, with `A` the
/// produced label or `0`. `∀σ` ranges over `μ`, `Ω` and every regular
/// subterm of the values involved.
pub fn check_lemma(h: &Hydra, lb: &LabelSet, mv: &Move) -> Result<LemmaReport, AssignError> {
    let oh = o_hydra(h)?;
    let ok = o_hydra(&mv.result_hydra)?;
    let oa = match &mv.produced {
        Some(a) => o_label(a)?,
        None => Diagram::Zero,
    };
    let olb = o_labelset(lb)?;
    let olb2 = o_labelset(&mv.result_labels)?;
    let cond1_holds = compare(&natural_sum(&ok, &oa), &oh) == Ordering::Less;
    let sigmas = regular_subterms(&[&oh, &ok, &oa, &olb, &olb2]);
    let mut cond2_failures = Vec::new();
    let mut cond3_failures = Vec::new();
    for sigma in &sigmas {
        let kh = k(sigma, &oh);
        let rhs = kh.clone().union(k(sigma, &olb2));
        if !k(sigma, &ok).le_set(&rhs) {
            cond2_failures.push(sigma.to_string());
        }
        let allowed = kh.union(k(sigma, &olb));
        let bound = Diagram::Collapse(Box::new(sigma.clone()), Box::new(oh.clone()));
        for alpha in k(sigma, &oa).members() {
            if !allowed.contains(alpha) && compare(alpha, &bound) != Ordering::Less {
                cond3_failures.push((sigma.to_string(), alpha.to_string()));
            }
        }
    }
    Ok(LemmaReport {
        cond1_holds,
        cond2_failures,
        cond3_failures,
        sigma_set_used: sigmas.iter().map(Diagram::to_string).collect(),
    })
}

/// `d_Ω(o(K)#o(lb′)) < d_Ω(o(H)#o(lb))`.
pub fn check_measure_decrease(h: &Hydra, lb: &LabelSet, mv: &Move) -> Result<bool, AssignError> {
    let before = measure(h, lb)?;
    let after = measure(&mv.result_hydra, &mv.result_labels)?;
    Ok(compare(&after, &before) == Ordering::Less)
}

/// Deliberate corruption of enumerated moves, for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    None,
    /// Replace the result by `H+1`.
    AppendUnit,
}

impl Mutation {
    fn apply(self, h: &Hydra, mv: &mut Move) {
        match self {
            Mutation::None => {}
            Mutation::AppendUnit => mv.result_hydra = h.add_units(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub num_hydras: usize,
    pub max_size: usize,
    pub min_level: u64,
    pub max_level: u64,
    pub seed: u64,
    /// Labels in each hydra's pool.
    pub pool_size: usize,
    /// Upper bound on `|lb|`.
    pub max_labels: usize,
    pub moves: MoveConfig,
    pub mutation: Mutation,
    /// Counterexamples kept in the report.
    pub max_counterexamples: usize,
    pub shrink: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            num_hydras: 500,
            max_size: 10,
            min_level: 0,
            max_level: 4,
            seed: 0,
            pool_size: 3,
            max_labels: 2,
            moves: MoveConfig::default(),
            mutation: Mutation::None,
            max_counterexamples: 10,
            shrink: true,
        }
    }
}

/// One generated test position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub hydra: Hydra,
    pub labels: LabelSet,
}

/// The `index`-th case of a suite; independent of every other index.
pub fn generate_case(config: &SuiteConfig, index: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64);
    let pool = generate::label_pool(&mut rng, config.pool_size);
    let labels = generate::label_set(&mut rng, &pool, config.max_labels);
    for _ in 0..64 {
        let target = if rng.random_bool(0.5) { Target::H0 } else { Target::H1 };
        let hydra = generate::hydra(&mut rng, config.max_size, target, &pool);
        if hydra.size() <= config.max_size.max(1) {
            return Case { hydra, labels };
        }
    }
    Case {
        hydra: Hydra::One,
        labels,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub hydra: Hydra,
    pub labels: LabelSet,
    pub level: u64,
    pub move_index: usize,
    pub rule: Rule,
    pub redex: Rule,
    pub result_hydra: Hydra,
    pub result_labels: LabelSet,
    pub lemma: LemmaReport,
    pub measure_decreases: bool,
    /// A smaller position that still has a failing move.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shrunk: Option<Box<Counterexample>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub hydras: usize,
    pub positions: usize,
    pub moves_checked: usize,
    pub lemma_failures: usize,
    pub measure_failures: usize,
    /// Moves per redex rule.
    pub per_rule: Vec<(Rule, usize)>,
    pub enumeration_errors: Vec<String>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.lemma_failures == 0 && self.measure_failures == 0 && self.enumeration_errors.is_empty()
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "hydras {}  positions {}  moves {}  lemma failures {}  measure failures {}\n",
            self.hydras, self.positions, self.moves_checked, self.lemma_failures, self.measure_failures
        );
        for (rule, n) in &self.per_rule {
            s.push_str(&format!("  {:<16}{n}\n", rule.name()));
        }
        for e in &self.enumeration_errors {
            s.push_str(&format!("  error: {e}\n"));
        }
        for c in &self.counterexamples {
            let shown = c.shrunk.as_deref().unwrap_or(c);
            s.push_str(&format!(
                "  counterexample: ({}, {{{}}}) at level {} via {} -> {}\n",
                shown.hydra,
                shown.labels,
                shown.level,
                shown.redex.name(),
                shown.result_hydra
            ));
        }
        s.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        s
    }
}

impl Document for SuiteReport {
    const KIND: &'static str = "suite_report";
}

struct PositionResult {
    moves: usize,
    per_rule: Vec<(Rule, usize)>,
    lemma_failures: usize,
    measure_failures: usize,
    failures: Vec<Counterexample>,
    error: Option<String>,
}

fn check_position(h: &Hydra, lb: &LabelSet, level: u64, config: &SuiteConfig) -> PositionResult {
    let mut out = PositionResult {
        moves: 0,
        per_rule: Vec::new(),
        lemma_failures: 0,
        measure_failures: 0,
        failures: Vec::new(),
        error: None,
    };
    let moves = match enumerate_moves_with(h, lb, level, config.moves) {
        Ok(ms) => ms,
        Err(e) => {
            out.error = Some(format!("({h}, {{{lb}}}) at level {level}: {e}"));
            return out;
        }
    };
    out.moves = moves.len();
    for (i, mut mv) in moves.into_iter().enumerate() {
        config.mutation.apply(h, &mut mv);
        match out.per_rule.iter_mut().find(|(r, _)| *r == mv.redex) {
            Some((_, n)) => *n += 1,
            None => out.per_rule.push((mv.redex, 1)),
        }
        let (lemma, decreases) = match (check_lemma(h, lb, &mv), check_measure_decrease(h, lb, &mv)) {
            (Ok(l), Ok(d)) => (l, d),
            (Err(e), _) | (_, Err(e)) => {
                out.error = Some(format!("({h}, {{{lb}}}) at level {level}: {e}"));
                continue;
            }
        };
        if !lemma.passed() {
            out.lemma_failures += 1;
        }
        if !decreases {
            out.measure_failures += 1;
        }
        if !lemma.passed() || !decreases {
            out.failures.push(Counterexample {
                hydra: h.clone(),
                labels: lb.clone(),
                level,
                move_index: i,
                rule: mv.rule,
                redex: mv.redex,
                result_hydra: mv.result_hydra,
                result_labels: mv.result_labels,
                lemma,
                measure_decreases: decreases,
                shrunk: None,
            });
        }
    }
    out
}

fn first_failure(h: &Hydra, lb: &LabelSet, level: u64, config: &SuiteConfig) -> Option<Counterexample> {
    check_position(h, lb, level, config).failures.into_iter().next()
}

/// Proper hydra subterms that are themselves valid positions.
fn smaller_hydras(h: &Hydra) -> Vec<Hydra> {
    let mut out = Vec::new();
    match h {
        Hydra::Sum(ps) => {
            for i in 0..ps.len() {
                out.push(Hydra::sum(
                    ps.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()),
                ));
            }
            out.extend(ps.iter().cloned());
        }
        Hydra::Omega(b) | Hydra::Brace(_, b) | Hydra::D(_, b) | Hydra::Phi(_, _, b) => {
            out.push((**b).clone());
        }
        Hydra::Scaled(n, leaf) if *n > 1 => out.push(Hydra::scaled(n - 1, leaf.clone())),
        _ => {}
    }
    out.retain(Hydra::is_valid);
    out.sort_by_key(Hydra::size);
    out
}

/// Greedily replaces a failing position by smaller ones that still fail.
pub fn shrink(failure: &Counterexample, config: &SuiteConfig) -> Counterexample {
    let mut best = failure.clone();
    loop {
        let mut candidates: Vec<(Hydra, LabelSet, u64)> = Vec::new();
        for h in smaller_hydras(&best.hydra) {
            candidates.push((h, best.labels.clone(), best.level));
        }
        for l in best.labels.iter() {
            let mut fewer = best.labels.clone();
            fewer = fewer.difference(&LabelSet::singleton(l.clone()));
            candidates.push((best.hydra.clone(), fewer, best.level));
        }
        if best.level > 0 {
            candidates.push((best.hydra.clone(), best.labels.clone(), best.level - 1));
        }
        let next = candidates
            .into_iter()
            .find_map(|(h, lb, level)| first_failure(&h, &lb, level, config));
        match next {
            Some(c) => best = c,
            None => return best,
        }
    }
}

/// Runs both checks on every move of every generated case at every level.
pub fn run_property_suite(config: &SuiteConfig) -> SuiteReport {
    let levels: Vec<u64> = (config.min_level..=config.max_level).collect();
    let results: Vec<Vec<PositionResult>> = (0..config.num_hydras)
        .into_par_iter()
        .map(|i| {
            let case = generate_case(config, i);
            levels
                .iter()
                .map(|&level| check_position(&case.hydra, &case.labels, level, config))
                .collect()
        })
        .collect();
    let mut report = SuiteReport {
        config: config.clone(),
        hydras: config.num_hydras,
        positions: 0,
        moves_checked: 0,
        lemma_failures: 0,
        measure_failures: 0,
        per_rule: Vec::new(),
        enumeration_errors: Vec::new(),
        counterexamples: Vec::new(),
    };
    for r in results.into_iter().flatten() {
        report.positions += 1;
        report.moves_checked += r.moves;
        report.lemma_failures += r.lemma_failures;
        report.measure_failures += r.measure_failures;
        for (rule, n) in r.per_rule {
            match report.per_rule.iter_mut().find(|(x, _)| *x == rule) {
                Some((_, m)) => *m += n,
                None => report.per_rule.push((rule, n)),
            }
        }
        if let Some(e) = r.error {
            report.enumeration_errors.push(e);
        }
        for c in r.failures {
            if report.counterexamples.len() < config.max_counterexamples {
                report.counterexamples.push(c);
            }
        }
    }
    report.per_rule.sort();
    if config.shrink {
        let shrunk: Vec<Counterexample> = report
            .counterexamples
            .par_iter()
            .map(|c| shrink(c, config))
            .collect();
        for (c, s) in report.counterexamples.iter_mut().zip(shrunk) {
            if s != *c {
                c.shrunk = Some(Box::new(s));
            }
        }
    }
    report
}

/// Each measure is strictly below the previous one.
pub fn strictly_decreasing(measures: &[Diagram]) -> bool {
    measures
        .windows(2)
        .all(|w| compare(&w[1], &w[0]) == Ordering::Less)
}
