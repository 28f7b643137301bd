//! The level-indexed game: positions, the game tree, its height, and play.
//!
//! The level of a position is its depth in the tree, so every applied move
//! raises it by one.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::AssignError;
use crate::diagram::{compare, Diagram};
use crate::hydra::{Hydra, LabelSet, SortError};
use crate::moves::{apply_move_with, enumerate_moves_with, Move, MoveConfig, MoveError, Rule};
use crate::textio::{state_digest, Document};
use crate::verify::measure;

pub const DEFAULT_MAX_NODES: usize = 100_000;
pub const DEFAULT_STEP_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error("move index {index} out of range ({count} moves)")]
    Index { index: usize, count: usize },
    #[error("inconsistent game state: {0}")]
    Inconsistent(String),
}

/// A node `t` of the game: `H₀[t]`, `lb[t]`, `ℓ = |t|` and the moves that led there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub hydra: Hydra,
    pub labels: LabelSet,
    pub level: u64,
    pub history: Vec<Move>,
}

impl GameState {
    pub fn new(hydra: Hydra, labels: LabelSet) -> Result<Self, GameError> {
        hydra.sort_of()?;
        for l in &labels {
            l.check()?;
        }
        Ok(GameState {
            hydra,
            labels,
            level: 0,
            history: Vec::new(),
        })
    }

    pub fn moves(&self, config: MoveConfig) -> Result<Vec<Move>, GameError> {
        Ok(enumerate_moves_with(&self.hydra, &self.labels, self.level, config)?)
    }

    pub fn digest(&self) -> String {
        state_digest(&self.hydra, &self.labels, self.level)
    }

    pub fn measure(&self) -> Result<Diagram, GameError> {
        Ok(measure(&self.hydra, &self.labels)?)
    }

    /// Applies `mv`, which must be enumerated at this position.
    pub fn apply(&self, mv: &Move, config: MoveConfig) -> Result<GameState, GameError> {
        let (hydra, labels) = apply_move_with(&self.hydra, &self.labels, self.level, mv, config)?;
        let mut history = self.history.clone();
        history.push(mv.clone());
        Ok(GameState {
            hydra,
            labels,
            level: self.level + 1,
            history,
        })
    }

    pub fn apply_index(&self, index: usize, config: MoveConfig) -> Result<GameState, GameError> {
        let moves = self.moves(config)?;
        let mv = moves.get(index).ok_or(GameError::Index {
            index,
            count: moves.len(),
        })?;
        self.apply(mv, config)
    }

    /// Checks sorts and `level = |history|`.
    pub fn validate(&self) -> Result<(), GameError> {
        self.hydra.sort_of()?;
        for l in &self.labels {
            l.check()?;
        }
        if self.level != self.history.len() as u64 {
            return Err(GameError::Inconsistent(format!(
                "level {} but {} moves in history",
                self.level,
                self.history.len()
            )));
        }
        Ok(())
    }
}

impl Document for GameState {
    const KIND: &'static str = "game_state";
}

impl Document for Move {
    const KIND: &'static str = "move";
}

/// The moves of one position, indexed by their place in the list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveList {
    pub hydra: Hydra,
    pub labels: LabelSet,
    pub level: u64,
    pub digest: String,
    pub moves: Vec<Move>,
}

impl MoveList {
    pub fn new(hydra: &Hydra, labels: &LabelSet, level: u64, config: MoveConfig) -> Result<Self, GameError> {
        Ok(MoveList {
            hydra: hydra.clone(),
            labels: labels.clone(),
            level,
            digest: state_digest(hydra, labels, level),
            moves: enumerate_moves_with(hydra, labels, level, config)?,
        })
    }
}

impl Document for MoveList {
    const KIND: &'static str = "move_list";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Enumeration index of the move from the parent.
    pub index: Option<usize>,
    pub rule: Option<Rule>,
    pub hydra: Hydra,
    pub labels: LabelSet,
    pub level: u64,
    /// `None` when the node was never expanded.
    pub move_count: Option<usize>,
    pub children: Vec<usize>,
}

/// A breadth-first prefix of `Tr(H₀,lb₀)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTree {
    pub nodes: Vec<TreeNode>,
    pub truncated: bool,
}

impl GameTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Deepest level present.
    pub fn height(&self) -> u64 {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// The index sequence `t` of a node.
    pub fn address(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = &self.nodes[id];
        while let (Some(p), Some(i)) = (cur.parent, cur.index) {
            out.push(i);
            cur = &self.nodes[p];
        }
        out.reverse();
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph game {\n  node [shape=box, fontname=monospace];\n");
        for n in &self.nodes {
            let label = truncate(&n.hydra.to_string(), 80);
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, escape(&label));
        }
        for n in &self.nodes {
            if let (Some(p), Some(rule)) = (n.parent, n.rule) {
                let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", p, n.id, rule.name());
            }
        }
        out.push_str("}\n");
        out
    }
}

impl Document for GameTree {
    const KIND: &'static str = "game_tree";
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    let mut t: String = s.chars().take(max.saturating_sub(3)).collect();
    t.push_str("...");
    t
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Expands the tree breadth first until `max_nodes` nodes exist.
pub fn build_tree(
    h: &Hydra,
    lb: &LabelSet,
    max_nodes: usize,
    config: MoveConfig,
) -> Result<GameTree, GameError> {
    h.sort_of()?;
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        index: None,
        rule: None,
        hydra: h.clone(),
        labels: lb.clone(),
        level: 0,
        move_count: None,
        children: Vec::new(),
    }];
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(id) = queue.pop_front() {
        let (hydra, labels, level) = {
            let n = &nodes[id];
            (n.hydra.clone(), n.labels.clone(), n.level)
        };
        let moves = enumerate_moves_with(&hydra, &labels, level, config)?;
        nodes[id].move_count = Some(moves.len());
        for (i, mv) in moves.into_iter().enumerate() {
            if nodes.len() >= max_nodes.max(1) {
                truncated = true;
                break;
            }
            let child = nodes.len();
            nodes.push(TreeNode {
                id: child,
                parent: Some(id),
                index: Some(i),
                rule: Some(mv.rule),
                hydra: mv.result_hydra,
                labels: mv.result_labels,
                level: level + 1,
                move_count: None,
                children: Vec::new(),
            });
            nodes[id].children.push(child);
            queue.push_back(child);
        }
        if truncated {
            break;
        }
    }
    Ok(GameTree { nodes, truncated })
}

/// `F[H₀,lb₀]`, exact or a lower bound when the search budget ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Height {
    Exact(u64),
    AtLeast(u64),
}

impl Height {
    pub fn value(self) -> u64 {
        match self {
            Height::Exact(n) | Height::AtLeast(n) => n,
        }
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Exact(n) => write!(f, "Exact {n}"),
            Height::AtLeast(n) => write!(f, "AtLeast {n}"),
        }
    }
}

type Key = (Hydra, LabelSet, u64);

struct Frame {
    key: Key,
    children: Vec<(Hydra, LabelSet)>,
    next: usize,
    best: u64,
}

/// Longest play from `(h, lb)` at level 0, by depth-first search over
/// distinct positions. `budget` caps the number of positions expanded.
pub fn game_height(
    h: &Hydra,
    lb: &LabelSet,
    budget: usize,
    config: MoveConfig,
) -> Result<Height, GameError> {
    h.sort_of()?;
    let expand = |key: Key| -> Result<Frame, GameError> {
        let children = enumerate_moves_with(&key.0, &key.1, key.2, config)?
            .into_iter()
            .map(|m| (m.result_hydra, m.result_labels))
            .collect();
        Ok(Frame {
            key,
            children,
            next: 0,
            best: 0,
        })
    };
    let mut memo: HashMap<Key, u64> = HashMap::new();
    let mut stack = vec![expand((h.clone(), lb.clone(), 0))?];
    let mut expanded = 1usize;
    loop {
        let top = stack.last_mut().expect("stack is nonempty inside the loop");
        if top.next < top.children.len() {
            let (hydra, labels) = top.children[top.next].clone();
            top.next += 1;
            let key = (hydra, labels, top.key.2 + 1);
            if let Some(&v) = memo.get(&key) {
                top.best = top.best.max(v + 1);
                continue;
            }
            if expanded >= budget {
                let bound = stack
                    .iter()
                    .enumerate()
                    .map(|(depth, f)| depth as u64 + f.best)
                    .max()
                    .unwrap_or(0)
                    .max(stack.len() as u64);
                return Ok(Height::AtLeast(bound));
            }
            expanded += 1;
            stack.push(expand(key)?);
        } else {
            let done = stack.pop().expect("stack is nonempty inside the loop");
            memo.insert(done.key, done.best);
            match stack.last_mut() {
                Some(parent) => parent.best = parent.best.max(done.best + 1),
                None => return Ok(Height::Exact(done.best)),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    First,
    Random { seed: u64 },
    /// The move whose result has the least measure.
    MaxMeasureDrop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub level: u64,
    pub hydra: Hydra,
    pub labels: LabelSet,
    pub measure: String,
    /// Enumeration index and rule of the move that led here.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Moves were still available when the step budget ran out.
    pub budget_exhausted: bool,
}

impl Trace {
    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("a trace holds its initial position")
    }

    /// Number of moves played.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Recomputes the measure of every position.
    pub fn measures(&self) -> Result<Vec<Diagram>, GameError> {
        self.steps
            .iter()
            .map(|s| Ok(measure(&s.hydra, &s.labels)?))
            .collect()
    }

    /// Columns `step,measure,rule`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,measure,rule\n");
        for (i, s) in self.steps.iter().enumerate() {
            let rule = s.rule.map(Rule::name).unwrap_or("");
            let _ = writeln!(out, "{i},\"{}\",{rule}", s.measure.replace('"', "\"\""));
        }
        out
    }
}

impl Document for Trace {
    const KIND: &'static str = "trace";
}

fn step(h: &Hydra, lb: &LabelSet, level: u64, via: Option<(usize, Rule)>) -> Result<TraceStep, GameError> {
    Ok(TraceStep {
        level,
        hydra: h.clone(),
        labels: lb.clone(),
        measure: measure(h, lb)?.to_string(),
        index: via.map(|v| v.0),
        rule: via.map(|v| v.1),
    })
}

/// Plays from `(h, lb)` choosing moves with `choose`, which sees the
/// position and its moves and returns an index, or `None` to stop.
pub fn play_with<F>(
    h: &Hydra,
    lb: &LabelSet,
    step_budget: usize,
    config: MoveConfig,
    mut choose: F,
) -> Result<Trace, GameError>
where
    F: FnMut(&Hydra, &LabelSet, u64, &[Move]) -> Option<usize>,
{
    h.sort_of()?;
    let mut steps = vec![step(h, lb, 0, None)?];
    let (mut hydra, mut labels, mut level) = (h.clone(), lb.clone(), 0u64);
    loop {
        let moves = enumerate_moves_with(&hydra, &labels, level, config)?;
        if moves.is_empty() {
            return Ok(Trace { steps, budget_exhausted: false });
        }
        if steps.len() > step_budget {
            return Ok(Trace { steps, budget_exhausted: true });
        }
        let Some(index) = choose(&hydra, &labels, level, &moves) else {
            return Ok(Trace { steps, budget_exhausted: false });
        };
        let count = moves.len();
        let mv = moves
            .into_iter()
            .nth(index)
            .ok_or(GameError::Index { index, count })?;
        hydra = mv.result_hydra;
        labels = mv.result_labels;
        level += 1;
        steps.push(step(&hydra, &labels, level, Some((index, mv.rule)))?);
    }
}

pub fn play(
    h: &Hydra,
    lb: &LabelSet,
    strategy: Strategy,
    step_budget: usize,
    config: MoveConfig,
) -> Result<Trace, GameError> {
    match strategy {
        Strategy::First => play_with(h, lb, step_budget, config, |_, _, _, _| Some(0)),
        Strategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            play_with(h, lb, step_budget, config, |_, _, _, moves| {
                Some(rng.random_range(0..moves.len()))
            })
        }
        Strategy::MaxMeasureDrop => {
            let mut failure = None;
            let trace = play_with(h, lb, step_budget, config, |_, _, _, moves| {
                let mut best: Option<(usize, Diagram)> = None;
                for (i, m) in moves.iter().enumerate() {
                    let v = match measure(&m.result_hydra, &m.result_labels) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            return None;
                        }
                    };
                    if best.as_ref().is_none_or(|(_, b)| compare(&v, b).is_lt()) {
                        best = Some((i, v));
                    }
                }
                best.map(|b| b.0)
            })?;
            match failure {
                Some(e) => Err(e.into()),
                None => Ok(trace),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse_hydra;
    use crate::verify::strictly_decreasing;

    fn h(s: &str) -> Hydra {
        parse_hydra(s).unwrap()
    }

    fn cfg() -> MoveConfig {
        MoveConfig::default()
    }

    #[test]
    fn tree_of_zero_is_a_single_root() {
        let t = build_tree(&Hydra::Zero, &LabelSet::new(), 100, cfg()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.root().move_count, Some(0));
        assert!(!t.truncated);
    }

    #[test]
    fn tree_of_one_has_one_terminal_child() {
        let t = build_tree(&Hydra::One, &LabelSet::new(), 100, cfg()).unwrap();
        assert_eq!(t.root().children, vec![1]);
        assert_eq!(t.nodes[1].hydra, Hydra::Zero);
        assert_eq!(t.nodes[1].move_count, Some(0));
        assert_eq!(t.address(1), vec![0]);
    }

    #[test]
    fn tree_of_two_units_has_height_two() {
        let t = build_tree(&h("1+1"), &LabelSet::new(), 100, cfg()).unwrap();
        assert_eq!(t.height(), 2);
        assert!(!t.truncated);
    }

    #[test]
    fn child_counts_match_enumeration() {
        let t = build_tree(&h("w(1)+1"), &LabelSet::new(), 500, cfg()).unwrap();
        for n in &t.nodes {
            if let Some(c) = n.move_count {
                if !t.truncated {
                    assert_eq!(c, n.children.len());
                }
                let expect = enumerate_moves_with(&n.hydra, &n.labels, n.level, cfg()).unwrap();
                assert_eq!(c, expect.len());
            }
        }
    }

    #[test]
    fn tree_budget_truncates() {
        let t = build_tree(&h("w(1+1)"), &LabelSet::new(), 5, cfg()).unwrap();
        assert!(t.truncated);
        assert_eq!(t.nodes.len(), 5);
    }

    #[test]
    fn small_heights() {
        let lb = LabelSet::new();
        assert_eq!(game_height(&Hydra::Zero, &lb, 10, cfg()).unwrap(), Height::Exact(0));
        assert_eq!(game_height(&Hydra::One, &lb, 10, cfg()).unwrap(), Height::Exact(1));
        assert_eq!(game_height(&h("1+1"), &lb, 100, cfg()).unwrap(), Height::Exact(2));
        assert_eq!(Height::Exact(2).to_string(), "Exact 2");
    }

    #[test]
    fn height_budget_gives_lower_bound() {
        let lb = LabelSet::new();
        let full = game_height(&h("w(1)"), &lb, 100_000, cfg()).unwrap();
        let cut = game_height(&h("w(1)"), &lb, 3, cfg()).unwrap();
        assert!(matches!(cut, Height::AtLeast(n) if n >= 1 && n <= full.value()));
    }

    #[test]
    fn height_agrees_with_tree() {
        let lb = LabelSet::new();
        for src in ["1+1+1", "2*1", "w(0)+1", "{mu}(1)"] {
            let t = build_tree(&h(src), &lb, 100_000, cfg()).unwrap();
            assert!(!t.truncated, "{src}");
            assert_eq!(game_height(&h(src), &lb, 100_000, cfg()).unwrap(), Height::Exact(t.height()), "{src}");
        }
    }

    #[test]
    fn plays() {
        let lb = LabelSet::new();
        let t = play(&Hydra::Zero, &lb, Strategy::First, 10, cfg()).unwrap();
        assert_eq!(t.steps.len(), 1);
        for seed in 0..5 {
            let t = play(&Hydra::One, &lb, Strategy::Random { seed }, 10, cfg()).unwrap();
            assert_eq!(t.steps.len(), 2);
            assert_eq!(t.last().rule, Some(Rule::Necrosis));
        }
    }

    #[test]
    fn random_play_is_reproducible_and_decreasing() {
        let lb = LabelSet::new();
        let start = h("D{}(w(1)+1)");
        let a = play(&start, &lb, Strategy::Random { seed: 9 }, 1000, cfg()).unwrap();
        let b = play(&start, &lb, Strategy::Random { seed: 9 }, 1000, cfg()).unwrap();
        assert_eq!(a, b);
        assert!(!a.budget_exhausted);
        assert!(strictly_decreasing(&a.measures().unwrap()));
    }

    #[test]
    fn max_drop_picks_least_measure() {
        let lb = LabelSet::new();
        let t = play(&h("1+1+1"), &lb, Strategy::MaxMeasureDrop, 10, cfg()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.last().hydra, Hydra::Zero);
    }

    #[test]
    fn step_budget_is_reported() {
        let lb = LabelSet::new();
        let t = play(&h("1+1+1"), &lb, Strategy::First, 0, cfg()).unwrap();
        assert!(t.budget_exhausted);
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn state_apply_and_validate() {
        let s = GameState::new(h("1+1"), LabelSet::new()).unwrap();
        let moves = s.moves(cfg()).unwrap();
        let next = s.apply_index(moves.len() - 1, cfg()).unwrap();
        assert_eq!(next.level, 1);
        assert_eq!(next.history.len(), 1);
        next.validate().unwrap();
        assert!(compare(&next.measure().unwrap(), &s.measure().unwrap()).is_lt());
        assert!(matches!(
            s.apply_index(99, cfg()),
            Err(GameError::Index { index: 99, .. })
        ));
    }

    #[test]
    fn documents_round_trip() {
        let s = GameState::new(h("w(1)+1"), LabelSet::new()).unwrap();
        let s = s.apply_index(0, cfg()).unwrap();
        assert_eq!(GameState::from_document(&s.to_document()).unwrap(), s);
        let t = build_tree(&h("1+1"), &LabelSet::new(), 50, cfg()).unwrap();
        assert_eq!(GameTree::from_document(&t.to_document()).unwrap(), t);
        let tr = play(&h("w(0)+1"), &LabelSet::new(), Strategy::First, 50, cfg()).unwrap();
        assert_eq!(Trace::from_document(&tr.to_document()).unwrap(), tr);
        let ml = MoveList::new(&h("1+1"), &LabelSet::new(), 2, cfg()).unwrap();
        assert_eq!(MoveList::from_document(&ml.to_document()).unwrap(), ml);
        let mv = &ml.moves[0];
        assert_eq!(&Move::from_document(&mv.to_document()).unwrap(), mv);
    }

    #[test]
    fn dot_export() {
        let t = build_tree(&Hydra::One, &LabelSet::new(), 10, cfg()).unwrap();
        let dot = t.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("n0 -> n1 [label=\"Necrosis\"]"));
        assert_eq!(truncate(&"x".repeat(100), 80).chars().count(), 80);
    }
}
