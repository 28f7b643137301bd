//! The move relation `(H, lb) →_ℓ (K, lb′)`.
//!
//! Root rules match at the top of a hydra; [`enumerate_context_moves`] lifts
//! them through `ω`, `φ`, sums and (for label-preserving moves) `D`. Every
//! enumeration is deterministic: moves are sorted by rule, path and
//! parameters, and moves leading to the same `(K, lb′)` are merged.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::cell::RefCell;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{o_hydra, o_label, o_labelset, AssignError, LabelRef};
use crate::diagram::{compare, Diagram};
use crate::hydra::{Head, Hydra, Label, LabelSet, Leaf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error("{count} moves exceed the bound {bound}")]
    Overflow { count: usize, bound: u128 },
    #[error("move is not in the current enumeration")]
    NotEnumerated,
}

/// Rule identifiers, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Necrosis,
    StarStep,
    SuccessorSpread,
    DUnfold,
    PhiUnfold,
    BraceChoose,
    BraceExtract,
    ProductionMu,
    ProductionB,
    UnderD,
    Congruence,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Necrosis => "Necrosis",
            Rule::StarStep => "StarStep",
            Rule::SuccessorSpread => "SuccessorSpread",
            Rule::DUnfold => "DUnfold",
            Rule::PhiUnfold => "PhiUnfold",
            Rule::BraceChoose => "BraceChoose",
            Rule::BraceExtract => "BraceExtract",
            Rule::ProductionMu => "ProductionMu",
            Rule::ProductionB => "ProductionB",
            Rule::UnderD => "UnderD",
            Rule::Congruence => "Congruence",
        }
    }

    pub fn is_production(self) -> bool {
        matches!(self, Rule::ProductionMu | Rule::ProductionB)
    }
}

/// One step from a node to a child position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStep {
    /// The `i`-th summand.
    Summand(usize),
    /// The sum of summands `j..`, for `j ≥ 1` and at least two of them.
    Tail(usize),
    Omega,
    Phi,
    UnderD,
}

/// The free choices a rule made.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<LabelRef>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<LabelRef>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<LabelRef>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set: Option<LabelSet>,
    /// Summand index of the matched brace.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub position: Option<usize>,
    /// Path from the redex to the hole of a production context.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hole: Option<Vec<PathStep>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub swapped: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    /// The clause licensing the whole move: `Congruence`/`UnderD` when lifted.
    pub rule: Rule,
    /// The root rule applied at the end of `path`.
    pub redex: Rule,
    pub path: Vec<PathStep>,
    pub params: Params,
    pub result_hydra: Hydra,
    pub result_labels: LabelSet,
    /// The label added by a production, if it was new.
    pub produced: Option<Label>,
}

impl Move {
    pub fn result(&self) -> (&Hydra, &LabelSet) {
        (&self.result_hydra, &self.result_labels)
    }

    fn key(&self) -> (Rule, Rule, &[PathStep], &Params, &Hydra, &LabelSet) {
        (
            self.rule,
            self.redex,
            &self.path,
            &self.params,
            &self.result_hydra,
            &self.result_labels,
        )
    }
}

/// Which right-hand side `D_C(K+{B}(H)) → {B}(D_?(K+H)·2)` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BraceDVariant {
    /// `D_{C∪{B}}`
    #[default]
    Extended,
    /// `D_C`
    Plain,
}

/// Reading of the guard `A ≤ C` of the D-unfold rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnfoldGuard {
    /// `o(A) ≤ o(C₁)#…#o(C_k)`
    #[default]
    NaturalSum,
    /// some `C ∈ C` with `A ≤ C`
    Member,
}

/// Which contexts `e(*)` the production-by-context rule accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextGuard {
    /// every summand beside the hole, at any depth, is below `{B}(H)`
    #[default]
    Dominated,
    /// only the φ-frame conditions
    Unrestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveConfig {
    pub brace_d: BraceDVariant,
    pub unfold_guard: UnfoldGuard,
    pub context_guard: ContextGuard,
    /// Hard cap on the number of moves of one position.
    pub max_moves: usize,
}

impl Default for MoveConfig {
    fn default() -> Self {
        MoveConfig {
            brace_d: BraceDVariant::default(),
            unfold_guard: UnfoldGuard::default(),
            context_guard: ContextGuard::default(),
            max_moves: 1_000_000,
        }
    }
}

/// A computable bound on `|enumerate_moves(h, lb, level)|`.
pub fn move_bound(h: &Hydra, lb: &LabelSet, level: u64) -> u128 {
    let s = h.size() as u128 + 1;
    let l = lb.len() as u128 + 2;
    let lv = level as u128 + 2;
    let subsets = 1u128.checked_shl(lb.len() as u32 + 1).unwrap_or(u128::MAX);
    2u128
        .saturating_mul(s)
        .saturating_mul(s)
        .saturating_mul(l * l)
        .saturating_mul(lv * lv)
        .saturating_mul(subsets)
}

/// A hydra with one position marked as a hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub host: Hydra,
    pub path: Vec<PathStep>,
}

impl Context {
    pub fn plug(&self, x: Hydra) -> Hydra {
        replace_at(&self.host, &self.path, x)
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }
}

/// Replaces the subterm at `path` by `x`, re-normalizing sums on the way.
pub fn replace_at(h: &Hydra, path: &[PathStep], x: Hydra) -> Hydra {
    let Some((step, rest)) = path.split_first() else {
        return x;
    };
    match (step, h) {
        (PathStep::Summand(i), Hydra::Sum(ps)) => {
            let inner = replace_at(&ps[*i], rest, x);
            let mut parts = ps.clone();
            parts[*i] = inner;
            Hydra::sum(parts)
        }
        (PathStep::Tail(j), Hydra::Sum(ps)) => {
            let tail = Hydra::Sum(ps[*j..].to_vec());
            let inner = replace_at(&tail, rest, x);
            Hydra::sum(ps[..*j].iter().cloned().chain([inner]))
        }
        (PathStep::Omega, Hydra::Omega(b)) => Hydra::omega(replace_at(b, rest, x)),
        (PathStep::Phi, Hydra::Phi(cs, n, b)) => Hydra::phi(cs.clone(), *n, replace_at(b, rest, x)),
        (PathStep::UnderD, Hydra::D(cs, b)) => Hydra::d(cs.clone(), replace_at(b, rest, x)),
        _ => panic!("path step {step:?} does not match {h}"),
    }
}

/// The subterm at `path`.
pub fn subterm_at(h: &Hydra, path: &[PathStep]) -> Option<Hydra> {
    let Some((step, rest)) = path.split_first() else {
        return Some(h.clone());
    };
    match (step, h) {
        (PathStep::Summand(i), Hydra::Sum(ps)) => subterm_at(ps.get(*i)?, rest),
        (PathStep::Tail(j), Hydra::Sum(ps)) if *j >= 1 && ps.len() - *j >= 2 => {
            subterm_at(&Hydra::Sum(ps[*j..].to_vec()), rest)
        }
        (PathStep::Omega, Hydra::Omega(b))
        | (PathStep::Phi, Hydra::Phi(_, _, b))
        | (PathStep::UnderD, Hydra::D(_, b)) => subterm_at(b, rest),
        _ => None,
    }
}

struct Env<'a> {
    lb: &'a LabelSet,
    level: u64,
    config: MoveConfig,
    values: RefCell<BTreeMap<Label, Diagram>>,
}

/// A move before sorting: path is relative to the hydra it was found in.
struct Raw {
    redex: Rule,
    path: Vec<PathStep>,
    params: Params,
    hydra: Hydra,
    labels: LabelSet,
}

impl<'a> Env<'a> {
    fn new(lb: &'a LabelSet, level: u64, config: MoveConfig) -> Self {
        Env {
            lb,
            level,
            config,
            values: RefCell::new(BTreeMap::new()),
        }
    }

    fn value(&self, a: &Label) -> Result<Diagram, AssignError> {
        if let Some(v) = self.values.borrow().get(a) {
            return Ok(v.clone());
        }
        let v = o_label(a)?;
        self.values.borrow_mut().insert(a.clone(), v.clone());
        Ok(v)
    }

    fn ref_value(&self, a: &LabelRef) -> Result<Diagram, AssignError> {
        match a {
            LabelRef::Label(l) => self.value(l),
            other => other.value(),
        }
    }

    fn plain(&self, redex: Rule, params: Params, hydra: Hydra) -> Raw {
        Raw {
            redex,
            path: Vec::new(),
            params,
            hydra,
            labels: self.lb.clone(),
        }
    }

    fn root(&self, h: &Hydra) -> Result<Vec<Raw>, MoveError> {
        let mut out = Vec::new();
        self.necrosis(h, &mut out)?;
        self.star_step(h, &mut out)?;
        self.successor_spread(h, &mut out);
        self.d_unfold(h, &mut out)?;
        self.phi_unfold(h, &mut out)?;
        self.brace_choose(h, &mut out);
        self.brace_extract(h, &mut out)?;
        self.production_mu(h, &mut out)?;
        self.production_b(h, &mut out)?;
        Ok(out)
    }

    fn necrosis(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        if *h == Hydra::Zero {
            return Ok(());
        }
        out.push(self.plain(Rule::Necrosis, Params::default(), Hydra::Zero));
        // `→ 1` needs a strict drop, so it is skipped when o(h) = 1 already
        if *h != Hydra::One && o_hydra(h)? != Diagram::One {
            out.push(self.plain(Rule::Necrosis, Params::default(), Hydra::One));
        }
        if let Hydra::Brace(Head::Mu, body) = h {
            out.push(self.plain(Rule::Necrosis, Params::default(), (**body).clone()));
        }
        Ok(())
    }

    fn star_step(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        let Hydra::Scaled(n, leaf) = h else {
            return Ok(());
        };
        let n = *n;
        let relabel = |a: &Label| Hydra::scaled(n, Leaf::Label(a.clone())).add_units(n);
        let with_a = |a: &Label| Params {
            a: Some(LabelRef::Label(a.clone())),
            ..Params::default()
        };
        match leaf {
            Leaf::StarMu => {
                for a in self.lb {
                    out.push(self.plain(Rule::StarStep, with_a(a), relabel(a)));
                }
            }
            Leaf::Label(b) => {
                let vb = self.value(b)?;
                for a in self.lb {
                    if compare(&self.value(a)?, &vb) == Ordering::Less {
                        out.push(self.plain(Rule::StarStep, with_a(a), relabel(a)));
                    }
                }
            }
            Leaf::StarOmega => {
                for m in 1..=self.level {
                    let params = Params {
                        m: Some(m),
                        ..Params::default()
                    };
                    out.push(self.plain(Rule::StarStep, params, Hydra::scaled(n, Leaf::Nat(m))));
                }
            }
            Leaf::Nat(m) => {
                let result = if *m >= 2 {
                    Hydra::scaled(n, Leaf::Nat(m - 1)).add_units(n - 1)
                } else {
                    Hydra::Zero.add_units(n - 1)
                };
                out.push(self.plain(Rule::StarStep, Params::default(), result));
            }
        }
        Ok(())
    }

    /// `d(H+1) → d(H)·k`.
    fn successor_spread(&self, h: &Hydra, out: &mut Vec<Raw>) {
        let rebuild: Box<dyn Fn(Hydra) -> Hydra> = match h {
            Hydra::Omega(_) => Box::new(Hydra::omega),
            Hydra::D(cs, _) => {
                let cs = cs.clone();
                Box::new(move |x| Hydra::d(cs.clone(), x))
            }
            Hydra::Phi(cs, n, _) if cs.len() == 1 && *n <= self.level => {
                let (cs, n) = (cs.clone(), *n);
                Box::new(move |x| Hydra::phi(cs.clone(), n, x))
            }
            _ => return,
        };
        let Some(pred) = body(h).strip_unit() else {
            return;
        };
        let unit = rebuild(pred);
        for k in 1..=self.level + 1 {
            let params = Params {
                k: Some(k),
                ..Params::default()
            };
            out.push(self.plain(Rule::SuccessorSpread, params, unit.times(k)));
        }
    }

    /// `D_C(H+1) → φ_{A+n}(D_C(H)·2)`.
    fn d_unfold(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        let Hydra::D(cs, b) = h else {
            return Ok(());
        };
        let Some(pred) = b.strip_unit() else {
            return Ok(());
        };
        let doubled = Hydra::d(cs.clone(), pred).times(2);
        let csum = o_labelset(cs)?;
        for a in self.lb {
            let va = self.value(a)?;
            let admitted = match self.config.unfold_guard {
                UnfoldGuard::NaturalSum => compare(&va, &csum) != Ordering::Greater,
                UnfoldGuard::Member => {
                    let mut any = false;
                    for c in cs {
                        if compare(&va, &self.value(c)?) != Ordering::Greater {
                            any = true;
                            break;
                        }
                    }
                    any
                }
            };
            if !admitted {
                continue;
            }
            for n in 0..=self.level {
                let params = Params {
                    n: Some(n),
                    a: Some(LabelRef::Label(a.clone())),
                    ..Params::default()
                };
                let result = Hydra::phi(LabelSet::singleton(a.clone()), n, doubled.clone());
                out.push(self.plain(Rule::DUnfold, params, result));
            }
        }
        Ok(())
    }

    /// `φ_{C+n}(H+1) → φ_{A+m}(φ_{C+n}(H) + φ_B(H))` and the swapped sum.
    fn phi_unfold(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        let Hydra::Phi(cs, n, b) = h else {
            return Ok(());
        };
        let (Some(c), Some(pred)) = (cs.as_single(), b.strip_unit()) else {
            return Ok(());
        };
        let vc = self.value(c)?;
        let cref = LabelRef::Label(c.clone());
        let below_c: LabelSet = {
            let mut s = LabelSet::new();
            for x in self.lb {
                if compare(&self.value(x)?, &vc) == Ordering::Less {
                    s.insert(x.clone());
                }
            }
            s
        };
        let kept = Hydra::phi(cs.clone(), *n, pred.clone());
        let subsets = below_c.subsets();
        for a in self.lb {
            let aref = LabelRef::Label(a.clone());
            for m in 0..=self.level {
                if !shifted_lt(self, &aref, m, &cref, *n)? {
                    continue;
                }
                for bs in &subsets {
                    let other = Hydra::phi(bs.clone(), 0, pred.clone());
                    for swapped in [false, true] {
                        let inner = if swapped {
                            Hydra::sum([other.clone(), kept.clone()])
                        } else {
                            Hydra::sum([kept.clone(), other.clone()])
                        };
                        let params = Params {
                            m: Some(m),
                            a: Some(aref.clone()),
                            set: Some(bs.clone()),
                            swapped: Some(swapped),
                            ..Params::default()
                        };
                        let result = Hydra::phi(LabelSet::singleton(a.clone()), m, inner);
                        out.push(self.plain(Rule::PhiUnfold, params, result));
                    }
                }
            }
        }
        Ok(())
    }

    /// `{*_μ}(H) → {A}(H)`.
    fn brace_choose(&self, h: &Hydra, out: &mut Vec<Raw>) {
        let Hydra::Brace(Head::StarMu, b) = h else {
            return;
        };
        for a in self.lb {
            let params = Params {
                a: Some(LabelRef::Label(a.clone())),
                ..Params::default()
            };
            let result = Hydra::brace(Head::Label(a.clone()), (**b).clone());
            out.push(self.plain(Rule::BraceChoose, params, result));
        }
    }

    /// `d(K+{B}(H)) → {B}(d(K+H)·2)`.
    fn brace_extract(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        let parts = match h {
            Hydra::Omega(b) | Hydra::Phi(_, _, b) | Hydra::D(_, b) => b.parts(),
            _ => return Ok(()),
        };
        for (i, part) in parts.iter().enumerate() {
            let Hydra::Brace(head, inner) = part else {
                continue;
            };
            let spliced = splice(parts, i, (**inner).clone());
            let (b_ref, rebuilt) = match (h, head) {
                (Hydra::Omega(_), Head::Mu) => (LabelRef::Mu, Hydra::omega(spliced)),
                (Hydra::Omega(_), Head::Label(bl)) if bl.is_regular() => {
                    (LabelRef::Label(bl.clone()), Hydra::omega(spliced))
                }
                (Hydra::Phi(cs, n, _), Head::Label(bl)) if bl.is_regular() => {
                    let Some(a) = cs.as_single() else { continue };
                    if *n == 0 || *n > self.level {
                        continue;
                    }
                    if compare(&self.value(bl)?, &self.value(a)?) == Ordering::Greater {
                        continue;
                    }
                    (LabelRef::Label(bl.clone()), Hydra::phi(cs.clone(), *n, spliced))
                }
                (Hydra::D(cs, _), Head::Label(bl)) => {
                    let cs = match self.config.brace_d {
                        BraceDVariant::Extended => cs.with(bl.clone()),
                        BraceDVariant::Plain => cs.clone(),
                    };
                    (LabelRef::Label(bl.clone()), Hydra::d(cs, spliced))
                }
                _ => continue,
            };
            let head = match &b_ref {
                LabelRef::Label(bl) => Head::Label(bl.clone()),
                _ => Head::Mu,
            };
            let params = Params {
                b: Some(b_ref),
                position: Some(i),
                ..Params::default()
            };
            out.push(self.plain(Rule::BraceExtract, params, Hydra::brace(head, rebuilt.times(2))));
        }
        Ok(())
    }

    /// `D(C;K+{μ}(H)) → φ_{A+n}(D(C∪{A};K+H)·2)` with `A = d_μ(K+{B}(H))`.
    fn production_mu(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        let Hydra::D(cs, b) = h else {
            return Ok(());
        };
        let parts = b.parts();
        let mut eta = None;
        for (i, part) in parts.iter().enumerate() {
            let Hydra::Brace(Head::Mu, inner) = part else {
                continue;
            };
            let eta = match &eta {
                Some(v) => v,
                None => eta.insert(o_hydra(h)?),
            };
            let spliced = splice(parts, i, (**inner).clone());
            let choices = std::iter::once(LabelRef::Zero).chain(self.lb.iter().cloned().map(LabelRef::Label));
            for b_ref in choices {
                if compare(&self.ref_value(&b_ref)?, eta) != Ordering::Less {
                    continue;
                }
                // `{0}(H)` reads as `1+H`, which has the same ordinal
                let braced = match &b_ref {
                    LabelRef::Label(bl) => Hydra::brace(Head::Label(bl.clone()), (**inner).clone()),
                    _ => Hydra::sum([Hydra::One, (**inner).clone()]),
                };
                let a = Label::dmu(splice(parts, i, braced));
                if a.check().is_err() {
                    continue;
                }
                let body = Hydra::d(cs.with(a.clone()), spliced.clone()).times(2);
                for n in 0..=self.level {
                    let params = Params {
                        n: Some(n),
                        a: Some(LabelRef::Label(a.clone())),
                        b: Some(b_ref.clone()),
                        position: Some(i),
                        ..Params::default()
                    };
                    out.push(Raw {
                        redex: Rule::ProductionMu,
                        path: Vec::new(),
                        params,
                        hydra: Hydra::phi(LabelSet::singleton(a.clone()), n, body.clone()),
                        labels: self.lb.with(a.clone()),
                    });
                }
            }
        }
        Ok(())
    }

    /// `e({B}(H)) → φ_{A+n}(φ_A(e(H))·2)` with `A = d_B({C}(e(H)))`.
    fn production_b(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        for (b, ctx, inner) in self.contexts(h)? {
            let Label::DMu(h0) = &b else { unreachable!("contexts yield regular heads") };
            let vb = self.value(&b)?;
            let e_h = ctx.plug(inner);
            if !e_h.in_h1() {
                continue;
            }
            let choices = std::iter::once(LabelRef::Zero).chain(self.lb.iter().cloned().map(LabelRef::Label));
            for c_ref in choices {
                if compare(&self.ref_value(&c_ref)?, &vb) != Ordering::Less {
                    continue;
                }
                // `{0}(e(H))` is taken as `e(H)` itself
                let arg = match &c_ref {
                    LabelRef::Label(cl) => Hydra::brace(Head::Label(cl.clone()), e_h.clone()),
                    _ => e_h.clone(),
                };
                let a = Label::dsub((**h0).clone(), arg);
                if a.check().is_err() {
                    continue;
                }
                let single = LabelSet::singleton(a.clone());
                let body = Hydra::phi(single.clone(), 0, e_h.clone()).times(2);
                for n in 0..=self.level {
                    let params = Params {
                        n: Some(n),
                        a: Some(LabelRef::Label(a.clone())),
                        b: Some(LabelRef::Label(b.clone())),
                        c: Some(c_ref.clone()),
                        hole: Some(ctx.path.clone()),
                        ..Params::default()
                    };
                    out.push(Raw {
                        redex: Rule::ProductionB,
                        path: Vec::new(),
                        params,
                        hydra: Hydra::phi(single.clone(), n, body.clone()),
                        labels: self.lb.with(a.clone()),
                    });
                }
            }
        }
        Ok(())
    }

    /// All `h = e({B}(inner))` with `R(B)`, `B ∈ L`, `inner ∈ H₁` and every
    /// φ-frame of `e` drawn from `lb` and below `B`.
    fn contexts(&self, h: &Hydra) -> Result<Vec<(Label, Context, Hydra)>, MoveError> {
        let mut found = Vec::new();
        let mut frames = Vec::new();
        let mut path = Vec::new();
        let mut siblings = Vec::new();
        collect_holes(h, &mut path, &mut frames, &mut siblings, &mut found);
        let mut out = Vec::new();
        'next: for Hole { b, path, frames: frame_sets, siblings, inner } in found {
            let vb = self.value(&b)?;
            if self.config.context_guard == ContextGuard::Dominated && !siblings.is_empty() {
                let top = o_hydra(&Hydra::brace(Head::Label(b.clone()), inner.clone()))?;
                for k in &siblings {
                    if compare(&o_hydra(k)?, &top) != Ordering::Less {
                        continue 'next;
                    }
                }
            }
            for cs in &frame_sets {
                if !cs.is_subset(self.lb) {
                    continue 'next;
                }
                for c in cs {
                    if compare(&self.value(c)?, &vb) != Ordering::Less {
                        continue 'next;
                    }
                }
            }
            out.push((
                b,
                Context {
                    host: h.clone(),
                    path,
                },
                inner,
            ));
        }
        Ok(out)
    }

    fn all(&self, h: &Hydra) -> Result<Vec<Raw>, MoveError> {
        let mut out = self.root(h)?;
        self.lifted(h, &mut out)?;
        Ok(out)
    }

    fn lifted(&self, h: &Hydra, out: &mut Vec<Raw>) -> Result<(), MoveError> {
        match h {
            Hydra::Sum(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    for raw in self.all(p)? {
                        out.push(wrap(raw, PathStep::Summand(i), |k| {
                            let mut parts = ps.clone();
                            parts[i] = k;
                            Hydra::sum(parts)
                        }));
                    }
                }
                for j in 1..ps.len().saturating_sub(1) {
                    let tail = Hydra::Sum(ps[j..].to_vec());
                    for raw in self.root(&tail)? {
                        out.push(wrap(raw, PathStep::Tail(j), |k| {
                            Hydra::sum(ps[..j].iter().cloned().chain([k]))
                        }));
                    }
                }
            }
            Hydra::Omega(b) => {
                for raw in self.all(b)? {
                    out.push(wrap(raw, PathStep::Omega, Hydra::omega));
                }
            }
            Hydra::Phi(cs, n, b) if (cs.len() == 1 && *n <= self.level) || *n == 0 => {
                for raw in self.all(b)? {
                    out.push(wrap(raw, PathStep::Phi, |k| Hydra::phi(cs.clone(), *n, k)));
                }
            }
            Hydra::D(cs, b) => {
                let bound = o_hydra(h)?;
                for a in self.lb {
                    if compare(&self.value(a)?, &bound) != Ordering::Less {
                        return Ok(());
                    }
                }
                for raw in self.all(b)? {
                    if raw.labels == *self.lb {
                        out.push(wrap(raw, PathStep::UnderD, |k| Hydra::d(cs.clone(), k)));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn shifted_lt(env: &Env, a: &LabelRef, n: u64, b: &LabelRef, m: u64) -> Result<bool, AssignError> {
    let x = crate::diagram::natural_sum(&env.ref_value(a)?, &Diagram::nat(n));
    let y = crate::diagram::natural_sum(&env.ref_value(b)?, &Diagram::nat(m));
    Ok(compare(&x, &y) == Ordering::Less)
}

fn body(h: &Hydra) -> &Hydra {
    match h {
        Hydra::Omega(b) | Hydra::D(_, b) | Hydra::Phi(_, _, b) | Hydra::Brace(_, b) => b,
        other => other,
    }
}

/// `parts` with the `i`-th summand replaced by `x`.
fn splice(parts: &[Hydra], i: usize, x: Hydra) -> Hydra {
    Hydra::sum(
        parts[..i]
            .iter()
            .cloned()
            .chain([x])
            .chain(parts[i + 1..].iter().cloned()),
    )
}

fn wrap(mut raw: Raw, step: PathStep, rebuild: impl FnOnce(Hydra) -> Hydra) -> Raw {
    raw.path.insert(0, step);
    raw.hydra = rebuild(raw.hydra);
    raw
}

struct Hole {
    b: Label,
    path: Vec<PathStep>,
    frames: Vec<LabelSet>,
    siblings: Vec<Hydra>,
    inner: Hydra,
}

fn collect_holes(
    h: &Hydra,
    path: &mut Vec<PathStep>,
    frames: &mut Vec<LabelSet>,
    siblings: &mut Vec<Hydra>,
    out: &mut Vec<Hole>,
) {
    match h {
        Hydra::Brace(Head::Label(b), inner) if b.is_regular() && inner.in_h1() => {
            out.push(Hole {
                b: b.clone(),
                path: path.clone(),
                frames: frames.clone(),
                siblings: siblings.clone(),
                inner: (**inner).clone(),
            });
        }
        Hydra::Sum(ps) => {
            for (i, p) in ps.iter().enumerate() {
                let mark = siblings.len();
                siblings.extend(ps.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, k)| k.clone()));
                path.push(PathStep::Summand(i));
                collect_holes(p, path, frames, siblings, out);
                path.pop();
                siblings.truncate(mark);
            }
        }
        Hydra::Phi(cs, n, b) if cs.len() == 1 || *n == 0 => {
            path.push(PathStep::Phi);
            frames.push(cs.clone());
            collect_holes(b, path, frames, siblings, out);
            frames.pop();
            path.pop();
        }
        _ => {}
    }
}

fn finish(raws: Vec<Raw>, lb: &LabelSet, bound: u128, cap: usize) -> Result<Vec<Move>, MoveError> {
    let mut moves: Vec<Move> = raws
        .into_iter()
        .filter(|r| r.hydra.is_valid())
        .map(|r| {
            let produced = r.labels.difference(lb).iter().next().cloned();
            let rule = match r.path.first() {
                None => r.redex,
                Some(PathStep::UnderD) => Rule::UnderD,
                Some(_) => Rule::Congruence,
            };
            Move {
                rule,
                redex: r.redex,
                path: r.path,
                params: r.params,
                result_hydra: r.hydra,
                result_labels: r.labels,
                produced,
            }
        })
        .collect();
    moves.sort_by(|a, b| a.key().cmp(&b.key()));
    let mut seen = BTreeSet::new();
    moves.retain(|m| seen.insert((m.result_hydra.clone(), m.result_labels.clone())));
    if moves.len() as u128 > bound || moves.len() > cap {
        return Err(MoveError::Overflow {
            count: moves.len(),
            bound: bound.min(cap as u128),
        });
    }
    Ok(moves)
}

/// Moves whose redex is the root of `h`.
pub fn enumerate_root_moves(h: &Hydra, lb: &LabelSet, level: u64) -> Result<Vec<Move>, MoveError> {
    enumerate_root_moves_with(h, lb, level, MoveConfig::default())
}

pub fn enumerate_root_moves_with(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    config: MoveConfig,
) -> Result<Vec<Move>, MoveError> {
    let env = Env::new(lb, level, config);
    finish(env.root(h)?, lb, move_bound(h, lb, level), config.max_moves)
}

/// Root moves lifted through `ω`, `φ`, sums and `D`.
pub fn enumerate_context_moves(h: &Hydra, lb: &LabelSet, level: u64) -> Result<Vec<Move>, MoveError> {
    enumerate_context_moves_with(h, lb, level, MoveConfig::default())
}

pub fn enumerate_context_moves_with(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    config: MoveConfig,
) -> Result<Vec<Move>, MoveError> {
    let env = Env::new(lb, level, config);
    let mut raws = Vec::new();
    env.lifted(h, &mut raws)?;
    finish(raws, lb, move_bound(h, lb, level), config.max_moves)
}

/// Every move of `(h, lb)` at `level`, in the canonical order.
pub fn enumerate_moves(h: &Hydra, lb: &LabelSet, level: u64) -> Result<Vec<Move>, MoveError> {
    enumerate_moves_with(h, lb, level, MoveConfig::default())
}

pub fn enumerate_moves_with(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    config: MoveConfig,
) -> Result<Vec<Move>, MoveError> {
    let env = Env::new(lb, level, config);
    finish(env.all(h)?, lb, move_bound(h, lb, level), config.max_moves)
}

/// All ways to read `h` as `e({B}(inner))` for the given regular label `B`.
pub fn decompose_contexts(h: &Hydra, lb: &LabelSet, b: &Label) -> Result<Vec<(Context, Hydra)>, MoveError> {
    let env = Env::new(lb, 0, MoveConfig::default());
    Ok(env
        .contexts(h)?
        .into_iter()
        .filter(|(head, _, _)| head == b)
        .map(|(_, ctx, inner)| (ctx, inner))
        .collect())
}

/// Checks that `mv` is enumerated for `(h, lb)` at `level` and returns its result.
pub fn apply_move(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    mv: &Move,
) -> Result<(Hydra, LabelSet), MoveError> {
    apply_move_with(h, lb, level, mv, MoveConfig::default())
}

pub fn apply_move_with(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    mv: &Move,
    config: MoveConfig,
) -> Result<(Hydra, LabelSet), MoveError> {
    if enumerate_moves_with(h, lb, level, config)?.contains(mv) {
        Ok((mv.result_hydra.clone(), mv.result_labels.clone()))
    } else {
        Err(MoveError::NotEnumerated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub states: BTreeSet<(Hydra, LabelSet)>,
    pub truncated: bool,
}

/// States reachable by `→_ℓ*` at a fixed level, breadth first, up to `budget` states.
pub fn closure_reachable(
    h: &Hydra,
    lb: &LabelSet,
    level: u64,
    budget: usize,
) -> Result<Closure, MoveError> {
    let mut states = BTreeSet::new();
    let mut queue = VecDeque::new();
    let start = (h.clone(), lb.clone());
    states.insert(start.clone());
    queue.push_back(start);
    let mut truncated = false;
    while let Some((k, l)) = queue.pop_front() {
        for mv in enumerate_moves(&k, &l, level)? {
            let next = (mv.result_hydra, mv.result_labels);
            if states.contains(&next) {
                continue;
            }
            if states.len() >= budget {
                truncated = true;
                break;
            }
            states.insert(next.clone());
            queue.push_back(next);
        }
        if truncated {
            break;
        }
    }
    Ok(Closure { states, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_hydra, parse_labels};

    fn h(s: &str) -> Hydra {
        parse_hydra(s).unwrap()
    }

    fn results(h: &Hydra, lb: &LabelSet, level: u64) -> Vec<String> {
        enumerate_moves(h, lb, level)
            .unwrap()
            .into_iter()
            .map(|m| m.result_hydra.to_string())
            .collect()
    }

    fn has(h0: &str, lb: &str, level: u64, target: &str) -> bool {
        let lb = parse_labels(lb).unwrap();
        results(&h(h0), &lb, level).contains(&h(target).to_string())
    }

    #[test]
    fn zero_and_one() {
        let none = LabelSet::new();
        assert!(enumerate_moves(&Hydra::Zero, &none, 5).unwrap().is_empty());
        let ms = enumerate_moves(&Hydra::One, &none, 3).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].rule, Rule::Necrosis);
        assert_eq!(ms[0].result_hydra, Hydra::Zero);
    }

    #[test]
    fn star_omega_picks_numerals() {
        let rs = results(&h("1*sw"), &LabelSet::new(), 3);
        assert_eq!(rs, ["0", "1", "1*1", "1*2", "1*3"]);
    }

    #[test]
    fn numeral_steps() {
        assert!(has("2*3", "", 0, "2*2+1"));
        assert!(has("3*1", "", 0, "1+1"));
        assert!(has("1*1", "", 0, "0"));
        assert!(!has("1*1", "", 0, "1"));
    }

    #[test]
    fn necrosis_forms() {
        assert!(has("{mu}(w(0)+1)", "", 0, "w(0)+1"));
        assert!(has("w(1)", "", 0, "1"));
        assert!(!has("w(0)", "", 0, "1"));
    }

    #[test]
    fn successor_spread_examples() {
        assert!(has("w(1+1)", "", 1, "w(1)+w(1)"));
        assert!(!has("w(1+1)", "", 0, "w(1)+w(1)"));
        assert!(has("D{}(1+1)", "", 1, "D{}(1)+D{}(1)"));
        assert!(has("phi{dmu(0)}+1(1)", "", 1, "phi{dmu(0)}+1(0)+phi{dmu(0)}+1(0)"));
        assert!(!has("phi{dmu(0)}+2(1)", "", 1, "phi{dmu(0)}+2(0)+phi{dmu(0)}+2(0)"));
    }

    #[test]
    fn d_unfold_guard() {
        assert!(has("D{dmu(1)}(1)", "dmu(0)", 0, "phi{dmu(0)}+0(D{dmu(1)}(0)+D{dmu(1)}(0))"));
        assert!(!has("D{dmu(0)}(1)", "dmu(1)", 0, "phi{dmu(1)}+0(D{dmu(0)}(0)+D{dmu(0)}(0))"));
        assert!(!has("D{}(1)", "dmu(0)", 0, "phi{dmu(0)}+0(D{}(0)+D{}(0))"));
    }

    #[test]
    fn phi_unfold_both_orders() {
        let lb = "dmu(0)";
        let src = "phi{dmu(1)}+0(1)";
        assert!(has(src, lb, 0, "phi{dmu(0)}+0(phi{dmu(1)}+0(0)+phi{dmu(0)}+0(0))"));
        assert!(has(src, lb, 0, "phi{dmu(0)}+0(phi{dmu(0)}+0(0)+phi{dmu(1)}+0(0))"));
        // empty B: φ_∅(H) = H
        assert!(has(src, lb, 0, "phi{dmu(0)}+0(phi{dmu(1)}+0(0))"));
    }

    #[test]
    fn brace_choose_uses_pool() {
        assert!(has("{sm}(1)", "dmu(0)", 0, "{dmu(0)}(1)"));
        assert_eq!(results(&h("{sm}(1)"), &LabelSet::new(), 0), ["0", "1"]);
    }

    #[test]
    fn brace_extract_examples() {
        assert!(has("w({mu}(1))", "", 0, "{mu}(w(1)+w(1))"));
        assert!(has("D{}(1+{dmu(0)}(1))", "", 0, "{dmu(0)}(D{dmu(0)}(1+1)+D{dmu(0)}(1+1))"));
        let plain = MoveConfig {
            brace_d: BraceDVariant::Plain,
            ..MoveConfig::default()
        };
        let ms = enumerate_moves_with(&h("D{}({dmu(0)}(1))"), &LabelSet::new(), 0, plain).unwrap();
        assert!(ms
            .iter()
            .any(|m| m.result_hydra == h("{dmu(0)}(D{}(1)+D{}(1))")));
    }

    #[test]
    fn production_mu_adds_one_label() {
        let src = h("D{}({mu}(1))");
        let ms = enumerate_moves(&src, &LabelSet::new(), 0).unwrap();
        let prods: Vec<_> = ms.iter().filter(|m| m.rule == Rule::ProductionMu).collect();
        assert_eq!(prods.len(), 1);
        let a = Label::dmu(h("1+1"));
        assert_eq!(prods[0].produced, Some(a.clone()));
        assert_eq!(prods[0].result_labels, LabelSet::singleton(a));
        assert_eq!(
            prods[0].result_hydra.to_string(),
            "phi{dmu(1+1)}+0(D{dmu(1+1)}(1)+D{dmu(1+1)}(1))"
        );
    }

    #[test]
    fn production_b_through_contexts() {
        let src = h("1+{dmu(0)}(D{}(0))");
        let ms = enumerate_moves(&src, &LabelSet::new(), 0).unwrap();
        let prods: Vec<_> = ms.iter().filter(|m| m.redex == Rule::ProductionB).collect();
        assert!(!prods.is_empty());
        for m in prods {
            assert_eq!(m.result_labels.len(), 1);
        }
    }

    #[test]
    fn decompositions_respect_frames() {
        let b = Label::dmu(Hydra::One);
        let lb = parse_labels("dmu(0)").unwrap();
        let bare = h("{dmu(1)}(D{}(0))");
        let ds = decompose_contexts(&bare, &lb, &b).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(ds[0].0.is_empty());
        let in_sum = h("1+{dmu(1)}(D{}(0))");
        let ds = decompose_contexts(&in_sum, &lb, &b).unwrap();
        assert_eq!(ds[0].0.path, vec![PathStep::Summand(1)]);
        let low = h("phi{dmu(0)}+3({dmu(1)}(D{}(0)))");
        assert_eq!(decompose_contexts(&low, &lb, &b).unwrap().len(), 1);
        let high = h("phi{dmu(1+1)}+3({dmu(1)}(D{}(0)))");
        let lb_high = parse_labels("dmu(1+1)").unwrap();
        assert!(decompose_contexts(&high, &lb_high, &b).unwrap().is_empty());
        assert!(decompose_contexts(&low, &LabelSet::new(), &b).unwrap().is_empty());
    }

    #[test]
    fn congruence_lifts() {
        assert!(has("w(1)+1", "", 0, "w(1)"));
        assert!(has("w(1+1)", "", 0, "w(1)"));
        let ms = enumerate_moves(&h("w(1)+1"), &LabelSet::new(), 0).unwrap();
        let lifted = ms.iter().find(|m| m.result_hydra == h("w(1)")).unwrap();
        assert_eq!(lifted.rule, Rule::Congruence);
        assert_eq!(lifted.path, vec![PathStep::Summand(1)]);
    }

    #[test]
    fn producing_moves_are_not_lifted_under_d() {
        let src = h("D{}(w({mu}(1)))");
        for m in enumerate_moves(&src, &LabelSet::new(), 1).unwrap() {
            if m.rule == Rule::UnderD {
                assert!(m.produced.is_none());
            }
        }
        let body = h("1+{dmu(0)}(1)");
        let inner = enumerate_moves(&body, &LabelSet::new(), 0).unwrap();
        assert!(inner.iter().any(|m| m.produced.is_some()));
        let ms = enumerate_moves(&Hydra::d(LabelSet::new(), body), &LabelSet::new(), 0).unwrap();
        assert!(ms.iter().any(|m| m.rule == Rule::UnderD));
        assert!(ms.iter().all(|m| !(m.rule == Rule::UnderD && m.produced.is_some())));
    }

    #[test]
    fn under_d_guard_blocks_large_labels() {
        let src = h("D{}(1+1)");
        let big = parse_labels("dmu({mu}(0))").unwrap();
        let ms = enumerate_moves(&src, &big, 0).unwrap();
        assert!(ms.iter().all(|m| m.rule != Rule::UnderD));
        let ms = enumerate_moves(&src, &LabelSet::new(), 0).unwrap();
        assert!(ms.iter().any(|m| m.rule == Rule::UnderD));
    }

    #[test]
    fn enumeration_is_deterministic_and_bounded() {
        let src = h("D{dmu(0)}(w({sm}(1))+{mu}(1+1)+1)");
        let lb = parse_labels("dmu(0),dmu(1)").unwrap();
        let a = enumerate_moves(&src, &lb, 2).unwrap();
        let b = enumerate_moves(&src, &lb, 2).unwrap();
        assert_eq!(a, b);
        assert!((a.len() as u128) <= move_bound(&src, &lb, 2));
        let results: BTreeSet<_> = a.iter().map(|m| m.result()).collect();
        assert_eq!(results.len(), a.len());
        for m in &a {
            assert!(m.result_hydra.is_valid());
            assert!(lb.is_subset(&m.result_labels));
            assert!(m.result_labels.difference(&lb).len() <= 1);
        }
    }

    #[test]
    fn apply_checks_membership() {
        let none = LabelSet::new();
        let ms = enumerate_moves(&Hydra::One, &none, 0).unwrap();
        assert_eq!(apply_move(&Hydra::One, &none, 0, &ms[0]).unwrap(), (Hydra::Zero, none.clone()));
        let mut forged = ms[0].clone();
        forged.result_hydra = h("1+1");
        assert_eq!(
            apply_move(&Hydra::One, &none, 0, &forged),
            Err(MoveError::NotEnumerated)
        );
    }

    #[test]
    fn closure_examples() {
        let none = LabelSet::new();
        let c = closure_reachable(&Hydra::Zero, &none, 3, 10).unwrap();
        assert_eq!(c.states.len(), 1);
        assert!(!c.truncated);
        let c = closure_reachable(&Hydra::One, &none, 0, 10).unwrap();
        assert_eq!(c.states.len(), 2);
        let c = closure_reachable(&h("1+1+1+1"), &none, 0, 2).unwrap();
        assert!(c.truncated);
        assert_eq!(c.states.len(), 2);
    }
}
