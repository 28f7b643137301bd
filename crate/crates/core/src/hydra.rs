//! Hydra and label terms.
//!
//! Hydras and labels are defined by mutual recursion. A hydra lives in one
//! or both of the sorts `H₀`, `H₁`; the tree-shaped subsorts `T₀ ⊆ H₀` and
//! `T₁ ⊆ H₁` are the terms allowed as summands. Sums are ordered lists (the
//! tree is structured) and are kept flat and zero-free by [`Hydra::sum`].

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Constructor whose side condition a malformed term violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortClause {
    /// summands must all be in `T₀` or all in `T₁`, at least two, none zero or nested
    Sum,
    /// `n·x` needs `n, m > 0`
    Scaled,
    /// `ω(h)` needs `h ∈ H₀`
    Omega,
    /// `{μ}(h)` and `{*_μ}(h)` need `h ∈ H₀`
    Brace,
    /// `D(C;h)` needs `h ∈ H₀`
    D,
    /// `φ(C+n;h)` needs `h ∈ H₁` and `C ≠ ∅` unless `n > 0`
    Phi,
    /// `d_μ(h₀)` needs `h₀ ∈ H₀`, `d_{d_μ(h₀)}(h₁)` needs `h₁ ∈ H₁`
    Label,
}

impl fmt::Display for SortClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SortClause::Sum => "sum: summands must share a tree sort T0 or T1",
            SortClause::Scaled => "scaled leaf: multiplier and numeral must be positive",
            SortClause::Omega => "w(h): body must be in H0",
            SortClause::Brace => "{mu}(h)/{sm}(h): body must be in H0",
            SortClause::D => "D{C}(h): body must be in H0",
            SortClause::Phi => "phi{C}+n(h): body must be in H1 and C nonempty when n = 0",
            SortClause::Label => "label: dmu body must be in H0, dd second body in H1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sort violation in `{term}`: {clause}")]
pub struct SortError {
    pub clause: SortClause,
    pub term: String,
}

/// Sort membership flags. `t0` implies `h0`, `t1` implies `h1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sorts {
    pub h0: bool,
    pub h1: bool,
    pub t0: bool,
    pub t1: bool,
}

impl Sorts {
    const BOTH_H: Sorts = Sorts {
        h0: true,
        h1: true,
        t0: false,
        t1: false,
    };
    const ALL: Sorts = Sorts {
        h0: true,
        h1: true,
        t0: true,
        t1: true,
    };

    fn tree(t0: bool, t1: bool) -> Sorts {
        Sorts {
            h0: t0,
            h1: t1,
            t0,
            t1,
        }
    }
}

/// Leaf payload of `n·x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    /// A numeral `m > 0`.
    Nat(u64),
    /// `*_ω`
    StarOmega,
    /// `*_μ`
    StarMu,
    Label(Label),
}

/// Head of a brace node `{x}(h)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Mu,
    StarMu,
    Label(Label),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hydra {
    Zero,
    One,
    Sum(Vec<Hydra>),
    /// `n·x`
    Scaled(u64, Leaf),
    /// `ω(h)`
    Omega(Box<Hydra>),
    /// `{x}(h)`
    Brace(Head, Box<Hydra>),
    /// `D(C;h)`
    D(LabelSet, Box<Hydra>),
    /// `φ(C+n;h)`
    Phi(LabelSet, u64, Box<Hydra>),
}

/// A label: `d_μ(h₀)` or `d_{d_μ(h₀)}(h₁)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    DMu(Box<Hydra>),
    DSub(Box<Hydra>, Box<Hydra>),
}

impl Label {
    pub fn dmu(h0: Hydra) -> Label {
        Label::DMu(Box::new(h0))
    }

    pub fn dsub(h0: Hydra, h1: Hydra) -> Label {
        Label::DSub(Box::new(h0), Box::new(h1))
    }

    /// `R(A)`: the label is a `d_μ` label, usable as a collapsing subscript.
    pub fn is_regular(&self) -> bool {
        matches!(self, Label::DMu(_))
    }

    pub fn size(&self) -> usize {
        match self {
            Label::DMu(h) => 1 + h.size(),
            Label::DSub(h0, h1) => 1 + h0.size() + h1.size(),
        }
    }

    pub fn check(&self) -> Result<(), SortError> {
        let ok = match self {
            Label::DMu(h) => h.sort_of()?.h0,
            Label::DSub(h0, h1) => h0.sort_of()?.h0 && h1.sort_of()?.h1,
        };
        if ok {
            Ok(())
        } else {
            Err(SortError {
                clause: SortClause::Label,
                term: self.to_string(),
            })
        }
    }
}

/// A finite set of labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet(BTreeSet<Label>);

impl LabelSet {
    pub fn new() -> LabelSet {
        LabelSet(BTreeSet::new())
    }

    pub fn singleton(label: Label) -> LabelSet {
        LabelSet(BTreeSet::from([label]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains(label)
    }

    pub fn insert(&mut self, label: Label) -> bool {
        self.0.insert(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn with(&self, label: Label) -> LabelSet {
        let mut out = self.clone();
        out.insert(label);
        out
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn difference(&self, other: &LabelSet) -> LabelSet {
        LabelSet(self.0.difference(&other.0).cloned().collect())
    }

    /// The single member of a one-element set.
    pub fn as_single(&self) -> Option<&Label> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    /// All subsets, smallest first.
    pub fn subsets(&self) -> Vec<LabelSet> {
        let items: Vec<&Label> = self.0.iter().collect();
        let mut out: Vec<LabelSet> = (0u64..1 << items.len())
            .map(|mask| {
                items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, l)| (*l).clone())
                    .collect()
            })
            .collect();
        out.sort_by(|a: &LabelSet, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

impl FromIterator<Label> for LabelSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        LabelSet(iter.into_iter().collect())
    }
}

impl IntoIterator for LabelSet {
    type Item = Label;
    type IntoIter = std::collections::btree_set::IntoIter<Label>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = &'a Label;
    type IntoIter = std::collections::btree_set::Iter<'a, Label>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Hydra {
    /// Flattens nested sums and drops zero summands, keeping order.
    pub fn sum<I: IntoIterator<Item = Hydra>>(parts: I) -> Hydra {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Hydra::Zero => {}
                Hydra::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Hydra::Zero,
            1 => flat.pop().unwrap(),
            _ => Hydra::Sum(flat),
        }
    }

    pub fn scaled(n: u64, leaf: Leaf) -> Hydra {
        Hydra::Scaled(n, leaf)
    }

    pub fn omega(body: Hydra) -> Hydra {
        Hydra::Omega(Box::new(body))
    }

    pub fn brace(head: Head, body: Hydra) -> Hydra {
        Hydra::Brace(head, Box::new(body))
    }

    pub fn d(cs: LabelSet, body: Hydra) -> Hydra {
        Hydra::D(cs, Box::new(body))
    }

    /// `φ(C+n;h)`, with `φ(∅;h) = h`.
    pub fn phi(cs: LabelSet, n: u64, body: Hydra) -> Hydra {
        if cs.is_empty() && n == 0 {
            body
        } else {
            Hydra::Phi(cs, n, Box::new(body))
        }
    }

    /// `k` copies of `self` as a sum.
    pub fn times(&self, k: u64) -> Hydra {
        Hydra::sum((0..k).map(|_| self.clone()))
    }

    /// `H + n`: appends `n` unit summands.
    pub fn add_units(&self, n: u64) -> Hydra {
        Hydra::sum(std::iter::once(self.clone()).chain((0..n).map(|_| Hydra::One)))
    }

    /// Summands in order (empty for `0`).
    pub fn parts(&self) -> &[Hydra] {
        match self {
            Hydra::Zero => &[],
            Hydra::Sum(ps) => ps,
            other => std::slice::from_ref(other),
        }
    }

    /// If `self = H + 1`, returns `H`.
    pub fn strip_unit(&self) -> Option<Hydra> {
        match self.parts() {
            [init @ .., Hydra::One] => Some(Hydra::sum(init.iter().cloned())),
            _ => None,
        }
    }

    /// Sort membership, or the first violated constructor condition.
    pub fn sort_of(&self) -> Result<Sorts, SortError> {
        let fail = |clause| {
            Err(SortError {
                clause,
                term: self.to_string(),
            })
        };
        match self {
            Hydra::Zero => Ok(Sorts::BOTH_H),
            Hydra::One => Ok(Sorts::ALL),
            Hydra::Sum(parts) => {
                if parts.len() < 2
                    || parts
                        .iter()
                        .any(|p| matches!(p, Hydra::Zero | Hydra::Sum(_)))
                {
                    return fail(SortClause::Sum);
                }
                let (mut t0, mut t1) = (true, true);
                for p in parts {
                    let s = p.sort_of()?;
                    t0 &= s.t0;
                    t1 &= s.t1;
                }
                if !(t0 || t1) {
                    return fail(SortClause::Sum);
                }
                Ok(Sorts {
                    h0: t0,
                    h1: t1,
                    t0: false,
                    t1: false,
                })
            }
            Hydra::Scaled(n, leaf) => {
                match leaf {
                    Leaf::Nat(0) => return fail(SortClause::Scaled),
                    Leaf::Label(l) => l.check()?,
                    _ => {}
                }
                if *n == 0 {
                    return fail(SortClause::Scaled);
                }
                Ok(Sorts::tree(true, false))
            }
            Hydra::Omega(body) => {
                if body.sort_of()?.h0 {
                    Ok(Sorts::tree(true, false))
                } else {
                    fail(SortClause::Omega)
                }
            }
            Hydra::Brace(Head::Mu | Head::StarMu, body) => {
                if body.sort_of()?.h0 {
                    Ok(Sorts::tree(true, false))
                } else {
                    fail(SortClause::Brace)
                }
            }
            Hydra::Brace(Head::Label(l), body) => {
                l.check()?;
                let s = body.sort_of()?;
                Ok(Sorts::tree(s.h0, s.h1))
            }
            Hydra::D(cs, body) => {
                for l in cs {
                    l.check()?;
                }
                if body.sort_of()?.h0 {
                    Ok(Sorts::tree(false, true))
                } else {
                    fail(SortClause::D)
                }
            }
            Hydra::Phi(cs, n, body) => {
                for l in cs {
                    l.check()?;
                }
                if (cs.is_empty() && *n == 0) || !body.sort_of()?.h1 {
                    fail(SortClause::Phi)
                } else {
                    Ok(Sorts::tree(false, true))
                }
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        self.sort_of().is_ok()
    }

    pub fn in_h0(&self) -> bool {
        self.sort_of().is_ok_and(|s| s.h0)
    }

    pub fn in_h1(&self) -> bool {
        self.sort_of().is_ok_and(|s| s.h1)
    }

    /// `Lb(h)`.
    pub fn labels_of(&self) -> LabelSet {
        let mut out = LabelSet::new();
        self.collect_labels(&mut out, false);
        out
    }

    /// The fixed part `(h)_f ⊆ Lb(h)`.
    pub fn fixed_part(&self) -> LabelSet {
        let mut out = LabelSet::new();
        self.collect_labels(&mut out, true);
        out
    }

    fn collect_labels(&self, out: &mut LabelSet, fixed_only: bool) {
        match self {
            Hydra::Zero | Hydra::One => {}
            Hydra::Sum(ps) => ps.iter().for_each(|p| p.collect_labels(out, fixed_only)),
            Hydra::Scaled(_, Leaf::Label(l)) => {
                if !fixed_only {
                    out.insert(l.clone());
                }
            }
            Hydra::Scaled(..) => {}
            Hydra::Omega(b) | Hydra::Brace(Head::Mu | Head::StarMu, b) => {
                b.collect_labels(out, fixed_only)
            }
            Hydra::Brace(Head::Label(l), b) => {
                if !fixed_only {
                    out.insert(l.clone());
                }
                b.collect_labels(out, fixed_only)
            }
            Hydra::D(cs, b) | Hydra::Phi(cs, _, b) => {
                for l in cs {
                    out.insert(l.clone());
                }
                b.collect_labels(out, fixed_only)
            }
        }
    }

    /// Node count, including label bodies.
    pub fn size(&self) -> usize {
        let labels = |cs: &LabelSet| cs.iter().map(Label::size).sum::<usize>();
        match self {
            Hydra::Zero | Hydra::One => 1,
            Hydra::Sum(ps) => 1 + ps.iter().map(Hydra::size).sum::<usize>(),
            Hydra::Scaled(_, Leaf::Label(l)) => 1 + l.size(),
            Hydra::Scaled(..) => 1,
            Hydra::Omega(b) | Hydra::Brace(Head::Mu | Head::StarMu, b) => 1 + b.size(),
            Hydra::Brace(Head::Label(l), b) => 1 + l.size() + b.size(),
            Hydra::D(cs, b) | Hydra::Phi(cs, _, b) => 1 + labels(cs) + b.size(),
        }
    }
}
