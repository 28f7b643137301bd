//! Ordinal diagrams of the notation system `O(μ)`.
//!
//! Terms are kept in normal form by the smart constructors: sums are flat,
//! zero-free and weakly descending, `φ00` is `1`, and collapse subscripts are
//! regular (`μ` or `d_μ β`). Structural equality of normal forms coincides
//! with the `Equal` case of [`compare`].

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Recursion budget for a single comparison. Exceeding it means the
/// comparison clauses failed to make progress.
pub const COMPARE_DEPTH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("collapse subscript {0} is not regular")]
    NotRegular(String),
    #[error("veblen argument {0} is not below mu")]
    VeblenArgument(String),
    #[error("omega power exponent {0} is below mu")]
    OmegaExponent(String),
    #[error("comparison exceeded the recursion limit of {COMPARE_DEPTH_LIMIT}")]
    DepthExceeded,
}

/// A term of `O(μ)`.
///
/// The derived `Ord` is a structural order used only for canonical
/// containers; the ordinal order is [`compare`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Diagram {
    Zero,
    One,
    Mu,
    Sum(Vec<Diagram>),
    /// Fixed-point-free binary Veblen function `φαβ`, both arguments below `μ`.
    Veblen(Box<Diagram>, Box<Diagram>),
    /// `ω^α` for `α ≥ μ`.
    OmegaPow(Box<Diagram>),
    /// `d_σ α` with `σ` regular.
    Collapse(Box<Diagram>, Box<Diagram>),
}

impl Diagram {
    /// `Ω = d_μ 0`.
    pub fn omega_cap() -> Diagram {
        Diagram::Collapse(Box::new(Diagram::Mu), Box::new(Diagram::Zero))
    }

    /// `ω = φ01`.
    pub fn omega() -> Diagram {
        Diagram::Veblen(Box::new(Diagram::Zero), Box::new(Diagram::One))
    }

    /// The finite ordinal `n` as a sum of `n` ones.
    pub fn nat(n: u64) -> Diagram {
        Diagram::sum((0..n).map(|_| Diagram::One))
    }

    /// Normal-form sum: flattens, drops zeros and sorts parts descending.
    pub fn sum<I: IntoIterator<Item = Diagram>>(parts: I) -> Diagram {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Diagram::Zero => {}
                Diagram::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort_by(|a, b| compare(b, a));
        match flat.len() {
            0 => Diagram::Zero,
            1 => flat.pop().unwrap(),
            _ => Diagram::Sum(flat),
        }
    }

    pub fn veblen(alpha: Diagram, beta: Diagram) -> Result<Diagram, DiagramError> {
        for arg in [&alpha, &beta] {
            if compare(arg, &Diagram::Mu) != Ordering::Less {
                return Err(DiagramError::VeblenArgument(arg.to_string()));
            }
        }
        if alpha == Diagram::Zero && beta == Diagram::Zero {
            return Ok(Diagram::One);
        }
        Ok(Diagram::Veblen(Box::new(alpha), Box::new(beta)))
    }

    /// `ω^α` for `α ≥ μ`; `ω^μ` is kept distinct from `μ` (fixed-point-free).
    pub fn omega_pow(alpha: Diagram) -> Result<Diagram, DiagramError> {
        if compare(&alpha, &Diagram::Mu) == Ordering::Less {
            return Err(DiagramError::OmegaExponent(alpha.to_string()));
        }
        Ok(Diagram::OmegaPow(Box::new(alpha)))
    }

    /// `ω^α` for any `α`: `φ0α` below `μ`, the exponential above.
    pub fn exp_omega(alpha: Diagram) -> Diagram {
        if compare(&alpha, &Diagram::Mu) == Ordering::Less {
            Diagram::veblen(Diagram::Zero, alpha).expect("arguments checked below mu")
        } else {
            Diagram::OmegaPow(Box::new(alpha))
        }
    }

    pub fn collapse(sigma: Diagram, alpha: Diagram) -> Result<Diagram, DiagramError> {
        if !is_regular(&sigma) {
            return Err(DiagramError::NotRegular(sigma.to_string()));
        }
        Ok(Diagram::Collapse(Box::new(sigma), Box::new(alpha)))
    }

    /// The additively principal parts, in descending order.
    pub fn parts(&self) -> &[Diagram] {
        match self {
            Diagram::Zero => &[],
            Diagram::Sum(ps) => ps,
            other => std::slice::from_ref(other),
        }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Diagram::Zero | Diagram::One | Diagram::Mu => 1,
            Diagram::Sum(ps) => 1 + ps.iter().map(Diagram::size).sum::<usize>(),
            Diagram::Veblen(a, b) | Diagram::Collapse(a, b) => 1 + a.size() + b.size(),
            Diagram::OmegaPow(a) => 1 + a.size(),
        }
    }

    /// Checks the normal-form invariants recursively.
    pub fn is_normal(&self) -> bool {
        match self {
            Diagram::Zero | Diagram::One | Diagram::Mu => true,
            Diagram::Sum(ps) => {
                ps.len() >= 2
                    && ps
                        .iter()
                        .all(|p| !matches!(p, Diagram::Zero | Diagram::Sum(_)) && p.is_normal())
                    && ps.windows(2).all(|w| compare(&w[0], &w[1]) != Ordering::Less)
            }
            Diagram::Veblen(a, b) => {
                !(**a == Diagram::Zero && **b == Diagram::Zero)
                    && a.is_normal()
                    && b.is_normal()
                    && compare(a, &Diagram::Mu) == Ordering::Less
                    && compare(b, &Diagram::Mu) == Ordering::Less
            }
            Diagram::OmegaPow(a) => a.is_normal() && compare(a, &Diagram::Mu) != Ordering::Less,
            Diagram::Collapse(s, a) => is_regular(s) && s.is_normal() && a.is_normal(),
        }
    }

    /// Every subterm (including `self`), pre-order.
    pub fn subterms(&self) -> Vec<&Diagram> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            out.push(d);
            match d {
                Diagram::Zero | Diagram::One | Diagram::Mu => {}
                Diagram::Sum(ps) => stack.extend(ps.iter().rev()),
                Diagram::Veblen(a, b) | Diagram::Collapse(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Diagram::OmegaPow(a) => stack.push(a),
            }
        }
        out
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagram::Zero => write!(f, "0"),
            Diagram::One => write!(f, "1"),
            Diagram::Mu => write!(f, "mu"),
            Diagram::Sum(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Diagram::Veblen(a, b) => write!(f, "phi({a},{b})"),
            Diagram::OmegaPow(a) => write!(f, "w^({a})"),
            Diagram::Collapse(s, a) => write!(f, "d{{{s}}}({a})"),
        }
    }
}

/// A finite set of collapse terms, deduplicated structurally.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KSet(Vec<Diagram>);

impl KSet {
    pub fn members(&self) -> &[Diagram] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, d: &Diagram) -> bool {
        self.0.contains(d)
    }

    pub fn union(mut self, other: KSet) -> KSet {
        for d in other.0 {
            if !self.0.contains(&d) {
                self.0.push(d);
            }
        }
        self
    }

    /// `K ≤ γ`-style existential: some member is `≥ γ`.
    pub fn has_member_ge(&self, gamma: &Diagram) -> bool {
        self.0.iter().any(|x| compare(gamma, x) != Ordering::Greater)
    }

    /// `K < γ`: every member is below `γ`.
    pub fn all_below(&self, gamma: &Diagram) -> bool {
        self.0.iter().all(|x| compare(x, gamma) == Ordering::Less)
    }

    /// `K₁ ≤ K₂`: every member of `self` is `≤` some member of `other`.
    pub fn le_set(&self, other: &KSet) -> bool {
        self.0.iter().all(|x| other.has_member_ge(x))
    }
}

impl FromIterator<Diagram> for KSet {
    fn from_iter<I: IntoIterator<Item = Diagram>>(iter: I) -> Self {
        let mut members = Vec::new();
        for d in iter {
            if !members.contains(&d) {
                members.push(d);
            }
        }
        KSet(members)
    }
}

/// `σ` is `μ` or `d_μ β`.
pub fn is_regular(a: &Diagram) -> bool {
    match a {
        Diagram::Mu => true,
        Diagram::Collapse(s, _) => **s == Diagram::Mu,
        _ => false,
    }
}

/// `α ≺ β`: `α = d_β γ` or `α = d_{d_β γ} δ`.
pub fn precedes(a: &Diagram, b: &Diagram) -> bool {
    match a {
        Diagram::Collapse(s, _) => {
            **s == *b || matches!(&**s, Diagram::Collapse(inner, _) if **inner == *b)
        }
        _ => false,
    }
}

pub fn preceq(a: &Diagram, b: &Diagram) -> bool {
    a == b || precedes(a, b)
}

/// Commutative sum: descending merge of principal parts.
pub fn natural_sum(a: &Diagram, b: &Diagram) -> Diagram {
    let (xs, ys) = (a.parts(), b.parts());
    let mut out = Vec::with_capacity(xs.len() + ys.len());
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        if compare(&xs[i], &ys[j]) != Ordering::Less {
            out.push(xs[i].clone());
            i += 1;
        } else {
            out.push(ys[j].clone());
            j += 1;
        }
    }
    out.extend_from_slice(&xs[i..]);
    out.extend_from_slice(&ys[j..]);
    match out.len() {
        0 => Diagram::Zero,
        1 => out.pop().unwrap(),
        _ => Diagram::Sum(out),
    }
}

/// Natural sum of any number of diagrams.
pub fn natural_sum_all<'a, I: IntoIterator<Item = &'a Diagram>>(items: I) -> Diagram {
    items
        .into_iter()
        .fold(Diagram::Zero, |acc, d| natural_sum(&acc, d))
}

/// `K_σ α`.
pub fn k_set(sigma: &Diagram, alpha: &Diagram) -> Result<KSet, DiagramError> {
    if !is_regular(sigma) {
        return Err(DiagramError::NotRegular(sigma.to_string()));
    }
    let mut ctx = Ctx::default();
    let mut out = Vec::new();
    ctx.k_refs(sigma, alpha, &mut out)?;
    Ok(out.into_iter().cloned().collect())
}

/// Total order on normal forms.
///
/// # Panics
///
/// Panics if the comparison exceeds [`COMPARE_DEPTH_LIMIT`]; use
/// [`try_compare`] to observe that case as an error.
pub fn compare(a: &Diagram, b: &Diagram) -> Ordering {
    try_compare(a, b).expect("ordinal diagram comparison did not terminate")
}

pub fn try_compare(a: &Diagram, b: &Diagram) -> Result<Ordering, DiagramError> {
    Ctx::default().cmp(a, b)
}

pub fn lt(a: &Diagram, b: &Diagram) -> bool {
    compare(a, b) == Ordering::Less
}

pub fn le(a: &Diagram, b: &Diagram) -> bool {
    compare(a, b) != Ordering::Greater
}

#[derive(Default)]
struct Ctx {
    depth: usize,
}

/// Bound on `σ` for the same-subscript rule: a regular diagram or `∞`.
enum Level<'a> {
    Regular(&'a Diagram),
    Infinity,
}

impl Ctx {
    fn enter(&mut self) -> Result<(), DiagramError> {
        self.depth += 1;
        if self.depth > COMPARE_DEPTH_LIMIT {
            Err(DiagramError::DepthExceeded)
        } else {
            Ok(())
        }
    }

    fn cmp(&mut self, a: &Diagram, b: &Diagram) -> Result<Ordering, DiagramError> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        self.enter()?;
        let r = self.cmp_distinct(a, b);
        self.depth -= 1;
        r
    }

    fn lt(&mut self, a: &Diagram, b: &Diagram) -> Result<bool, DiagramError> {
        Ok(self.cmp(a, b)? == Ordering::Less)
    }

    fn le(&mut self, a: &Diagram, b: &Diagram) -> Result<bool, DiagramError> {
        Ok(self.cmp(a, b)? != Ordering::Greater)
    }

    fn cmp_distinct(&mut self, a: &Diagram, b: &Diagram) -> Result<Ordering, DiagramError> {
        use Diagram::*;
        match (a, b) {
            (Zero, _) => Ok(Ordering::Less),
            (_, Zero) => Ok(Ordering::Greater),
            (Sum(_), _) | (_, Sum(_)) => {
                let (xs, ys) = (a.parts(), b.parts());
                for (x, y) in xs.iter().zip(ys) {
                    let o = self.cmp(x, y)?;
                    if o != Ordering::Equal {
                        return Ok(o);
                    }
                }
                Ok(xs.len().cmp(&ys.len()))
            }
            _ => self.cmp_principal(a, b),
        }
    }

    fn cmp_principal(&mut self, a: &Diagram, b: &Diagram) -> Result<Ordering, DiagramError> {
        use Diagram::*;
        fn rank(d: &Diagram) -> u8 {
            match d {
                One => 0,
                Veblen(..) | Collapse(..) => 1,
                Mu => 2,
                OmegaPow(_) => 3,
                Zero | Sum(_) => unreachable!("not principal"),
            }
        }
        let (ra, rb) = (rank(a), rank(b));
        if ra != rb {
            return Ok(ra.cmp(&rb));
        }
        match (a, b) {
            (OmegaPow(x), OmegaPow(y)) => self.cmp(x, y),
            (Veblen(a1, b1), Veblen(a2, b2)) => match self.cmp(a1, a2)? {
                Ordering::Less => Ok(if self.lt(b1, b)? {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }),
                Ordering::Equal => self.cmp(b1, b2),
                Ordering::Greater => Ok(if self.le(a, b2)? {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }),
            },
            (Veblen(x, y), Collapse(..)) => Ok(if self.lt(x, b)? && self.lt(y, b)? {
                Ordering::Less
            } else {
                Ordering::Greater
            }),
            (Collapse(..), Veblen(..)) => Ok(self.cmp_principal(b, a)?.reverse()),
            (Collapse(s, x), Collapse(t, y)) => Ok(if self.collapse_lt(a, s, x, b, t, y)? {
                Ordering::Less
            } else {
                Ordering::Greater
            }),
            _ => unreachable!("equal principal terms are handled before dispatch"),
        }
    }

    /// `d_σ α < d_τ β` for distinct collapse terms.
    fn collapse_lt(
        &mut self,
        a: &Diagram,
        sigma: &Diagram,
        alpha: &Diagram,
        b: &Diagram,
        tau: &Diagram,
        beta: &Diagram,
    ) -> Result<bool, DiagramError> {
        if sigma != tau {
            if self.lt(sigma, tau)? {
                if self.le(sigma, b)? {
                    return Ok(true);
                }
                let mut ks = Vec::new();
                self.k_refs(sigma, b, &mut ks)?;
                self.any_ge(a, &ks)
            } else {
                if !self.lt(a, tau)? {
                    return Ok(false);
                }
                let mut ks = Vec::new();
                self.k_refs(tau, a, &mut ks)?;
                self.all_below(&ks, b)
            }
        } else {
            let mut kb = Vec::new();
            self.k_refs(sigma, beta, &mut kb)?;
            if self.any_ge(a, &kb)? {
                return Ok(true);
            }
            let mut ka = Vec::new();
            self.k_refs(sigma, alpha, &mut ka)?;
            // read as `K_σα < d_σβ`; the bare `< β` reading is not antisymmetric
            if !self.all_below(&ka, b)? {
                return Ok(false);
            }
            match self.next_level(sigma, alpha, beta)? {
                Level::Infinity => self.lt(alpha, beta),
                Level::Regular(t) => {
                    let da = Diagram::Collapse(Box::new(t.clone()), Box::new(alpha.clone()));
                    let db = Diagram::Collapse(Box::new(t.clone()), Box::new(beta.clone()));
                    self.lt(&da, &db)
                }
            }
        }
    }

    /// The least regular `τ > σ` with `K_τ{α,β} ≠ ∅`, or `∞`.
    ///
    /// `K_τ γ` is nonempty only if `γ` reaches a collapse whose subscript is
    /// `⪯ τ`, so the candidates are `μ` and the regular subterms of `α, β`.
    fn next_level<'a>(
        &mut self,
        sigma: &Diagram,
        alpha: &'a Diagram,
        beta: &'a Diagram,
    ) -> Result<Level<'a>, DiagramError> {
        static MU: Diagram = Diagram::Mu;
        let mut candidates: Vec<&'a Diagram> = vec![&MU];
        for d in alpha.subterms().into_iter().chain(beta.subterms()) {
            if is_regular(d) && !candidates.contains(&d) {
                candidates.push(d);
            }
        }
        let mut best: Option<&'a Diagram> = None;
        for t in candidates {
            if !self.lt(sigma, t)? {
                continue;
            }
            if let Some(cur) = best {
                if !self.lt(t, cur)? {
                    continue;
                }
            }
            let mut ks = Vec::new();
            self.k_refs(t, alpha, &mut ks)?;
            if ks.is_empty() {
                self.k_refs(t, beta, &mut ks)?;
            }
            if !ks.is_empty() {
                best = Some(t);
            }
        }
        Ok(best.map_or(Level::Infinity, Level::Regular))
    }

    fn any_ge(&mut self, gamma: &Diagram, ks: &[&Diagram]) -> Result<bool, DiagramError> {
        for x in ks {
            if self.le(gamma, x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn all_below(&mut self, ks: &[&Diagram], gamma: &Diagram) -> Result<bool, DiagramError> {
        for x in ks {
            if !self.lt(x, gamma)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn k_refs<'a>(
        &mut self,
        sigma: &Diagram,
        alpha: &'a Diagram,
        out: &mut Vec<&'a Diagram>,
    ) -> Result<(), DiagramError> {
        match alpha {
            Diagram::Zero | Diagram::One | Diagram::Mu => Ok(()),
            Diagram::Sum(ps) => {
                for p in ps {
                    self.k_refs(sigma, p, out)?;
                }
                Ok(())
            }
            Diagram::Veblen(a, b) => {
                self.k_refs(sigma, a, out)?;
                self.k_refs(sigma, b, out)
            }
            Diagram::OmegaPow(a) => self.k_refs(sigma, a, out),
            Diagram::Collapse(tau, a) => {
                if preceq(tau, sigma) {
                    if !out.contains(&alpha) {
                        out.push(alpha);
                    }
                    Ok(())
                } else if self.lt(sigma, tau)? {
                    self.k_refs(sigma, tau, out)?;
                    self.k_refs(sigma, a, out)
                } else {
                    self.k_refs(sigma, tau, out)
                }
            }
        }
    }
}
