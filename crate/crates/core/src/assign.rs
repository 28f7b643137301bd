//! Ordinal assignment `o(·)` from hydras and labels into `O(μ)`, and the
//! orders it induces on labels and label sets.

use std::cmp::Ordering;

use thiserror::Error;

use crate::diagram::{compare, natural_sum, natural_sum_all, Diagram, DiagramError};
use crate::hydra::{Head, Hydra, Label, LabelSet, Leaf, SortError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("ordinal assignment left the notation system: {0}")]
    Diagram(#[from] DiagramError),
}

/// `o(h)`.
///
/// A brace `{A}(h)` whose body lies in `H₁` is read as `φ_{o(A)}(o(h))`,
/// otherwise as `o(A)#1#o(h)`.
pub fn o_hydra(h: &Hydra) -> Result<Diagram, AssignError> {
    h.sort_of()?;
    assign(h)
}

fn assign(h: &Hydra) -> Result<Diagram, AssignError> {
    Ok(match h {
        Hydra::Zero => Diagram::Zero,
        Hydra::One => Diagram::One,
        Hydra::Sum(ps) => {
            let vals = ps.iter().map(assign).collect::<Result<Vec<_>, _>>()?;
            natural_sum_all(&vals)
        }
        Hydra::Scaled(n, leaf) => match leaf {
            Leaf::StarOmega => Diagram::omega(),
            Leaf::StarMu => Diagram::Mu,
            Leaf::Nat(m) => Diagram::nat(n * m),
            Leaf::Label(a) => o_label(a)?,
        },
        Hydra::Phi(cs, n, body) => {
            let head = natural_sum(&o_labelset(cs)?, &Diagram::nat(n + 1));
            Diagram::veblen(head, assign(body)?)?
        }
        Hydra::Omega(body) => Diagram::exp_omega(assign(body)?),
        Hydra::Brace(Head::Mu | Head::StarMu, body) => natural_sum(&Diagram::Mu, &assign(body)?),
        Hydra::Brace(Head::Label(a), body) => {
            let oa = o_label(a)?;
            let ob = assign(body)?;
            if body.in_h1() {
                Diagram::veblen(oa, ob)?
            } else {
                natural_sum_all([&oa, &Diagram::One, &ob])
            }
        }
        Hydra::D(cs, body) => {
            Diagram::collapse(Diagram::Mu, natural_sum(&o_labelset(cs)?, &assign(body)?))?
        }
    })
}

/// `o(A)`.
pub fn o_label(a: &Label) -> Result<Diagram, AssignError> {
    Ok(match a {
        Label::DMu(h0) => Diagram::collapse(Diagram::Mu, assign(h0)?)?,
        Label::DSub(h0, h1) => {
            let sigma = Diagram::collapse(Diagram::Mu, assign(h0)?)?;
            let arg = natural_sum(&sigma, &assign(h1)?);
            Diagram::collapse(sigma, arg)?
        }
    })
}

/// `o({C₁,…,C_k}) = o(C₁)#…#o(C_k)`.
pub fn o_labelset(lb: &LabelSet) -> Result<Diagram, AssignError> {
    let vals = lb.iter().map(o_label).collect::<Result<Vec<_>, _>>()?;
    Ok(natural_sum_all(&vals))
}

/// A label extended with the symbols `0` and `μ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRef {
    Zero,
    Mu,
    Label(Label),
}

impl LabelRef {
    pub fn value(&self) -> Result<Diagram, AssignError> {
        match self {
            LabelRef::Zero => Ok(Diagram::Zero),
            LabelRef::Mu => Ok(Diagram::Mu),
            LabelRef::Label(a) => o_label(a),
        }
    }

    pub fn as_label(&self) -> Option<&Label> {
        match self {
            LabelRef::Label(a) => Some(a),
            _ => None,
        }
    }
}

impl From<Label> for LabelRef {
    fn from(a: Label) -> Self {
        LabelRef::Label(a)
    }
}

fn shifted(a: &LabelRef, n: u64) -> Result<Diagram, AssignError> {
    Ok(natural_sum(&a.value()?, &Diagram::nat(n)))
}

/// `A+n < B+m`.
pub fn label_lt(a: &LabelRef, n: u64, b: &LabelRef, m: u64) -> Result<bool, AssignError> {
    Ok(compare(&shifted(a, n)?, &shifted(b, m)?) == Ordering::Less)
}

/// `A ≤ B`.
pub fn label_le(a: &LabelRef, b: &LabelRef) -> Result<bool, AssignError> {
    Ok(compare(&a.value()?, &b.value()?) != Ordering::Greater)
}

/// `A ≃ B`: equal ordinal values.
pub fn label_sim(a: &LabelRef, b: &LabelRef) -> Result<bool, AssignError> {
    Ok(a.value()? == b.value()?)
}

/// `𝑨 < 𝑩`: some `B ∈ 𝑩` is above every `A ∈ 𝑨`.
pub fn set_lt(a: &LabelSet, b: &LabelSet) -> Result<bool, AssignError> {
    let avals = a.iter().map(o_label).collect::<Result<Vec<_>, _>>()?;
    for y in b {
        let yv = o_label(y)?;
        if avals.iter().all(|x| compare(x, &yv) == Ordering::Less) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `𝑨 ≤ 𝑩`: every `A ∈ 𝑨` is below or equal to some `B ∈ 𝑩`.
pub fn set_le(a: &LabelSet, b: &LabelSet) -> Result<bool, AssignError> {
    let bvals = b.iter().map(o_label).collect::<Result<Vec<_>, _>>()?;
    for x in a {
        let xv = o_label(x)?;
        if !bvals.iter().any(|y| compare(&xv, y) != Ordering::Greater) {
            return Ok(false);
        }
    }
    Ok(true)
}
