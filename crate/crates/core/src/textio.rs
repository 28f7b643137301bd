//! Concrete ASCII syntax for hydras and labels, and the versioned JSON
//! documents exchanged by the CLI and the HTTP API.
//!
//! ```text
//! hydra := term ("+" term)*
//! term  := "0" | "1" | nat "*" atom | "w(" hydra ")" | "{" head "}(" hydra ")"
//!        | "D{" labels? "}(" hydra ")" | "phi{" labels? "}+" nat "(" hydra ")"
//! atom  := nat | "sw" | "sm" | label
//! head  := "mu" | "sm" | label
//! label := "dmu(" hydra ")" | "dd(" hydra ";" hydra ")"
//! ```
//!
//! Whitespace is insignificant. Every node is sort-checked as soon as it is
//! built, so a sort violation is reported at the position of the innermost
//! offending node.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hydra::{Head, Hydra, Label, LabelSet, Leaf, SortError};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("at line {line}, column {column}: {source}")]
    Sort {
        line: usize,
        column: usize,
        source: SortError,
    },
}

impl fmt::Display for Hydra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hydra::Zero => f.write_str("0"),
            Hydra::One => f.write_str("1"),
            Hydra::Sum(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Hydra::Scaled(n, leaf) => match leaf {
                Leaf::Nat(m) => write!(f, "{n}*{m}"),
                Leaf::StarOmega => write!(f, "{n}*sw"),
                Leaf::StarMu => write!(f, "{n}*sm"),
                Leaf::Label(a) => write!(f, "{n}*{a}"),
            },
            Hydra::Omega(b) => write!(f, "w({b})"),
            Hydra::Brace(head, b) => match head {
                Head::Mu => write!(f, "{{mu}}({b})"),
                Head::StarMu => write!(f, "{{sm}}({b})"),
                Head::Label(a) => write!(f, "{{{a}}}({b})"),
            },
            Hydra::D(cs, b) => write!(f, "D{{{cs}}}({b})"),
            Hydra::Phi(cs, n, b) => write!(f, "phi{{{cs}}}+{n}({b})"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::DMu(h) => write!(f, "dmu({h})"),
            Label::DSub(h0, h1) => write!(f, "dd({h0};{h1})"),
        }
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

pub fn print_hydra(h: &Hydra) -> String {
    h.to_string()
}

pub fn parse_hydra(text: &str) -> Result<Hydra, ParseError> {
    let mut p = Parser::new(text);
    let h = p.hydra()?;
    p.finish()?;
    Ok(h)
}

pub fn parse_label(text: &str) -> Result<Label, ParseError> {
    let mut p = Parser::new(text);
    let a = p.label()?;
    p.finish()?;
    Ok(a)
}

/// Comma-separated labels; blank input is the empty set.
pub fn parse_labels(text: &str) -> Result<LabelSet, ParseError> {
    let mut p = Parser::new(text);
    let set = p.labels_until(None)?;
    p.finish()?;
    Ok(set)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = pos - before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1) + 1;
        (line, column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.location(self.pos);
        Err(ParseError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            self.error("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match digits.parse() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos = start;
                self.error("number out of range")
            }
        }
    }

    fn checked(&self, start: usize, h: Hydra) -> Result<Hydra, ParseError> {
        match h.sort_of() {
            Ok(_) => Ok(h),
            Err(source) => {
                let (line, column) = self.location(start);
                Err(ParseError::Sort {
                    line,
                    column,
                    source,
                })
            }
        }
    }

    fn hydra(&mut self) -> Result<Hydra, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut parts = vec![self.term()?];
        while self.eat("+") {
            parts.push(self.term()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        self.checked(start, Hydra::sum(parts))
    }

    fn term(&mut self) -> Result<Hydra, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let h = match self.peek() {
            Some(b) if b.is_ascii_digit() => {
                let n = self.nat()?;
                if self.eat("*") {
                    if n == 0 {
                        self.pos = start;
                        return self.error("multiplier must be positive");
                    }
                    let leaf = self.atom()?;
                    Hydra::scaled(n, leaf)
                } else {
                    match n {
                        0 => Hydra::Zero,
                        1 => Hydra::One,
                        _ => {
                            self.pos = start;
                            return self.error("only 0 and 1 stand alone; write n*m for numerals");
                        }
                    }
                }
            }
            Some(b'w') => {
                self.expect("w(")?;
                let body = self.hydra()?;
                self.expect(")")?;
                Hydra::omega(body)
            }
            Some(b'{') => {
                self.expect("{")?;
                let head = if self.eat("mu") {
                    Head::Mu
                } else if self.eat("sm") {
                    Head::StarMu
                } else {
                    Head::Label(self.label()?)
                };
                self.expect("}")?;
                self.expect("(")?;
                let body = self.hydra()?;
                self.expect(")")?;
                Hydra::brace(head, body)
            }
            Some(b'D') => {
                self.expect("D{")?;
                let cs = self.labels_until(Some(b'}'))?;
                self.expect("}")?;
                self.expect("(")?;
                let body = self.hydra()?;
                self.expect(")")?;
                Hydra::d(cs, body)
            }
            Some(b'p') => {
                self.expect("phi{")?;
                let cs = self.labels_until(Some(b'}'))?;
                self.expect("}")?;
                self.expect("+")?;
                let n = self.nat()?;
                self.expect("(")?;
                let body = self.hydra()?;
                self.expect(")")?;
                Hydra::phi(cs, n, body)
            }
            Some(_) => return self.error("expected a hydra term"),
            None => return self.error("unexpected end of input"),
        };
        self.checked(start, h)
    }

    fn atom(&mut self) -> Result<Leaf, ParseError> {
        match self.peek() {
            Some(b) if b.is_ascii_digit() => {
                let m = self.nat()?;
                if m == 0 {
                    return self.error("numeral must be positive");
                }
                Ok(Leaf::Nat(m))
            }
            _ if self.eat("sw") => Ok(Leaf::StarOmega),
            _ if self.eat("sm") => Ok(Leaf::StarMu),
            _ => Ok(Leaf::Label(self.label()?)),
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let label = if self.eat("dmu(") {
            let h = self.hydra()?;
            self.expect(")")?;
            Label::dmu(h)
        } else if self.eat("dd(") {
            let h0 = self.hydra()?;
            self.expect(";")?;
            let h1 = self.hydra()?;
            self.expect(")")?;
            Label::dsub(h0, h1)
        } else {
            return self.error("expected a label `dmu(..)` or `dd(..;..)`");
        };
        label.check().map_err(|source| {
            let (line, column) = self.location(start);
            ParseError::Sort {
                line,
                column,
                source,
            }
        })?;
        Ok(label)
    }

    fn labels_until(&mut self, close: Option<u8>) -> Result<LabelSet, ParseError> {
        let mut set = LabelSet::new();
        if self.peek() == close {
            return Ok(set);
        }
        loop {
            set.insert(self.label()?);
            if !self.eat(",") {
                return Ok(set);
            }
        }
    }
}

impl Serialize for Hydra {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hydra {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_hydra(&text).map_err(de::Error::custom)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_label(&text).map_err(de::Error::custom)
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Vec::<Label>::deserialize(d)?.into_iter().collect())
    }
}

/// Canonical digest of a position `(H, lb, ℓ)`; moves are addressed by
/// `(digest, index)` so a stale index is detected.
pub fn state_digest(h: &Hydra, lb: &LabelSet, level: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{h}|{lb}|{level}").as_bytes());
    hex::encode(&hasher.finalize()[..16])
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("unsupported schema version `{found}` (expected `{SCHEMA_VERSION}`)")]
    Version { found: String },
    #[error("expected a `{expected}` document, found `{found}`")]
    Kind { expected: String, found: String },
    #[error("malformed document: {0}")]
    Json(String),
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema: String,
    kind: String,
    #[serde(flatten)]
    body: T,
}

/// A value that can be wrapped in a versioned JSON document.
pub trait Document: Serialize + for<'de> Deserialize<'de> {
    const KIND: &'static str;

    fn to_document(&self) -> serde_json::Value {
        serde_json::to_value(Envelope {
            schema: SCHEMA_VERSION.to_string(),
            kind: Self::KIND.to_string(),
            body: self,
        })
        .expect("documents serialize to JSON")
    }

    fn from_document(doc: &serde_json::Value) -> Result<Self, DocumentError> {
        let field = |name: &str| {
            doc.get(name)
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string()
        };
        let schema = field("schema");
        if schema != SCHEMA_VERSION {
            return Err(DocumentError::Version { found: schema });
        }
        let kind = field("kind");
        if kind != Self::KIND {
            return Err(DocumentError::Kind {
                expected: Self::KIND.to_string(),
                found: kind,
            });
        }
        let env: Envelope<Self> = serde_json::from_value(doc.clone())
            .map_err(|e| DocumentError::Json(e.to_string()))?;
        Ok(env.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_hydra("1+1").unwrap(),
            Hydra::Sum(vec![Hydra::One, Hydra::One])
        );
        assert_eq!(
            parse_hydra("D{}(0)").unwrap(),
            Hydra::d(LabelSet::new(), Hydra::Zero)
        );
        assert_eq!(
            parse_hydra("{dmu(1)}(w(0))").unwrap(),
            Hydra::brace(
                Head::Label(Label::dmu(Hydra::One)),
                Hydra::omega(Hydra::Zero)
            )
        );
    }

    #[test]
    fn print_examples() {
        assert_eq!(print_hydra(&Hydra::Zero), "0");
        let h = parse_hydra(" phi{ dmu(0) , dd(1;0) }+2( D{}(1+1) ) + {sm}(3*sw)").unwrap_err();
        // a T1 term next to a T0-only term is not a valid sum
        assert!(matches!(h, ParseError::Sort { .. }));
        let text = "phi{dmu(0),dd(1;0)}+2(D{}(1+1))+{dmu(0)}(0)";
        assert_eq!(print_hydra(&parse_hydra(text).unwrap()), text);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_hydra("1+\n  w(2)") {
            Err(ParseError::Syntax { line, column, .. }) => {
                assert_eq!((line, column), (2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_hydra("").is_err());
        assert!(parse_hydra("1 1").is_err());
        assert!(parse_hydra("0*sw").is_err());
        assert!(parse_hydra("2*0").is_err());
    }

    #[test]
    fn sort_errors_point_at_innermost_node() {
        match parse_hydra("1+w(D{}(0))") {
            Err(ParseError::Sort { column, source, .. }) => {
                assert_eq!(column, 3);
                assert_eq!(source.clause, crate::hydra::SortClause::Omega);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_hydra("dmu(D{}(0))").map(|_| ()),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_label("dmu(D{}(0))"),
            Err(ParseError::Sort { .. })
        ));
    }

    #[test]
    fn label_sets() {
        assert!(parse_labels("").unwrap().is_empty());
        assert!(parse_labels("  ").unwrap().is_empty());
        let set = parse_labels("dmu(0), dmu(1),dmu(0)").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.to_string(), "dmu(0),dmu(1)");
    }

    #[test]
    fn phi_with_empty_set_and_zero_shift_is_its_body() {
        assert_eq!(parse_hydra("phi{}+0(1)").unwrap(), Hydra::One);
        assert_eq!(print_hydra(&parse_hydra("phi{}+2(1)").unwrap()), "phi{}+2(1)");
    }

    #[test]
    fn digests_distinguish_levels() {
        let h = parse_hydra("1+1").unwrap();
        let lb = LabelSet::new();
        assert_ne!(state_digest(&h, &lb, 0), state_digest(&h, &lb, 1));
        assert_eq!(state_digest(&h, &lb, 3), state_digest(&h, &lb, 3));
    }

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        hydra: Hydra,
        labels: LabelSet,
    }

    impl Document for Probe {
        const KIND: &'static str = "probe";
    }

    #[test]
    fn documents_check_version_and_kind() {
        let p = Probe {
            hydra: parse_hydra("w(1)+1").unwrap(),
            labels: parse_labels("dmu(0)").unwrap(),
        };
        let doc = p.to_document();
        assert_eq!(doc["schema"], "v1");
        assert_eq!(doc["hydra"], "w(1)+1");
        assert_eq!(Probe::from_document(&doc).unwrap(), p);
        let mut old = doc.clone();
        old["schema"] = "v0".into();
        assert!(matches!(
            Probe::from_document(&old),
            Err(DocumentError::Version { .. })
        ));
        let mut other = doc;
        other["kind"] = "state".into();
        assert!(matches!(
            Probe::from_document(&other),
            Err(DocumentError::Kind { .. })
        ));
    }
}
