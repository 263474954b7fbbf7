//! Ground literals and their textual syntax.
//!
//! A literal is a flat predicate over entity or value terms, optionally
//! negated and optionally carrying a deontic prefix:
//!
//! ```text
//! [O|P|F] [~]atom(term, ...)
//! ```
//!
//! Attribute tests such as `age(marco)>=14` are literals too. They carry a
//! [`Comparison`] that is evaluated against premise values when a bundle is
//! grounded, so the reasoner only ever sees propositional keys.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid literal `{text}` at offset {offset}: {message}")]
pub struct LiteralSyntaxError {
    pub text: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    None,
    Obligation,
    Permission,
    Prohibition,
}

impl Modality {
    fn prefix(self) -> Option<char> {
        match self {
            Modality::None => None,
            Modality::Obligation => Some('O'),
            Modality::Permission => Some('P'),
            Modality::Prohibition => Some('F'),
        }
    }
}

/// A scalar premise value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// An entity identifier declared in the ontology.
    Entity(String),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Entity(_) => "entity",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Entity(e) => serde_json::Value::String(e.clone()),
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Option<Value> {
        match value {
            serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
            serde_json::Value::Number(n) => n.as_i64().map(Value::Int),
            serde_json::Value::String(s) if is_identifier(s) => Some(Value::Entity(s.clone())),
            _ => None,
        }
    }

    /// Parses the script/text form: `true`, `false`, an integer, or an identifier.
    pub fn parse_text(text: &str) -> Option<Value> {
        let text = text.trim();
        match text {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => {
                if let Ok(i) = text.parse::<i64>() {
                    Some(Value::Int(i))
                } else if is_identifier(text) {
                    Some(Value::Entity(text.to_string()))
                } else {
                    None
                }
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::Entity(_) => 2,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Entity(a), Value::Entity(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Entity(e) => f.write_str(e),
        }
    }
}

/// A literal argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Entity(String),
    Int(i64),
    Text(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Entity(e) => f.write_str(e),
            Term::Int(i) => write!(f, "{i}"),
            Term::Text(t) => write!(f, "{t:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
        }
    }

    /// Evaluates `actual <op> threshold`. Ordering operators only apply to
    /// integers; anything else compares false.
    pub fn holds(self, actual: &Value, threshold: &Value) -> bool {
        match self {
            CompareOp::Eq => actual == threshold,
            CompareOp::Ne => actual != threshold,
            _ => match (actual, threshold) {
                (Value::Int(a), Value::Int(b)) => match self {
                    CompareOp::Lt => a < b,
                    CompareOp::Le => a <= b,
                    CompareOp::Gt => a > b,
                    CompareOp::Ge => a >= b,
                    CompareOp::Eq | CompareOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparison {
    pub op: CompareOp,
    pub value: Value,
}

/// A ground, function-free literal.
///
/// Modality and any attached comparison are part of identity: `O p`, `p`
/// and `p=1` are three distinct literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: String,
    pub args: Vec<Term>,
    pub polarity: Polarity,
    pub modality: Modality,
    pub comparison: Option<Comparison>,
}

impl Literal {
    pub fn new(atom: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            atom: atom.into(),
            args,
            polarity: Polarity::Positive,
            modality: Modality::None,
            comparison: None,
        }
    }

    /// Convenience constructor for a positive literal over entity arguments.
    pub fn entity_fact(atom: &str, entities: &[&str]) -> Self {
        Literal::new(
            atom,
            entities.iter().map(|e| Term::Entity(e.to_string())).collect(),
        )
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }

    pub fn complement(&self) -> Literal {
        Literal {
            polarity: self.polarity.flip(),
            ..self.clone()
        }
    }

    /// The polarity-free key: a literal and its complement share it.
    pub fn positive(&self) -> Literal {
        Literal {
            polarity: Polarity::Positive,
            ..self.clone()
        }
    }

    /// The attribute a comparison literal tests, e.g. `age(marco)` for
    /// `age(marco)>=14`.
    pub fn attribute(&self) -> Literal {
        Literal {
            polarity: Polarity::Positive,
            modality: Modality::None,
            comparison: None,
            ..self.clone()
        }
    }

    pub fn with_comparison(mut self, op: CompareOp, value: Value) -> Self {
        self.comparison = Some(Comparison { op, value });
        self
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        let args = self.args.iter().filter_map(|t| match t {
            Term::Entity(e) => Some(e.as_str()),
            _ => None,
        });
        let value = self.comparison.iter().filter_map(|c| match &c.value {
            Value::Entity(e) => Some(e.as_str()),
            _ => None,
        });
        args.chain(value)
    }

    /// Attribute text without polarity or modality: `atom(args)`.
    fn write_core(&self, f: &mut impl fmt::Write) -> fmt::Result {
        f.write_str(&self.atom)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write!(f, "{arg}")?;
            }
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(prefix) = self.modality.prefix() {
            write!(f, "{prefix} ")?;
        }
        if self.is_negative() {
            f.write_char('~')?;
        }
        self.write_core(f)?;
        if let Some(c) = &self.comparison {
            write!(f, "{}{}", c.op.symbol(), c.value)?;
        }
        Ok(())
    }
}

use std::fmt::Write as _;

impl FromStr for Literal {
    type Err = LiteralSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LiteralParser::new(s).parse()
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct LiteralParser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> LiteralParser<'a> {
    fn new(text: &'a str) -> Self {
        LiteralParser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> LiteralSyntaxError {
        LiteralSyntaxError {
            text: self.text.to_string(),
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn identifier(&mut self) -> Option<&'a str> {
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.pos += 1,
            _ => return None,
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        Some(&self.text[start..self.pos])
    }

    fn integer(&mut self) -> Option<i64> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return None;
        }
        match self.text[start..self.pos].parse() {
            Ok(i) => Some(i),
            Err(_) => {
                self.pos = start;
                None
            }
        }
    }

    fn modality(&mut self) -> Modality {
        let modality = match self.peek() {
            Some(b'O') => Modality::Obligation,
            Some(b'P') => Modality::Permission,
            Some(b'F') => Modality::Prohibition,
            _ => return Modality::None,
        };
        // A prefix is a lone capital followed by whitespace; `Owns(x)` is an atom.
        match self.bytes.get(self.pos + 1) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                self.skip_ws();
                modality
            }
            _ => Modality::None,
        }
    }

    fn term(&mut self) -> Result<Term, LiteralSyntaxError> {
        self.skip_ws();
        if self.eat(b'"') {
            let start = self.pos;
            while let Some(b) = self.peek() {
                if b == b'"' {
                    let text = self.text[start..self.pos].to_string();
                    self.pos += 1;
                    return Ok(Term::Text(text));
                }
                self.pos += 1;
            }
            return Err(self.error("unterminated string term"));
        }
        if let Some(i) = self.integer() {
            return Ok(Term::Int(i));
        }
        match self.identifier() {
            Some(id) => {
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    return Err(self.error("nested terms are not allowed (literals are function-free)"));
                }
                Ok(Term::Entity(id.to_string()))
            }
            None => Err(self.error("expected a term")),
        }
    }

    fn comparison_op(&mut self) -> Option<CompareOp> {
        let rest = &self.text[self.pos..];
        let (op, len) = if rest.starts_with("<=") {
            (CompareOp::Le, 2)
        } else if rest.starts_with(">=") {
            (CompareOp::Ge, 2)
        } else if rest.starts_with("!=") {
            (CompareOp::Ne, 2)
        } else if rest.starts_with('<') {
            (CompareOp::Lt, 1)
        } else if rest.starts_with('>') {
            (CompareOp::Gt, 1)
        } else if rest.starts_with('=') {
            (CompareOp::Eq, 1)
        } else {
            return None;
        };
        self.pos += len;
        Some(op)
    }

    fn parse(mut self) -> Result<Literal, LiteralSyntaxError> {
        self.skip_ws();
        let modality = self.modality();
        let polarity = if self.eat(b'~') {
            self.skip_ws();
            Polarity::Negative
        } else {
            Polarity::Positive
        };
        let atom = self
            .identifier()
            .ok_or_else(|| self.error("expected an atom name"))?
            .to_string();
        self.skip_ws();
        let mut args = Vec::new();
        if self.eat(b'(') {
            self.skip_ws();
            if !self.eat(b')') {
                loop {
                    args.push(self.term()?);
                    self.skip_ws();
                    if self.eat(b',') {
                        continue;
                    }
                    if self.eat(b')') {
                        break;
                    }
                    return Err(self.error("expected `,` or `)`"));
                }
            }
        }
        self.skip_ws();
        let comparison = match self.comparison_op() {
            Some(op) => {
                self.skip_ws();
                let start = self.pos;
                let value = if let Some(i) = self.integer() {
                    Value::Int(i)
                } else {
                    match self.identifier() {
                        Some("true") => Value::Bool(true),
                        Some("false") => Value::Bool(false),
                        Some(id) => Value::Entity(id.to_string()),
                        None => {
                            self.pos = start;
                            return Err(self.error("expected a comparison value"));
                        }
                    }
                };
                Some(Comparison { op, value })
            }
            None => None,
        };
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(Literal {
            atom,
            args,
            polarity,
            modality,
            comparison,
        })
    }
}
