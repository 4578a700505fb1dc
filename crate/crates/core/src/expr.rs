//! Variables, affine expressions and raw (pre-canonical) relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{display2, parse_rational, Rational};

/// Declaration handle of a variable. Elimination indices live in
/// [`crate::engine::Ordering`], not here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub usize);

/// Variable names in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variables {
    names: Vec<String>,
}

impl Variables {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vars = Self::new();
        for n in names {
            vars.intern(&n.into());
        }
        vars
    }

    /// Returns the existing handle for `name`, declaring it if new.
    pub fn intern(&mut self, name: &str) -> Var {
        match self.lookup(name) {
            Some(v) => v,
            None => {
                self.names.push(name.to_string());
                Var(self.names.len() - 1)
            }
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(Var)
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        v.0 < self.names.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.names.len()).map(Var)
    }
}

/// `sum(coef * var) + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearExpr {
    terms: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinearExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: Var, coef: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(v, coef);
        e
    }

    pub fn add_term(&mut self, v: Var, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(v).or_insert_with(Rational::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn coef(&self, v: Var) -> Rational {
        self.terms.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, &Rational)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &LinearExpr) -> LinearExpr {
        let mut out = self.clone();
        for (v, c) in other.terms() {
            out.add_term(v, c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinearExpr) -> LinearExpr {
        self.plus(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, k: &Rational) -> LinearExpr {
        if k.is_zero() {
            return LinearExpr::zero();
        }
        LinearExpr {
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Evaluates at `point`; variables missing from the map count as zero.
    pub fn eval(&self, point: &BTreeMap<Var, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            if let Some(x) = point.get(v) {
                acc += c * x;
            }
        }
        acc
    }

    /// Renders with two-decimal coefficients; `order` lists variables from
    /// first printed to last (tabular listings print higher indices first).
    pub fn display_with(&self, vars: &Variables, order: &[Var]) -> String {
        let mut out = String::new();
        for v in order {
            let Some(c) = self.terms.get(v) else { continue };
            push_term(&mut out, c, Some(vars.name(*v)));
        }
        for (v, c) in &self.terms {
            if !order.contains(v) {
                push_term(&mut out, c, Some(vars.name(*v)));
            }
        }
        if !self.constant.is_zero() || out.is_empty() {
            push_term(&mut out, &self.constant, None);
        }
        out
    }
}

fn push_term(out: &mut String, c: &Rational, name: Option<&str>) {
    let negative = c.is_negative();
    let magnitude = display2(&c.abs());
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    match name {
        Some(n) if c.abs().is_one() => out.push_str(n),
        Some(n) => {
            out.push_str(&magnitude);
            out.push(' ');
            out.push_str(n);
        }
        None => out.push_str(&magnitude),
    }
}

/// Provenance class of an original constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OriginKind {
    Model,
    Comparison,
    Hypothesis,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OriginTag {
    pub kind: OriginKind,
    /// Pair identifier such as `a6~a9` for comparison constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl OriginTag {
    pub fn model() -> Self {
        Self { kind: OriginKind::Model, reference: None }
    }

    pub fn comparison(pair: impl Into<String>) -> Self {
        Self { kind: OriginKind::Comparison, reference: Some(pair.into()) }
    }

    pub fn hypothesis(text: impl Into<String>) -> Self {
        Self { kind: OriginKind::Hypothesis, reference: Some(text.into()) }
    }

    pub fn derived() -> Self {
        Self { kind: OriginKind::Derived, reference: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
            RelOp::Eq => "=",
            RelOp::Lt => "<",
            RelOp::Gt => ">",
        }
    }
}

/// A constraint as written: `lhs op rhs`, before canonicalisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub lhs: LinearExpr,
    pub op: RelOp,
    pub rhs: LinearExpr,
    pub origin: OriginTag,
}

impl Relation {
    pub fn new(lhs: LinearExpr, op: RelOp, rhs: LinearExpr, origin: OriginTag) -> Self {
        Self { lhs, op, rhs, origin }
    }

    /// Variables written on either side, including ones that cancel out.
    pub fn mentioned(&self) -> BTreeSet<Var> {
        self.lhs.vars().chain(self.rhs.vars()).collect()
    }

    pub fn display(&self, vars: &Variables) -> String {
        let order: Vec<Var> = vars.iter().collect();
        format!(
            "{} {} {}",
            self.lhs.display_with(vars, &order),
            self.op.symbol(),
            self.rhs.display_with(vars, &order)
        )
    }
}

/// Parses a textual linear relation such as `0.5 w1 + 2*w2 - 1 >= w3`.
///
/// Unknown names are declared in `vars`. Products of two variables are
/// rejected as non-linear.
pub fn parse_relation(text: &str, vars: &mut Variables, origin: OriginTag) -> Result<Relation> {
    let ops = [(">=", RelOp::Ge), ("<=", RelOp::Le), ("=>", RelOp::Ge), ("=<", RelOp::Le)];
    let mut split = None;
    for (sym, op) in ops {
        if let Some(pos) = text.find(sym) {
            split = Some((pos, sym.len(), op));
            break;
        }
    }
    if split.is_none() {
        for (ch, op) in [('<', RelOp::Lt), ('>', RelOp::Gt), ('=', RelOp::Eq)] {
            if let Some(pos) = text.find(ch) {
                split = Some((pos, 1, op));
                break;
            }
        }
    }
    let (pos, len, op) = split.ok_or_else(|| Error::Parse {
        location: text.to_string(),
        message: "missing relation operator".into(),
    })?;
    let lhs = parse_expr(&text[..pos], vars, text)?;
    let rhs = parse_expr(&text[pos + len..], vars, text)?;
    Ok(Relation::new(lhs, op, rhs, origin))
}

/// Parses every line, reporting the failing line number on error.
pub fn parse_relations<'a, I>(lines: I, vars: &mut Variables) -> Result<Vec<Relation>>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let relation = parse_relation(line, vars, OriginTag::model()).map_err(|e| match e {
            Error::NonLinear { term, .. } => Error::NonLinear { constraint: i + 1, term },
            Error::Parse { message, .. } => Error::Parse { location: format!("constraint {}", i + 1), message },
            other => other,
        })?;
        out.push(relation);
    }
    Ok(out)
}

fn parse_expr(text: &str, vars: &mut Variables, whole: &str) -> Result<LinearExpr> {
    let mut expr = LinearExpr::zero();
    let mut sign = Rational::one();
    let mut current = String::new();
    let mut terms: Vec<(Rational, String)> = Vec::new();
    let flush = |current: &mut String, sign: &Rational, terms: &mut Vec<(Rational, String)>| {
        let t = current.trim().to_string();
        if !t.is_empty() {
            terms.push((sign.clone(), t));
        }
        current.clear();
    };
    let chars: Vec<char> = text.chars().collect();
    for (i, ch) in chars.iter().enumerate() {
        match ch {
            '+' | '-' => {
                // exponent sign inside a number literal such as 1e-3
                let prev = current.trim_end().chars().last();
                let in_exponent = matches!(prev, Some('e') | Some('E'))
                    && current.trim().chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.')
                    && i + 1 < chars.len()
                    && chars[i + 1].is_ascii_digit();
                if in_exponent {
                    current.push(*ch);
                    continue;
                }
                if current.trim().is_empty() {
                    if *ch == '-' {
                        sign = -sign;
                    }
                } else {
                    flush(&mut current, &sign, &mut terms);
                    sign = if *ch == '-' { -Rational::one() } else { Rational::one() };
                }
            }
            _ => current.push(*ch),
        }
    }
    flush(&mut current, &sign, &mut terms);

    for (sign, term) in terms {
        let factors: Vec<&str> = term
            .split(['*', ' '])
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect();
        let mut coef = sign;
        let mut var: Option<Var> = None;
        for f in factors {
            if f.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                let value = parse_rational(f).map_err(|e| Error::Parse {
                    location: whole.to_string(),
                    message: e.to_string(),
                })?;
                coef *= value;
            } else if f.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '@') {
                if var.is_some() {
                    return Err(Error::NonLinear { constraint: 0, term: term.clone() });
                }
                var = Some(vars.intern(f));
            } else {
                return Err(Error::Parse {
                    location: whole.to_string(),
                    message: format!("unexpected token `{f}`"),
                });
            }
        }
        match var {
            Some(v) => expr.add_term(v, coef),
            None => expr.add_constant(&coef),
        }
    }
    Ok(expr)
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
