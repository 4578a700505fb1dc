use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{LinearExpr, OriginTag, RelOp, Relation, Var};
use crate::rational::Rational;

pub type IneqId = u32;

/// Genealogy triple `{id, lower parent, upper parent}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub id: IneqId,
    pub lower: IneqId,
    pub upper: IneqId,
}

impl Label {
    pub fn original(id: IneqId) -> Self {
        Self { id, lower: id, upper: id }
    }

    pub fn is_original(&self) -> bool {
        self.lower == self.id && self.upper == self.id
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.id, self.lower, self.upper)
    }
}

/// A registered inequality `body <= 0` together with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInequality {
    pub label: Label,
    pub body: LinearExpr,
    pub origin: OriginTag,
    /// Variables written in the source relation, cancelled ones included.
    /// Drives frequency ordering.
    pub mentioned: BTreeSet<Var>,
}

impl LabeledInequality {
    pub fn id(&self) -> IneqId {
        self.label.id
    }

    pub fn is_original(&self) -> bool {
        self.label.is_original()
    }
}

/// Crossover product awaiting registration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub lower: IneqId,
    pub upper: IneqId,
    pub body: LinearExpr,
}

/// Rewrites raw relations into numbered `body <= 0` inequalities labelled
/// `{l,l,l}`, starting at id 1.
pub fn canonicalize(relations: &[Relation], epsilon: &Rational) -> Result<Vec<LabeledInequality>> {
    canonicalize_from(relations, epsilon, 1)
}

pub(crate) fn canonicalize_from(
    relations: &[Relation],
    epsilon: &Rational,
    first_id: IneqId,
) -> Result<Vec<LabeledInequality>> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositiveEpsilon);
    }
    let eps = LinearExpr::constant(epsilon.clone());
    let mut out = Vec::with_capacity(relations.len() + 4);
    let mut next = first_id;
    for rel in relations {
        let bodies: Vec<LinearExpr> = match rel.op {
            RelOp::Le => vec![rel.lhs.minus(&rel.rhs)],
            RelOp::Ge => vec![rel.rhs.minus(&rel.lhs)],
            RelOp::Lt => vec![rel.lhs.plus(&eps).minus(&rel.rhs)],
            RelOp::Gt => vec![rel.rhs.plus(&eps).minus(&rel.lhs)],
            // x = y  becomes  x >= y  followed by  x <= y
            RelOp::Eq => vec![rel.rhs.minus(&rel.lhs), rel.lhs.minus(&rel.rhs)],
        };
        let mentioned = rel.mentioned();
        for body in bodies {
            out.push(LabeledInequality {
                label: Label::original(next),
                body,
                origin: rel.origin.clone(),
                mentioned: mentioned.clone(),
            });
            next += 1;
        }
    }
    Ok(out)
}

/// True iff every coefficient vanishes and the constant is positive.
pub fn detect_contradiction(body: &LinearExpr) -> bool {
    body.is_constant() && body.constant_term().is_positive()
}

pub(crate) fn is_tautology(body: &LinearExpr) -> bool {
    body.is_constant() && !body.constant_term().is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_relation, Variables};
    use crate::rational::{int, ratio};

    fn rel(text: &str, vars: &mut Variables) -> Relation {
        parse_relation(text, vars, OriginTag::model()).unwrap()
    }

    #[test]
    fn equality_splits_into_ge_then_le() {
        let mut vars = Variables::new();
        let r = rel("w1 + w2 + w3 = 1", &mut vars);
        let out = canonicalize(&[r], &ratio(1, 100)).unwrap();
        assert_eq!(out.len(), 2);
        let w1 = vars.lookup("w1").unwrap();
        // first half: sum >= 1, i.e. 1 - sum <= 0
        assert_eq!(out[0].body.coef(w1), int(-1));
        assert_eq!(out[0].body.constant_term(), &int(1));
        assert_eq!(out[1].body.coef(w1), int(1));
        assert_eq!(out[1].body.constant_term(), &int(-1));
        assert_eq!(out[0].label, Label::original(1));
        assert_eq!(out[1].label, Label::original(2));
    }

    #[test]
    fn strict_relations_gain_epsilon_slack() {
        let mut vars = Variables::new();
        let gt = rel("x > y", &mut vars);
        let lt = rel("x < y", &mut vars);
        let out = canonicalize(&[gt, lt], &ratio(1, 100)).unwrap();
        let x = vars.lookup("x").unwrap();
        let y = vars.lookup("y").unwrap();
        assert_eq!(out[0].body.coef(y), int(1));
        assert_eq!(out[0].body.coef(x), int(-1));
        assert_eq!(out[0].body.constant_term(), &ratio(1, 100));
        assert_eq!(out[1].body.coef(x), int(1));
        assert_eq!(out[1].body.constant_term(), &ratio(1, 100));
    }

    #[test]
    fn epsilon_must_be_positive() {
        let mut vars = Variables::new();
        let r = rel("x > y", &mut vars);
        assert_eq!(canonicalize(&[r], &int(0)).unwrap_err(), Error::NonPositiveEpsilon);
    }

    #[test]
    fn contradiction_classification() {
        assert!(detect_contradiction(&LinearExpr::constant(ratio(1, 50))));
        assert!(!detect_contradiction(&LinearExpr::constant(int(0))));
        assert!(!detect_contradiction(&LinearExpr::constant(int(-3))));
        let mut vars = Variables::new();
        let x = vars.intern("x");
        assert!(!detect_contradiction(&LinearExpr::term(x, int(1))));
    }
}
