//! The isolating and crossover operations.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::engine::inequality::{detect_contradiction, Candidate, IneqId, LabeledInequality};
use crate::engine::Ordering;
use crate::error::{Error, Result};
use crate::expr::{LinearExpr, Var, Variables};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundKind {
    Lower,
    Upper,
}

/// `expr <= var` (lower) or `var <= expr` (upper); `expr` only mentions
/// variables with a smaller elimination index than `var`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bound {
    pub var: Var,
    pub kind: BoundKind,
    pub expr: LinearExpr,
    pub source: IneqId,
}

impl Bound {
    pub fn display(&self, vars: &Variables, ordering: &Ordering) -> String {
        let mut order: Vec<Var> = ordering.vars().to_vec();
        order.reverse();
        let rhs = self.expr.display_with(vars, &order);
        match self.kind {
            BoundKind::Lower => format!("{} >= {}", vars.name(self.var), rhs),
            BoundKind::Upper => format!("{} <= {}", vars.name(self.var), rhs),
        }
    }
}

/// Result of isolating the highest-indexed variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Isolated {
    Bound { var: Var, kind: BoundKind, expr: LinearExpr },
    Tautology,
    ImmediateContradiction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoOutcome {
    Bound(Bound),
    Tautology,
    ImmediateContradiction,
}

/// Isolates the highest-indexed variable of a registered inequality.
pub fn iso(ineq: &LabeledInequality, ordering: &Ordering) -> Result<IsoOutcome> {
    Ok(match isolate(&ineq.body, ordering)? {
        Isolated::Bound { var, kind, expr } => IsoOutcome::Bound(Bound { var, kind, expr, source: ineq.id() }),
        Isolated::Tautology => IsoOutcome::Tautology,
        Isolated::ImmediateContradiction => IsoOutcome::ImmediateContradiction,
    })
}

pub(crate) fn isolate(body: &LinearExpr, ordering: &Ordering) -> Result<Isolated> {
    let mut top: Option<(usize, Var)> = None;
    for v in body.vars() {
        let idx = ordering
            .index_of(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        if top.is_none_or(|(best, _)| idx > best) {
            top = Some((idx, v));
        }
    }
    let Some((_, var)) = top else {
        return Ok(if detect_contradiction(body) {
            Isolated::ImmediateContradiction
        } else {
            Isolated::Tautology
        });
    };
    // c*x + rest <= 0  =>  x <= -rest/c (c > 0)  or  x >= rest/|c| (c < 0)
    let c = body.coef(var);
    let mut rest = body.clone();
    rest.add_term(var, -c.clone());
    let magnitude = c.abs();
    let (kind, expr) = if c.is_positive() {
        (BoundKind::Upper, rest.scaled(&(-Rational::from_integer(1.into()) / &magnitude)))
    } else {
        (BoundKind::Lower, rest.scaled(&(Rational::from_integer(1.into()) / &magnitude)))
    };
    debug_assert!(!magnitude.is_zero());
    Ok(Isolated::Bound { var, kind, expr })
}

/// Crosses `lower <= x` with `x <= upper` into `lower - upper <= 0`.
pub fn cro(lower: &Bound, upper: &Bound) -> Result<Candidate> {
    if lower.kind != BoundKind::Lower || upper.kind != BoundKind::Upper || lower.var != upper.var {
        return Err(Error::CrossoverMismatch);
    }
    Ok(Candidate {
        lower: lower.source,
        upper: upper.source,
        body: lower.expr.minus(&upper.expr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::canonicalize;
    use crate::expr::{parse_relation, OriginTag, Variables};
    use crate::rational::{int, ratio};

    fn setup(text: &str) -> (Variables, Ordering, LabeledInequality) {
        let mut vars = Variables::from_names(["w1", "w2", "w3"]);
        let rel = parse_relation(text, &mut vars, OriginTag::model()).unwrap();
        let ineq = canonicalize(&[rel], &ratio(1, 100)).unwrap().remove(0);
        let ord = Ordering::from_vec(vars.iter().collect());
        (vars, ord, ineq)
    }

    #[test]
    fn isolates_highest_index_as_upper() {
        let (vars, ord, ineq) = setup("2 w3 - w1 <= 4");
        let IsoOutcome::Bound(b) = iso(&ineq, &ord).unwrap() else { panic!() };
        assert_eq!(b.var, vars.lookup("w3").unwrap());
        assert_eq!(b.kind, BoundKind::Upper);
        assert_eq!(b.expr.coef(vars.lookup("w1").unwrap()), ratio(1, 2));
        assert_eq!(b.expr.constant_term(), &int(2));
        assert_eq!(b.source, 1);
    }

    #[test]
    fn negative_coefficient_gives_lower_bound() {
        let (vars, ord, ineq) = setup("w1 + w2 + w3 >= 1");
        let IsoOutcome::Bound(b) = iso(&ineq, &ord).unwrap() else { panic!() };
        assert_eq!(b.kind, BoundKind::Lower);
        assert_eq!(b.expr.coef(vars.lookup("w2").unwrap()), int(-1));
        assert_eq!(b.expr.constant_term(), &int(1));
    }

    #[test]
    fn constant_bodies_classify() {
        let (_, ord, ineq) = setup("0 w1 <= 0");
        assert_eq!(iso(&ineq, &ord).unwrap(), IsoOutcome::Tautology);
        let (_, ord, ineq) = setup("0 w1 + 0.01 <= 0");
        assert_eq!(iso(&ineq, &ord).unwrap(), IsoOutcome::ImmediateContradiction);
    }

    #[test]
    fn crossover_checks_kinds_and_variable() {
        let b = |var, kind, c: i64, source| Bound { var: Var(var), kind, expr: LinearExpr::constant(int(c)), source };
        let lower = b(0, BoundKind::Lower, 0, 1);
        let upper = b(0, BoundKind::Upper, 0, 2);
        let cand = cro(&lower, &upper).unwrap();
        assert_eq!((cand.lower, cand.upper), (1, 2));
        assert!(cand.body.is_constant() && cand.body.constant_term().is_zero());
        assert_eq!(cro(&upper, &lower), Err(Error::CrossoverMismatch));
        assert_eq!(cro(&lower, &b(1, BoundKind::Upper, 0, 3)), Err(Error::CrossoverMismatch));
    }
}
