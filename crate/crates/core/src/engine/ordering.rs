use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::LabeledInequality;
use crate::error::{Error, Result};
use crate::expr::{Var, Variables};

/// Elimination indices: `order[0]` is `x_1` (eliminated last), the final
/// entry is `x_s` (eliminated first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Var>", into = "Vec<Var>")]
pub struct Ordering {
    order: Vec<Var>,
    index: BTreeMap<Var, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingStrategy {
    /// More frequently written variables get lower indices; ties keep
    /// declaration order.
    Frequency,
    Explicit(Vec<Var>),
}

impl Ordering {
    pub fn from_vec(order: Vec<Var>) -> Self {
        let index = order.iter().enumerate().map(|(i, v)| (*v, i + 1)).collect();
        Self { order, index }
    }

    /// One-based elimination index of `v`.
    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn var_at(&self, index: usize) -> Var {
        self.order[index - 1]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn vars(&self) -> &[Var] {
        &self.order
    }

    /// Same relative order with `v` moved to index 1.
    pub fn with_first(&self, v: Var) -> Self {
        let mut order = vec![v];
        order.extend(self.order.iter().copied().filter(|x| *x != v));
        Self::from_vec(order)
    }

    pub fn names(&self, vars: &Variables) -> Vec<String> {
        self.order.iter().map(|v| vars.name(*v).to_string()).collect()
    }
}

impl From<Vec<Var>> for Ordering {
    fn from(order: Vec<Var>) -> Self {
        Ordering::from_vec(order)
    }
}

impl From<Ordering> for Vec<Var> {
    fn from(o: Ordering) -> Self {
        o.order
    }
}

/// Chooses elimination indices for every declared variable.
pub fn order_variables(
    ineqs: &[LabeledInequality],
    vars: &Variables,
    strategy: &OrderingStrategy,
) -> Result<Ordering> {
    match strategy {
        OrderingStrategy::Frequency => {
            let mut counts = vec![0usize; vars.len()];
            for ineq in ineqs {
                for v in &ineq.mentioned {
                    if let Some(c) = counts.get_mut(v.0) {
                        *c += 1;
                    }
                }
            }
            let mut order: Vec<Var> = vars.iter().collect();
            // stable sort keeps declaration order on ties
            order.sort_by(|a, b| counts[b.0].cmp(&counts[a.0]));
            Ok(Ordering::from_vec(order))
        }
        OrderingStrategy::Explicit(perm) => {
            let unique: BTreeSet<Var> = perm.iter().copied().collect();
            if unique.len() != perm.len() {
                return Err(Error::InvalidOrdering("a variable appears twice".into()));
            }
            if let Some(v) = perm.iter().find(|v| !vars.contains(**v)) {
                return Err(Error::InvalidOrdering(format!("undeclared variable {v}")));
            }
            if let Some(missing) = vars.iter().find(|v| !unique.contains(v)) {
                return Err(Error::InvalidOrdering(format!("`{}` is not placed", vars.name(missing))));
            }
            Ok(Ordering::from_vec(perm.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::canonicalize;
    use crate::expr::{parse_relations, Variables};
    use crate::rational::ratio;

    fn system(lines: &[&str]) -> (Variables, Vec<LabeledInequality>) {
        let mut vars = Variables::new();
        let rels = parse_relations(lines.iter().copied(), &mut vars).unwrap();
        let ineqs = canonicalize(&rels, &ratio(1, 100)).unwrap();
        (vars, ineqs)
    }

    #[test]
    fn frequent_variables_come_first() {
        let (vars, ineqs) = system(&["y >= 0", "x + y <= 3", "x >= y", "z >= y"]);
        let ord = order_variables(&ineqs, &vars, &OrderingStrategy::Frequency).unwrap();
        assert_eq!(ord.names(&vars), ["y", "x", "z"]);
        assert_eq!(ord.index_of(vars.lookup("z").unwrap()), Some(3));
    }

    #[test]
    fn ties_keep_declaration_order() {
        let (vars, ineqs) = system(&["b >= 0", "a >= 0", "c >= 0"]);
        let ord = order_variables(&ineqs, &vars, &OrderingStrategy::Frequency).unwrap();
        assert_eq!(ord.names(&vars), ["b", "a", "c"]);
    }

    #[test]
    fn single_variable_is_identity() {
        let (vars, ineqs) = system(&["x >= 0", "x <= 2"]);
        let ord = order_variables(&ineqs, &vars, &OrderingStrategy::Frequency).unwrap();
        assert_eq!(ord.names(&vars), ["x"]);
    }

    #[test]
    fn explicit_permutation_is_returned_verbatim() {
        let (vars, ineqs) = system(&["w1 + w2 + w3 = 1"]);
        let w = |n: &str| vars.lookup(n).unwrap();
        let perm = vec![w("w2"), w("w3"), w("w1")];
        let ord = order_variables(&ineqs, &vars, &OrderingStrategy::Explicit(perm.clone())).unwrap();
        assert_eq!(ord.vars(), perm.as_slice());
    }

    #[test]
    fn explicit_permutation_must_cover_every_variable() {
        let (vars, ineqs) = system(&["w1 + w2 + w3 = 1"]);
        let w = |n: &str| vars.lookup(n).unwrap();
        let missing = OrderingStrategy::Explicit(vec![w("w2"), w("w1")]);
        assert!(matches!(order_variables(&ineqs, &vars, &missing), Err(Error::InvalidOrdering(_))));
        let dup = OrderingStrategy::Explicit(vec![w("w2"), w("w2"), w("w1")]);
        assert!(matches!(order_variables(&ineqs, &vars, &dup), Err(Error::InvalidOrdering(_))));
    }

    #[test]
    fn with_first_moves_one_variable() {
        let ord = Ordering::from_vec(vec![Var(0), Var(1), Var(2)]);
        assert_eq!(ord.with_first(Var(2)).vars(), &[Var(2), Var(0), Var(1)]);
    }
}
