//! Bounds-method redundancy: interval boxes propagated upward from the
//! constant bounds of the first variable.

use num_traits::Signed;

use crate::engine::ops::{Bound, BoundKind};
use crate::engine::system::{LevelStore, SDSystem};
use crate::engine::Ordering;
use crate::expr::{LinearExpr, Var};
use crate::rational::Rational;

/// Constant interval per elimination level (index 0 is `x_1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxBounds {
    lo: Vec<Option<Rational>>,
    hi: Vec<Option<Rational>>,
}

impl BoxBounds {
    pub(crate) fn compute(levels: &[LevelStore], ordering: &Ordering) -> Self {
        let n = levels.len();
        let mut b = BoxBounds { lo: vec![None; n], hi: vec![None; n] };
        for (j, store) in levels.iter().enumerate() {
            let lo = store
                .lower
                .iter()
                .filter_map(|bd| b.extreme(&bd.expr, ordering, false))
                .max();
            let hi = store
                .upper
                .iter()
                .filter_map(|bd| b.extreme(&bd.expr, ordering, true))
                .min();
            b.lo[j] = lo;
            b.hi[j] = hi;
        }
        b
    }

    pub fn interval(&self, v: Var, ordering: &Ordering) -> (Option<&Rational>, Option<&Rational>) {
        match ordering.index_of(v) {
            Some(i) => (self.lo[i - 1].as_ref(), self.hi[i - 1].as_ref()),
            None => (None, None),
        }
    }

    fn finite(&self, v: Var, ordering: &Ordering) -> bool {
        matches!(self.interval(v, ordering), (Some(_), Some(_)))
    }

    /// Max (or min) of `expr` over the box, if every needed side is finite.
    fn extreme(&self, expr: &LinearExpr, ordering: &Ordering, maximize: bool) -> Option<Rational> {
        let mut acc = expr.constant_term().clone();
        for (v, c) in expr.terms() {
            let (lo, hi) = self.interval(v, ordering);
            let pick = if c.is_positive() == maximize { hi } else { lo };
            acc += c * pick?;
        }
        Some(acc)
    }

    /// True when bound expression `f` makes `g` redundant for a bound of
    /// `kind` on the box.
    pub(crate) fn dominates(&self, f: &LinearExpr, g: &LinearExpr, kind: BoundKind, ordering: &Ordering) -> bool {
        if f == g {
            return true;
        }
        if !f.vars().chain(g.vars()).all(|v| self.finite(v, ordering)) {
            return false;
        }
        let diff = f.minus(g);
        match kind {
            BoundKind::Upper => self.extreme(&diff, ordering, true).is_some_and(|m| !m.is_positive()),
            BoundKind::Lower => self.extreme(&diff, ordering, false).is_some_and(|m| !m.is_negative()),
        }
    }
}

/// Whether some stored bound of the same variable and kind already implies
/// `candidate` on the box derived from `system`.
pub fn is_redundant_bounds_method(system: &SDSystem, candidate: &Bound) -> bool {
    let bx = BoxBounds::compute(system.levels(), system.ordering());
    stored_dominates(system, &bx, candidate)
}

pub(crate) fn stored_dominates(system: &SDSystem, bx: &BoxBounds, candidate: &Bound) -> bool {
    let (lower, upper) = system.bounds_of(candidate.var);
    let peers = match candidate.kind {
        BoundKind::Lower => lower,
        BoundKind::Upper => upper,
    };
    peers
        .iter()
        .any(|f| bx.dominates(&f.expr, &candidate.expr, candidate.kind, system.ordering()))
}
