//! Brute-force feasibility check by basic-solution enumeration. Slow but
//! independent of the elimination engine.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::engine::{canonicalize, LabeledInequality};
use crate::error::{Error, Result};
use crate::expr::{Relation, Var};
use crate::rational::Rational;

pub const ORACLE_MAX_VARIABLES: usize = 6;

pub type Point = BTreeMap<Var, Rational>;

/// Whether the relations admit a solution (strict ones with `epsilon` slack).
pub fn oracle_feasible(relations: &[Relation], epsilon: &Rational) -> Result<bool> {
    let ineqs = canonicalize(relations, epsilon)?;
    oracle_feasible_ineqs(&ineqs)
}

pub fn oracle_feasible_ineqs(ineqs: &[LabeledInequality]) -> Result<bool> {
    Ok(Basics::new(ineqs)?.find(true).is_some())
}

/// Every vertex of the polyhedron (empty unless it is pointed).
pub fn oracle_vertices(relations: &[Relation], epsilon: &Rational) -> Result<Vec<Point>> {
    let ineqs = canonicalize(relations, epsilon)?;
    oracle_vertices_ineqs(&ineqs)
}

pub fn oracle_vertices_ineqs(ineqs: &[LabeledInequality]) -> Result<Vec<Point>> {
    let b = Basics::new(ineqs)?;
    if b.rank < b.vars.len() {
        return Ok(Vec::new());
    }
    Ok(b.find(false).map(|p| p.into_iter().collect()).unwrap_or_default())
}

/// Rows `a x <= b` over the variables that occur.
struct Basics {
    vars: Vec<Var>,
    rows: Vec<(Vec<Rational>, Rational)>,
    constants_ok: bool,
    rank: usize,
}

impl Basics {
    fn new(ineqs: &[LabeledInequality]) -> Result<Self> {
        let vars: Vec<Var> = ineqs
            .iter()
            .flat_map(|i| i.body.vars())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if vars.len() > ORACLE_MAX_VARIABLES {
            return Err(Error::OracleTooLarge { max: ORACLE_MAX_VARIABLES, got: vars.len() });
        }
        let mut rows = Vec::new();
        let mut constants_ok = true;
        for ineq in ineqs {
            if ineq.body.is_constant() {
                constants_ok &= !ineq.body.constant_term().is_positive();
                continue;
            }
            let a = vars.iter().map(|v| ineq.body.coef(*v)).collect();
            rows.push((a, -ineq.body.constant_term().clone()));
        }
        let all: Vec<usize> = (0..rows.len()).collect();
        let rank = rank_of(&rows, &all, vars.len());
        Ok(Self { vars, rows, constants_ok, rank })
    }

    fn satisfies(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|(a, b)| {
            let lhs: Rational = a.iter().zip(x).map(|(c, v)| c * v).sum();
            lhs <= *b
        })
    }

    fn point(&self, x: Vec<Rational>) -> Point {
        self.vars.iter().copied().zip(x).collect()
    }

    /// Feasible basic solutions; stops at the first one when `first`.
    fn find(&self, first: bool) -> Option<BTreeSet<Point>> {
        if !self.constants_ok {
            return None;
        }
        let n = self.vars.len();
        let mut found = BTreeSet::new();
        if self.rank == 0 {
            let x = vec![Rational::zero(); n];
            if self.satisfies(&x) {
                found.insert(self.point(x));
            }
            return (!found.is_empty()).then_some(found);
        }
        let mut subset: Vec<usize> = (0..self.rank).collect();
        loop {
            if let Some(x) = solve(&self.rows, &subset, n, self.rank) {
                if self.satisfies(&x) {
                    found.insert(self.point(x));
                    if first {
                        return Some(found);
                    }
                }
            }
            if !next_combination(&mut subset, self.rows.len()) {
                break;
            }
        }
        (!found.is_empty()).then_some(found)
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Row-reduces the selected rows as equalities.
fn reduce(rows: &[(Vec<Rational>, Rational)], pick: &[usize], n: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = pick
        .iter()
        .map(|&r| {
            let mut row = rows[r].0.clone();
            row.push(rows[r].1.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot).skip(col) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (m, pivots)
}

fn rank_of(rows: &[(Vec<Rational>, Rational)], pick: &[usize], n: usize) -> usize {
    reduce(rows, pick, n).1.len()
}

/// Solution of the selected equalities with free variables at zero, if the
/// rows are independent.
fn solve(rows: &[(Vec<Rational>, Rational)], pick: &[usize], n: usize, rank: usize) -> Option<Vec<Rational>> {
    let (m, pivots) = reduce(rows, pick, n);
    if pivots.len() != rank {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = m[r][n].clone();
    }
    Some(x)
}
