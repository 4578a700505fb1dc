//! Additive value model: turns a performance table and pairwise
//! comparisons into linear constraints over marginal-value variables.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{LinearExpr, OriginTag, RelOp, Relation, Var, Variables};
use crate::rational::{format_exact, ratio, Rational};

/// A gain-type criterion with `gamma` equally spaced characteristic points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criterion {
    pub name: String,
    pub gamma: usize,
    pub domain_low: Rational,
    pub domain_high: Rational,
}

impl Criterion {
    pub fn new(name: impl Into<String>, domain_low: Rational, domain_high: Rational) -> Self {
        Self { name: name.into(), gamma: 2, domain_low, domain_high }
    }

    pub fn with_gamma(mut self, gamma: usize) -> Self {
        self.gamma = gamma;
        self
    }

    /// `g^1 .. g^gamma`.
    pub fn characteristic_points(&self) -> Vec<Rational> {
        let span = &self.domain_high - &self.domain_low;
        let steps = Rational::from_integer((self.gamma as i64 - 1).into());
        (0..self.gamma)
            .map(|s| &self.domain_low + &span * Rational::from_integer((s as i64).into()) / &steps)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.domain_high <= self.domain_low {
            return Err(Error::DegenerateCriterion(self.name.clone()));
        }
        if self.gamma < 2 {
            return Err(Error::InvalidModel(format!("criterion `{}` needs at least 2 characteristic points", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerformanceTable {
    alternatives: Vec<String>,
    rows: Vec<Vec<Rational>>,
}

impl PerformanceTable {
    /// `rows[i][j]` is the performance of alternative `i` on criterion `j`.
    pub fn new(alternatives: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if alternatives.len() != rows.len() {
            return Err(Error::InvalidModel("one performance row per alternative is required".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &alternatives {
            if !seen.insert(a) {
                return Err(Error::InvalidModel(format!("alternative `{a}` is listed twice")));
            }
        }
        if let Some(width) = rows.first().map(Vec::len) {
            if let Some(i) = rows.iter().position(|r| r.len() != width) {
                return Err(Error::InvalidModel(format!("row of `{}` is incomplete", alternatives[i])));
            }
        }
        Ok(Self { alternatives, rows })
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn criteria_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.alternatives
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAlternative(name.to_string()))
    }

    pub fn perf(&self, alternative: usize, criterion: usize) -> &Rational {
        &self.rows[alternative][criterion]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Smallest and largest observed performance on criterion `j`.
    pub fn observed_domain(&self, j: usize) -> Option<(Rational, Rational)> {
        let col = self.rows.iter().map(|r| &r[j]);
        Some((col.clone().min()?.clone(), col.max()?.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairRelation {
    Strict,
    Indifferent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Comparison {
    pub left: String,
    pub relation: PairRelation,
    pub right: String,
}

impl Comparison {
    pub fn strict(left: impl Into<String>, right: impl Into<String>) -> Self {
        Self { left: left.into(), relation: PairRelation::Strict, right: right.into() }
    }

    pub fn indifferent(left: impl Into<String>, right: impl Into<String>) -> Self {
        Self { left: left.into(), relation: PairRelation::Indifferent, right: right.into() }
    }

    /// Pair identifier such as `a6~a9` or `a9>a8`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    /// Parses `a>b`, `a~b` (also `≻`, `∼`).
    pub fn parse(text: &str) -> Result<Self> {
        let chain = ReferenceComparisons::from_chain(text)?;
        match chain.pairs.as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(Error::Parse { location: text.into(), message: "expected exactly one comparison".into() }),
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.relation {
            PairRelation::Strict => '>',
            PairRelation::Indifferent => '~',
        };
        write!(f, "{}{}{}", self.left, sym, self.right)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReferenceComparisons {
    pairs: Vec<Comparison>,
}

impl ReferenceComparisons {
    pub fn new(pairs: Vec<Comparison>) -> Self {
        Self { pairs }
    }

    /// Expands `a6 ~ a9 > a8 > a7` into consecutive pairs.
    pub fn from_chain(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut links = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            let link = match ch {
                '>' | '≻' => Some(PairRelation::Strict),
                '~' | '∼' => Some(PairRelation::Indifferent),
                _ => None,
            };
            match link {
                Some(rel) => {
                    names.push(std::mem::take(&mut current));
                    links.push(rel);
                }
                None => current.push(ch),
            }
        }
        names.push(current);
        let names: Vec<String> = names.iter().map(|n| n.trim().to_string()).collect();
        if let Some(pos) = names.iter().position(String::is_empty) {
            if names.len() > 1 || !text.trim().is_empty() {
                return Err(Error::Parse {
                    location: format!("ranking `{text}`"),
                    message: format!("missing alternative at position {}", pos + 1),
                });
            }
            return Ok(Self::default());
        }
        let pairs = links
            .iter()
            .enumerate()
            .map(|(i, rel)| Comparison { left: names[i].clone(), relation: *rel, right: names[i + 1].clone() })
            .collect();
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[Comparison] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, c: Comparison) {
        self.pairs.push(c);
    }

    /// Removes the comparison with identifier `id`; false if absent.
    pub fn remove(&mut self, id: &str) -> bool {
        let before = self.pairs.len();
        self.pairs.retain(|c| c.id() != id);
        self.pairs.len() != before
    }

    pub fn retain_ids(&self, keep: &BTreeSet<String>) -> Self {
        Self { pairs: self.pairs.iter().filter(|c| keep.contains(&c.id())).cloned().collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Marginals {
    #[default]
    Linear,
    Piecewise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub epsilon: Rational,
    pub marginals: Marginals,
    pub criteria_subset: Option<Vec<String>>,
    /// Slack of strict robustness hypotheses; `epsilon` when unset.
    pub hypothesis_epsilon: Option<Rational>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { epsilon: ratio(1, 100), marginals: Marginals::Linear, criteria_subset: None, hypothesis_epsilon: None }
    }
}

impl ModelConfig {
    pub fn hypothesis_epsilon(&self) -> &Rational {
        self.hypothesis_epsilon.as_ref().unwrap_or(&self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub table: PerformanceTable,
    pub criteria: Vec<Criterion>,
    pub comparisons: ReferenceComparisons,
    pub config: ModelConfig,
}

impl Problem {
    pub fn new(
        table: PerformanceTable,
        criteria: Vec<Criterion>,
        comparisons: ReferenceComparisons,
        config: ModelConfig,
    ) -> Result<Self> {
        let p = Self { table, criteria, comparisons, config };
        p.validate()?;
        Ok(p)
    }

    /// Criteria whose domains are the observed minimum and maximum.
    pub fn observed_criteria(table: &PerformanceTable, names: &[String]) -> Vec<Criterion> {
        names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let (lo, hi) = table.observed_domain(j).unwrap_or((Rational::zero(), Rational::one()));
                Criterion::new(name.clone(), lo, hi)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.config.epsilon.is_positive() || !self.config.hypothesis_epsilon().is_positive() {
            return Err(Error::NonPositiveEpsilon);
        }
        if self.table.criteria_count() != self.criteria.len() && !self.table.is_empty() {
            return Err(Error::InvalidModel("table width differs from the number of criteria".into()));
        }
        let mut names = BTreeSet::new();
        for c in &self.criteria {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidModel(format!("criterion `{}` is listed twice", c.name)));
            }
            if self.config.marginals == Marginals::Linear && c.gamma != 2 {
                return Err(Error::InvalidModel(format!(
                    "criterion `{}` has {} characteristic points but marginals are linear",
                    c.name, c.gamma
                )));
            }
        }
        for (i, row) in self.table.rows().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let c = &self.criteria[j];
                if v < &c.domain_low || v > &c.domain_high {
                    return Err(Error::OutOfDomain {
                        criterion: c.name.clone(),
                        alternative: self.table.alternatives()[i].clone(),
                        value: format_exact(v),
                    });
                }
            }
        }
        if let Some(subset) = &self.config.criteria_subset {
            if subset.is_empty() {
                return Err(Error::InvalidModel("criteria subset is empty".into()));
            }
            for name in subset {
                self.criterion_index(name)?;
            }
        }
        let mut ids = BTreeSet::new();
        for c in self.comparisons.pairs() {
            self.table.index_of(&c.left)?;
            self.table.index_of(&c.right)?;
            if c.left == c.right {
                return Err(Error::SelfComparison(c.left.clone()));
            }
            if !ids.insert(c.id()) {
                return Err(Error::DuplicateComparison(c.id()));
            }
        }
        Ok(())
    }

    pub fn criterion_index(&self, name: &str) -> Result<usize> {
        self.criteria
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCriterion(name.to_string()))
    }

    /// Copy restricted to the given criteria (normalization over them only).
    pub fn with_criteria_subset(&self, names: Vec<String>) -> Self {
        let mut p = self.clone();
        p.config.criteria_subset = Some(names);
        p
    }

    pub fn with_comparisons(&self, comparisons: ReferenceComparisons) -> Self {
        let mut p = self.clone();
        p.comparisons = comparisons;
        p
    }
}

/// `(g_j(a) - low) / (high - low)` for every alternative.
pub fn rescale(table: &PerformanceTable, criterion: &Criterion, j: usize) -> Result<Vec<Rational>> {
    criterion.validate()?;
    let span = &criterion.domain_high - &criterion.domain_low;
    Ok(table.rows().iter().map(|r| (&r[j] - &criterion.domain_low) / &span).collect())
}

/// Interpolated marginal value of `perf`. `points[s-2]` is the variable of
/// characteristic point `s` (`s >= 2`); the first point is fixed at zero.
pub fn marginal_value_expr(criterion: &Criterion, perf: &Rational, points: &[Var]) -> Result<LinearExpr> {
    criterion.validate()?;
    if points.len() + 1 != criterion.gamma {
        return Err(Error::InvalidModel(format!("criterion `{}` expects {} point variables", criterion.name, criterion.gamma - 1)));
    }
    if perf < &criterion.domain_low || perf > &criterion.domain_high {
        return Err(Error::OutOfDomain {
            criterion: criterion.name.clone(),
            alternative: String::new(),
            value: format_exact(perf),
        });
    }
    let g = criterion.characteristic_points();
    let var_of = |s: usize| if s == 1 { None } else { Some(points[s - 2]) };
    let mut expr = LinearExpr::zero();
    if perf == &g[criterion.gamma - 1] {
        expr.add_term(points[criterion.gamma - 2], Rational::one());
        return Ok(expr);
    }
    // g^{s-1} <= perf < g^s
    let s = (2..=criterion.gamma).find(|&s| perf < &g[s - 1]).expect("perf below the top point");
    let t = (perf - &g[s - 2]) / (&g[s - 1] - &g[s - 2]);
    if let Some(v) = var_of(s - 1) {
        expr.add_term(v, Rational::one() - &t);
    }
    if let Some(v) = var_of(s) {
        expr.add_term(v, t);
    }
    Ok(expr)
}

/// Variables and value expressions of one problem.
#[derive(Debug, Clone)]
pub struct UtaModel {
    vars: Variables,
    active: Vec<usize>,
    points: Vec<Vec<Var>>,
    values: Vec<LinearExpr>,
    problem: Problem,
}

impl UtaModel {
    pub fn new(problem: &Problem) -> Result<Self> {
        problem.validate()?;
        let active: Vec<usize> = match &problem.config.criteria_subset {
            None => (0..problem.criteria.len()).collect(),
            Some(names) => {
                let wanted: BTreeSet<usize> =
                    names.iter().map(|n| problem.criterion_index(n)).collect::<Result<_>>()?;
                wanted.into_iter().collect()
            }
        };
        let mut vars = Variables::new();
        let mut points = Vec::with_capacity(active.len());
        for &j in &active {
            let c = &problem.criteria[j];
            let vs = match problem.config.marginals {
                Marginals::Linear => vec![vars.intern(&format!("w{}", j + 1))],
                Marginals::Piecewise => {
                    (2..=c.gamma).map(|s| vars.intern(&format!("u{}@s{}", j + 1, s))).collect()
                }
            };
            points.push(vs);
        }
        let mut values = Vec::with_capacity(problem.table.len());
        for (i, alt) in problem.table.alternatives().iter().enumerate() {
            let mut total = LinearExpr::zero();
            for (slot, &j) in active.iter().enumerate() {
                let m = marginal_value_expr(&problem.criteria[j], problem.table.perf(i, j), &points[slot]).map_err(|e| match e {
                    Error::OutOfDomain { criterion, value, .. } => {
                        Error::OutOfDomain { criterion, alternative: alt.clone(), value }
                    }
                    other => other,
                })?;
                total = total.plus(&m);
            }
            values.push(total);
        }
        Ok(Self { vars, active, points, values, problem: problem.clone() })
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Indices of the criteria taking part in the model.
    pub fn active_criteria(&self) -> &[usize] {
        &self.active
    }

    /// Comprehensive value `U(a)` of alternative `i`.
    pub fn value_expr(&self, i: usize) -> &LinearExpr {
        &self.values[i]
    }

    /// Monotonicity, normalization, then one relation per comparison.
    pub fn build_system(&self) -> Result<Vec<Relation>> {
        let mut out = Vec::new();
        for pts in &self.points {
            let mut prev = LinearExpr::zero();
            for &v in pts {
                out.push(Relation::new(LinearExpr::var(v), RelOp::Ge, prev, OriginTag::model()));
                prev = LinearExpr::var(v);
            }
        }
        let mut sum = LinearExpr::zero();
        for pts in &self.points {
            sum.add_term(*pts.last().expect("gamma >= 2"), Rational::one());
        }
        if !self.points.is_empty() {
            out.push(Relation::new(sum, RelOp::Eq, LinearExpr::constant(Rational::one()), OriginTag::model()));
        }
        for c in self.problem.comparisons.pairs() {
            out.push(self.comparison_relation(c)?);
        }
        Ok(out)
    }

    pub fn comparison_relation(&self, c: &Comparison) -> Result<Relation> {
        let l = self.problem.table.index_of(&c.left)?;
        let r = self.problem.table.index_of(&c.right)?;
        let op = match c.relation {
            PairRelation::Strict => RelOp::Gt,
            PairRelation::Indifferent => RelOp::Eq,
        };
        Ok(Relation::new(self.values[l].clone(), op, self.values[r].clone(), OriginTag::comparison(c.id())))
    }

    /// `U(a_k) >= U(a_i) + eps`: infeasible iff `a_i` is necessarily at
    /// least as good as `a_k`.
    pub fn necessary_hypothesis(&self, i: usize, k: usize) -> Relation {
        let mut rhs = self.values[i].clone();
        rhs.add_constant(self.problem.config.hypothesis_epsilon());
        let names = self.problem.table.alternatives();
        Relation::new(
            self.values[k].clone(),
            RelOp::Ge,
            rhs,
            OriginTag::hypothesis(format!("U({}) > U({})", names[k], names[i])),
        )
    }

    /// `U(a_i) >= U(a_k)`: feasible iff `a_i` is possibly at least as good.
    pub fn possible_hypothesis(&self, i: usize, k: usize) -> Relation {
        let names = self.problem.table.alternatives();
        Relation::new(
            self.values[i].clone(),
            RelOp::Ge,
            self.values[k].clone(),
            OriginTag::hypothesis(format!("U({}) >= U({})", names[i], names[k])),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn crit(low: i64, high: i64, gamma: usize) -> Criterion {
        Criterion::new("g", int(low), int(high)).with_gamma(gamma)
    }

    #[test]
    fn rescale_uses_the_domain() {
        let table = PerformanceTable::new(vec!["a".into(), "b".into()], vec![vec![int(35)], vec![int(0)]]).unwrap();
        let r = rescale(&table, &crit(0, 62, 2), 0).unwrap();
        assert_eq!(r, [ratio(35, 62), int(0)]);
        assert_eq!(rescale(&table, &crit(3, 3, 2), 0).unwrap_err(), Error::DegenerateCriterion("g".into()));
    }

    #[test]
    fn midpoint_splits_evenly() {
        let u = Var(0);
        let e = marginal_value_expr(&crit(0, 10, 2), &int(5), &[u]).unwrap();
        assert_eq!(e.coef(u), ratio(1, 2));
    }

    #[test]
    fn interpolates_inside_a_segment() {
        let (u2, u3) = (Var(0), Var(1));
        let e = marginal_value_expr(&crit(0, 100, 3), &int(25), &[u2, u3]).unwrap();
        assert_eq!(e.coef(u2), ratio(1, 2));
        assert_eq!(e.coef(u3), int(0));
        let e = marginal_value_expr(&crit(0, 100, 3), &int(75), &[u2, u3]).unwrap();
        assert_eq!((e.coef(u2), e.coef(u3)), (ratio(1, 2), ratio(1, 2)));
    }

    #[test]
    fn characteristic_points_map_to_single_variables() {
        let (u2, u3) = (Var(0), Var(1));
        let c = crit(0, 100, 3);
        assert_eq!(marginal_value_expr(&c, &int(50), &[u2, u3]).unwrap(), LinearExpr::var(u2));
        assert_eq!(marginal_value_expr(&c, &int(100), &[u2, u3]).unwrap(), LinearExpr::var(u3));
        assert!(marginal_value_expr(&c, &int(0), &[u2, u3]).unwrap().is_constant());
        assert!(matches!(marginal_value_expr(&c, &int(101), &[u2, u3]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn chain_expands_to_consecutive_pairs() {
        let chain = ReferenceComparisons::from_chain("a6 ~ a9 > a8 > a7").unwrap();
        let ids: Vec<String> = chain.pairs().iter().map(Comparison::id).collect();
        assert_eq!(ids, ["a6~a9", "a9>a8", "a8>a7"]);
        assert!(ReferenceComparisons::from_chain("").unwrap().is_empty());
        assert!(ReferenceComparisons::from_chain("a1 > > a2").is_err());
    }

    fn two_by_two(comparisons: ReferenceComparisons) -> Result<Problem> {
        let table = PerformanceTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![int(1), int(0)], vec![int(0), int(1)]],
        )?;
        let criteria = Problem::observed_criteria(&table, &["g1".into(), "g2".into()]);
        Problem::new(table, criteria, comparisons, ModelConfig::default())
    }

    #[test]
    fn validation_rejects_bad_comparisons() {
        let bad = ReferenceComparisons::new(vec![Comparison::strict("a", "a")]);
        assert_eq!(two_by_two(bad).unwrap_err(), Error::SelfComparison("a".into()));
        let unknown = ReferenceComparisons::new(vec![Comparison::strict("a", "z")]);
        assert_eq!(two_by_two(unknown).unwrap_err(), Error::UnknownAlternative("z".into()));
        let dup = ReferenceComparisons::new(vec![Comparison::strict("a", "b"), Comparison::strict("a", "b")]);
        assert_eq!(two_by_two(dup).unwrap_err(), Error::DuplicateComparison("a>b".into()));
    }

    #[test]
    fn linear_system_layout() {
        let p = two_by_two(ReferenceComparisons::from_chain("a ~ b").unwrap()).unwrap();
        let m = UtaModel::new(&p).unwrap();
        let rels = m.build_system().unwrap();
        // w1 >= 0, w2 >= 0, w1 + w2 = 1, U(a) = U(b)
        assert_eq!(rels.len(), 4);
        assert_eq!(rels[2].op, RelOp::Eq);
        assert_eq!(rels[3].origin, OriginTag::comparison("a~b"));
        assert_eq!(m.variables().name(Var(0)), "w1");
    }

    #[test]
    fn piecewise_with_two_points_matches_linear() {
        let p = two_by_two(ReferenceComparisons::from_chain("a > b").unwrap()).unwrap();
        let mut q = p.clone();
        q.config.marginals = Marginals::Piecewise;
        let lin = UtaModel::new(&p).unwrap().build_system().unwrap();
        let pw = UtaModel::new(&q).unwrap();
        assert_eq!(pw.variables().name(Var(1)), "u2@s2");
        assert_eq!(lin, pw.build_system().unwrap());
    }

    #[test]
    fn subset_keeps_full_positions() {
        let p = two_by_two(ReferenceComparisons::default()).unwrap().with_criteria_subset(vec!["g2".into()]);
        let m = UtaModel::new(&p).unwrap();
        assert_eq!(m.variables().len(), 1);
        assert_eq!(m.variables().name(Var(0)), "w2");
    }
}
