//! Decision-aiding analyses on top of the elimination engine.

mod oracle;
mod sets;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    canonicalize, order_variables, segment_with_epsilon, IneqId, Label, LabeledInequality, Mode, Ordering,
    OrderingStrategy, Policy, SDSystem, SegmentOptions,
};
use crate::error::{Error, Result};
use crate::expr::{OriginKind, Relation, Var, Variables};
use crate::rational::Rational;
use crate::uta::{Problem, UtaModel};

pub use oracle::{
    oracle_feasible, oracle_feasible_ineqs, oracle_vertices, oracle_vertices_ineqs, Point, ORACLE_MAX_VARIABLES,
};
pub use sets::{minimal_hitting_sets, minimal_sets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationKind {
    Necessary,
    Possible,
}

/// One contradiction and what it traces back to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContradictionSet {
    pub lower: IneqId,
    pub upper: IneqId,
    pub original_ids: BTreeSet<IneqId>,
    pub comparisons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub feasible: bool,
    pub contradiction_sets: Vec<ContradictionSet>,
    pub minimal_comparison_subsets: Vec<Vec<String>>,
    pub truncated: bool,
}

/// Constant range of one model variable over all compatible models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableRange {
    pub variable: String,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMatrices {
    pub alternatives: Vec<String>,
    pub necessary: Vec<Vec<bool>>,
    pub possible: Vec<Vec<bool>>,
    pub hasse_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductResult {
    /// Comparison-tagged constraint ids of every root set, before filtering.
    pub constraint_subsets: Vec<BTreeSet<IneqId>>,
    pub reducts: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructResult {
    /// Set when the model constraints alone rule the relation out.
    pub unsalvageable: bool,
    pub constraint_subsets: Vec<BTreeSet<IneqId>>,
    pub hitting_sets: Vec<Vec<String>>,
    pub constructs: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriteriaReductResult {
    pub reducts: Vec<Vec<String>>,
    /// Subsets actually tested, with their verdicts.
    pub checked: Vec<(Vec<String>, bool)>,
}

/// Genealogy of one registered inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub label: Label,
    pub text: String,
    pub origin: Option<String>,
    pub children: Vec<TraceNode>,
}

/// One problem prepared for repeated analyses. Elimination bases are built
/// on first use and shared by every later query.
#[derive(Debug)]
pub struct Analyzer {
    problem: Problem,
    model: UtaModel,
    ineqs: Vec<LabeledInequality>,
    ordering: Ordering,
    policy: Option<Policy>,
    base: OnceLock<SDSystem>,
    explain_base: OnceLock<SDSystem>,
}

impl Analyzer {
    pub fn new(problem: &Problem) -> Result<Self> {
        Self::with_policy(problem, None)
    }

    /// `policy` overrides the defaults: bounds method when stopping at the
    /// first contradiction, keep-all when enumerating.
    pub fn with_policy(problem: &Problem, policy: Option<Policy>) -> Result<Self> {
        let model = UtaModel::new(problem)?;
        let relations = model.build_system()?;
        let ineqs = canonicalize(&relations, &problem.config.epsilon)?;
        let ordering = order_variables(&ineqs, model.variables(), &OrderingStrategy::Frequency)?;
        Ok(Self {
            problem: problem.clone(),
            model,
            ineqs,
            ordering,
            policy,
            base: OnceLock::new(),
            explain_base: OnceLock::new(),
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn model(&self) -> &UtaModel {
        &self.model
    }

    pub fn variables(&self) -> &Variables {
        self.model.variables()
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn inequalities(&self) -> &[LabeledInequality] {
        &self.ineqs
    }

    fn options(&self, mode: Mode) -> Result<SegmentOptions> {
        let policy = match (mode, self.policy) {
            (_, Some(p)) => p,
            (Mode::StopAtFirst, None) => Policy::BoundsMethod,
            (Mode::EnumerateAll, None) => Policy::KeepAll,
        };
        let opts = SegmentOptions::new(mode, policy);
        if mode == Mode::EnumerateAll && policy == Policy::BoundsMethod {
            return Err(Error::PolicyNotAllowed(policy.name()));
        }
        Ok(opts)
    }

    fn run(&self, ordering: Ordering, options: SegmentOptions) -> Result<SDSystem> {
        segment_with_epsilon(self.ineqs.clone(), ordering, options, self.problem.config.epsilon.clone())
    }

    /// Elimination of the problem as configured, stopping at the first
    /// contradiction.
    pub fn base(&self) -> Result<&SDSystem> {
        if let Some(b) = self.base.get() {
            return Ok(b);
        }
        let sys = self.run(self.ordering.clone(), self.options(Mode::StopAtFirst)?)?;
        Ok(self.base.get_or_init(|| sys))
    }

    /// Base kept free of suppression, used when contradictions of an
    /// extension must be enumerated.
    fn explain_base(&self) -> Result<&SDSystem> {
        if let Some(b) = self.explain_base.get() {
            return Ok(b);
        }
        let mut opts = self.options(Mode::EnumerateAll)?;
        opts.mode = Mode::StopAtFirst;
        let sys = self.run(self.ordering.clone(), opts)?;
        Ok(self.explain_base.get_or_init(|| sys))
    }

    fn consistent_base(&self) -> Result<&SDSystem> {
        let base = self.base()?;
        if base.is_feasible() {
            Ok(base)
        } else {
            Err(Error::Inconsistent)
        }
    }

    pub fn is_consistent(&self) -> Result<bool> {
        Ok(self.base()?.is_feasible())
    }

    /// Elimination of the full problem in `mode`.
    pub fn system(&self, mode: Mode) -> Result<SDSystem> {
        match mode {
            Mode::StopAtFirst => self.base().cloned(),
            Mode::EnumerateAll => self.run(self.ordering.clone(), self.options(mode)?),
        }
    }

    pub fn check_consistency(&self, mode: Mode) -> Result<ConsistencyReport> {
        Ok(match mode {
            Mode::StopAtFirst => self.consistency_of(self.base()?),
            Mode::EnumerateAll => self.consistency_of(&self.system(mode)?),
        })
    }

    /// Explanations for the contradictions recorded in `sys`.
    pub fn consistency_of(&self, sys: &SDSystem) -> ConsistencyReport {
        let contradiction_sets: Vec<ContradictionSet> = sys
            .contradictions()
            .iter()
            .map(|rec| {
                let original_ids = sys.backtrack(rec);
                let comparisons = self.comparison_ids(sys, &original_ids);
                ContradictionSet { lower: rec.lower, upper: rec.upper, original_ids, comparisons }
            })
            .collect();
        let projected: Vec<BTreeSet<String>> =
            contradiction_sets.iter().map(|c| c.comparisons.iter().cloned().collect()).collect();
        let minimal_comparison_subsets =
            minimal_sets(&projected).into_iter().map(|s| self.in_input_order(&s)).collect();
        ConsistencyReport {
            feasible: sys.is_feasible(),
            contradiction_sets,
            minimal_comparison_subsets,
            truncated: sys.truncated(),
        }
    }

    /// Constant range of every model variable, each obtained by eliminating
    /// with that variable placed first.
    pub fn weight_ranges(&self) -> Result<Vec<VariableRange>> {
        self.consistent_base()?;
        let opts = self.options(Mode::StopAtFirst)?;
        self.variables()
            .iter()
            .collect::<Vec<Var>>()
            .par_iter()
            .map(|&v| {
                let sys = self.run(self.ordering.with_first(v), opts)?;
                let p = sys.project_bounds(v)?;
                Ok(VariableRange { variable: self.variables().name(v).to_string(), lower: p.lower, upper: p.upper })
            })
            .collect()
    }

    fn hypothesis(&self, kind: RelationKind, i: usize, k: usize) -> Relation {
        match kind {
            RelationKind::Necessary => self.model.necessary_hypothesis(i, k),
            RelationKind::Possible => self.model.possible_hypothesis(i, k),
        }
    }

    /// Whether `a_i` is necessarily (possibly) at least as good as `a_k`.
    pub fn robust_relation(&self, kind: RelationKind, i: usize, k: usize) -> Result<bool> {
        let base = self.consistent_base()?;
        let feasible = base.extend(&[self.hypothesis(kind, i, k)])?.is_feasible();
        Ok(match kind {
            RelationKind::Necessary => !feasible,
            RelationKind::Possible => feasible,
        })
    }

    pub fn robust_relation_by_name(&self, kind: RelationKind, i: &str, k: &str) -> Result<bool> {
        let (i, k) = (self.alternative(i)?, self.alternative(k)?);
        self.robust_relation(kind, i, k)
    }

    pub fn alternative(&self, name: &str) -> Result<usize> {
        self.problem.table.index_of(name)
    }

    pub fn relation_matrices(&self) -> Result<RelationMatrices> {
        self.consistent_base()?;
        let m = self.problem.table.len();
        let cells: Vec<(bool, bool)> = (0..m * m)
            .into_par_iter()
            .map(|c| {
                let (i, k) = (c / m, c % m);
                Ok((
                    self.robust_relation(RelationKind::Necessary, i, k)?,
                    self.robust_relation(RelationKind::Possible, i, k)?,
                ))
            })
            .collect::<Result<_>>()?;
        let necessary: Vec<Vec<bool>> = cells.chunks(m).map(|r| r.iter().map(|c| c.0).collect()).collect();
        let possible = cells.chunks(m).map(|r| r.iter().map(|c| c.1).collect()).collect();
        let hasse_edges = hasse_edges(&necessary);
        Ok(RelationMatrices { alternatives: self.problem.table.alternatives().to_vec(), necessary, possible, hasse_edges })
    }

    fn enumerate_with(&self, hypothesis: Relation) -> Result<(SDSystem, Vec<BTreeSet<IneqId>>)> {
        self.consistent_base()?;
        let base = self.explain_base()?;
        let ext = base.extend_with_options(&[hypothesis], self.options(Mode::EnumerateAll)?)?;
        let roots = ext.contradictions().iter().map(|r| ext.backtrack(r)).collect();
        Ok((ext, roots))
    }

    fn comparison_constraints(&self, sys: &SDSystem, roots: &BTreeSet<IneqId>) -> BTreeSet<IneqId> {
        roots
            .iter()
            .copied()
            .filter(|id| sys.get(*id).is_some_and(|q| q.origin.kind == OriginKind::Comparison))
            .collect()
    }

    fn comparison_ids(&self, sys: &SDSystem, roots: &BTreeSet<IneqId>) -> Vec<String> {
        let ids: BTreeSet<String> = roots
            .iter()
            .filter_map(|id| sys.get(*id))
            .filter(|q| q.origin.kind == OriginKind::Comparison)
            .filter_map(|q| q.origin.reference.clone())
            .collect();
        self.in_input_order(&ids)
    }

    fn in_input_order(&self, ids: &BTreeSet<String>) -> Vec<String> {
        self.problem.comparisons.pairs().iter().map(|c| c.id()).filter(|id| ids.contains(id)).collect()
    }

    /// Minimal sets of comparisons that on their own force `a_i` to be
    /// necessarily at least as good as `a_k`.
    pub fn preference_reduct(&self, i: usize, k: usize) -> Result<ReductResult> {
        if !self.robust_relation(RelationKind::Necessary, i, k)? {
            let names = self.problem.table.alternatives();
            return Err(Error::RelationNotNecessary(names[i].clone(), names[k].clone()));
        }
        let (sys, roots) = self.enumerate_with(self.model.necessary_hypothesis(i, k))?;
        let mut constraint_subsets: Vec<BTreeSet<IneqId>> = Vec::new();
        let mut pair_sets = Vec::new();
        for r in &roots {
            let c = self.comparison_constraints(&sys, r);
            if !constraint_subsets.contains(&c) {
                constraint_subsets.push(c);
            }
            pair_sets.push(self.comparison_ids(&sys, r).into_iter().collect::<BTreeSet<_>>());
        }
        let mut reducts: Vec<Vec<String>> =
            minimal_sets(&pair_sets).into_iter().map(|s| self.in_input_order(&s)).collect();
        reducts.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(ReductResult { constraint_subsets, reducts })
    }

    /// Maximal sets of comparisons to keep so that `a_i` becomes possibly
    /// at least as good as `a_k`.
    pub fn preference_construct(&self, i: usize, k: usize) -> Result<ConstructResult> {
        if self.robust_relation(RelationKind::Possible, i, k)? {
            let names = self.problem.table.alternatives();
            return Err(Error::RelationAlreadyPossible(names[i].clone(), names[k].clone()));
        }
        let (sys, roots) = self.enumerate_with(self.model.possible_hypothesis(i, k))?;
        let mut constraint_subsets: Vec<BTreeSet<IneqId>> = Vec::new();
        let mut pair_sets = Vec::new();
        for r in &roots {
            let c = self.comparison_constraints(&sys, r);
            if !constraint_subsets.contains(&c) {
                constraint_subsets.push(c);
            }
            pair_sets.push(self.comparison_ids(&sys, r).into_iter().collect::<BTreeSet<String>>());
        }
        if pair_sets.iter().any(BTreeSet::is_empty) {
            return Ok(ConstructResult {
                unsalvageable: true,
                constraint_subsets,
                hitting_sets: Vec::new(),
                constructs: Vec::new(),
            });
        }
        let all: Vec<String> = self.problem.comparisons.pairs().iter().map(|c| c.id()).collect();
        let hitting = minimal_hitting_sets(&pair_sets);
        let constructs = hitting
            .iter()
            .map(|h| all.iter().filter(|id| !h.contains(*id)).cloned().collect())
            .collect();
        Ok(ConstructResult {
            unsalvageable: false,
            constraint_subsets,
            hitting_sets: hitting.iter().map(|h| self.in_input_order(h)).collect(),
            constructs,
        })
    }

    /// Minimal criterion subsets whose restricted model reproduces every
    /// comparison. Supersets of a found reduct are not tested.
    pub fn criteria_reducts(&self) -> Result<CriteriaReductResult> {
        let names: Vec<String> = self.problem.criteria.iter().map(|c| c.name.clone()).collect();
        let n = names.len();
        let mut reducts: Vec<BTreeSet<usize>> = Vec::new();
        let mut checked = Vec::new();
        for size in 1..=n {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                let set: BTreeSet<usize> = combo.iter().copied().collect();
                if !reducts.iter().any(|r| r.is_subset(&set)) {
                    let subset: Vec<String> = combo.iter().map(|&j| names[j].clone()).collect();
                    let restricted = self.problem.with_criteria_subset(subset.clone());
                    let ok = Analyzer::with_policy(&restricted, self.policy)?.is_consistent()?;
                    if ok {
                        reducts.push(set);
                    }
                    checked.push((subset, ok));
                }
                if !advance(&mut combo, n) {
                    break;
                }
            }
        }
        let reducts = reducts.iter().map(|r| r.iter().map(|&j| names[j].clone()).collect()).collect();
        Ok(CriteriaReductResult { reducts, checked })
    }

    /// Parent tree of a registered inequality down to the originals.
    pub fn trace(&self, sys: &SDSystem, id: IneqId) -> Option<TraceNode> {
        let ineq = sys.get(id)?;
        let text = self.bound_text(sys, id);
        let children = if ineq.is_original() {
            Vec::new()
        } else {
            [ineq.label.lower, ineq.label.upper].iter().filter_map(|p| self.trace(sys, *p)).collect()
        };
        let origin = match ineq.origin.kind {
            OriginKind::Derived => None,
            _ => Some(ineq.origin.reference.clone().unwrap_or_else(|| "model".into())),
        };
        Some(TraceNode { label: ineq.label, text, origin, children })
    }

    /// Bound form of a registered inequality, or its raw body.
    pub fn bound_text(&self, sys: &SDSystem, id: IneqId) -> String {
        match sys.bound_for(id) {
            Some(b) => b.display(self.variables(), sys.ordering()),
            None => {
                let body = &sys.get(id).expect("registered").body;
                let mut order: Vec<Var> = sys.ordering().vars().to_vec();
                order.reverse();
                format!("{} <= 0", body.display_with(self.variables(), &order))
            }
        }
    }

    /// Every relation the elimination starts from, including comparisons.
    pub fn relations(&self) -> Result<Vec<Relation>> {
        self.model.build_system()
    }

    /// Oracle verdict for the problem with an optional extra relation.
    pub fn oracle_verdict(&self, extra: Option<Relation>) -> Result<bool> {
        let mut rels = self.relations()?;
        rels.extend(extra);
        oracle_feasible(&rels, &self.problem.config.epsilon)
    }

    pub fn hypothesis_relation(&self, kind: RelationKind, i: usize, k: usize) -> Relation {
        self.hypothesis(kind, i, k)
    }

    /// Value of every variable at an oracle vertex, by name.
    pub fn named(&self, p: &Point) -> BTreeMap<String, Rational> {
        p.iter().map(|(v, x)| (self.variables().name(*v).to_string(), x.clone())).collect()
    }
}

fn advance(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
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

/// Transitive reduction of the strict part of a transitive relation.
pub fn hasse_edges(relation: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let m = relation.len();
    let strict = |i: usize, k: usize| i != k && relation[i][k] && !relation[k][i];
    let mut edges = Vec::new();
    for i in 0..m {
        for k in 0..m {
            if strict(i, k) && !(0..m).any(|j| strict(i, j) && strict(j, k)) {
                edges.push((i, k));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::uta::{Comparison, ModelConfig, PerformanceTable, ReferenceComparisons};

    fn problem(rows: Vec<Vec<i64>>, comparisons: &[Comparison]) -> Problem {
        let ids: Vec<String> = (1..=rows.len()).map(|i| format!("a{i}")).collect();
        let n = rows[0].len();
        let table = PerformanceTable::new(ids, rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect())
            .unwrap();
        let names: Vec<String> = (1..=n).map(|j| format!("g{j}")).collect();
        let criteria = Problem::observed_criteria(&table, &names);
        Problem::new(table, criteria, ReferenceComparisons::new(comparisons.to_vec()), ModelConfig::default()).unwrap()
    }

    #[test]
    fn chain_hasse_reduces_transitive_arc() {
        let rel = vec![vec![true, true, true], vec![false, true, true], vec![false, false, true]];
        assert_eq!(hasse_edges(&rel), [(0, 1), (1, 2)]);
        let none = vec![vec![true, false], vec![false, true]];
        assert!(hasse_edges(&none).is_empty());
    }

    #[test]
    fn empty_comparisons_give_unit_ranges() {
        let p = problem(vec![vec![0, 1], vec![1, 0]], &[]);
        let a = Analyzer::new(&p).unwrap();
        assert!(a.check_consistency(Mode::StopAtFirst).unwrap().feasible);
        for r in a.weight_ranges().unwrap() {
            assert_eq!((r.lower, r.upper), (Some(int(0)), Some(int(1))));
        }
    }

    #[test]
    fn dominance_is_necessary_and_its_reduct_is_empty() {
        let p = problem(vec![vec![2, 2], vec![1, 1], vec![0, 0]], &[]);
        let a = Analyzer::new(&p).unwrap();
        assert!(a.robust_relation(RelationKind::Necessary, 0, 1).unwrap());
        assert!(!a.robust_relation(RelationKind::Necessary, 1, 0).unwrap());
        assert!(!a.oracle_verdict(Some(a.hypothesis_relation(RelationKind::Necessary, 0, 1))).unwrap());
        let r = a.preference_reduct(0, 1).unwrap();
        assert_eq!(r.reducts, [Vec::<String>::new()]);
        let c = a.preference_construct(2, 0).unwrap();
        assert!(c.unsalvageable && c.constructs.is_empty());
    }

    #[test]
    fn relation_of_an_alternative_with_itself() {
        let p = problem(vec![vec![0, 1], vec![1, 0]], &[Comparison::strict("a1", "a2")]);
        let a = Analyzer::new(&p).unwrap();
        assert!(a.robust_relation(RelationKind::Necessary, 1, 1).unwrap());
        assert!(a.robust_relation(RelationKind::Possible, 1, 1).unwrap());
    }

    #[test]
    fn inconsistent_problem_rejects_robust_queries() {
        let p = problem(
            vec![vec![0, 1], vec![1, 0]],
            &[Comparison::strict("a1", "a2"), Comparison::strict("a2", "a1")],
        );
        let a = Analyzer::new(&p).unwrap();
        let rep = a.check_consistency(Mode::EnumerateAll).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.minimal_comparison_subsets, [vec!["a1>a2".to_string(), "a2>a1".to_string()]]);
        assert_eq!(a.weight_ranges().unwrap_err(), Error::Inconsistent);
        assert_eq!(a.relation_matrices().unwrap_err(), Error::Inconsistent);
    }

    #[test]
    fn explicit_bounds_policy_cannot_enumerate() {
        let p = problem(vec![vec![0, 1], vec![1, 0]], &[]);
        let a = Analyzer::with_policy(&p, Some(Policy::BoundsMethod)).unwrap();
        assert_eq!(a.check_consistency(Mode::EnumerateAll).unwrap_err(), Error::PolicyNotAllowed("BOUNDS_METHOD"));
        assert!(a.check_consistency(Mode::StopAtFirst).unwrap().feasible);
    }

    #[test]
    fn hypothesis_epsilon_is_configurable() {
        let mut p = problem(vec![vec![10, 0], vec![0, 10]], &[Comparison::indifferent("a1", "a2")]);
        p.config.hypothesis_epsilon = Some(ratio(1, 1000));
        let a = Analyzer::new(&p).unwrap();
        assert!(a.robust_relation(RelationKind::Necessary, 0, 1).unwrap());
    }
}
