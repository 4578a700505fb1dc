use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::engine::inequality::{
    canonicalize_from, detect_contradiction, is_tautology, Candidate, IneqId, Label, LabeledInequality,
};
use crate::engine::ops::{cro, isolate, Bound, BoundKind, Isolated};
use crate::engine::redundancy::{stored_dominates, BoxBounds};
use crate::engine::Ordering;
use crate::error::{Error, Result};
use crate::expr::{LinearExpr, OriginTag, Relation, Var};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    StopAtFirst,
    EnumerateAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Policy {
    KeepAll,
    DropDuplicates,
    BoundsMethod,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::KeepAll => "KEEP_ALL",
            Policy::DropDuplicates => "DROP_DUPLICATES",
            Policy::BoundsMethod => "BOUNDS_METHOD",
        }
    }
}

pub const DEFAULT_MAX_CONTRADICTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentOptions {
    pub mode: Mode,
    pub policy: Policy,
    pub max_contradictions: usize,
}

impl SegmentOptions {
    pub fn new(mode: Mode, policy: Policy) -> Self {
        Self { mode, policy, max_contradictions: DEFAULT_MAX_CONTRADICTIONS }
    }

    pub fn stop_at_first() -> Self {
        Self::new(Mode::StopAtFirst, Policy::KeepAll)
    }

    pub fn enumerate_all() -> Self {
        Self::new(Mode::EnumerateAll, Policy::KeepAll)
    }

    fn validate(&self) -> Result<()> {
        if self.mode == Mode::EnumerateAll && self.policy == Policy::BoundsMethod {
            return Err(Error::PolicyNotAllowed(Policy::BoundsMethod.name()));
        }
        Ok(())
    }
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self::stop_at_first()
    }
}

/// Two bounds whose crossover collapsed to `constant <= 0` with a positive
/// constant. An original that is contradictory on its own has
/// `lower == upper == its id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContradictionRecord {
    pub lower: IneqId,
    pub upper: IneqId,
    #[serde(with = "crate::rational::serde_exact")]
    pub constant: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub crossovers: usize,
    pub tautologies: usize,
    pub suppressed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct LevelStore {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
    /// Expressions already stored, for constant-time duplicate checks.
    exprs: HashSet<(BoundKind, LinearExpr)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdjoinOutcome {
    Added(IneqId),
    Suppressed,
    Tautology,
}

/// Lower/upper bound stores per variable, the label registry and the
/// contradiction log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SDSystem {
    ordering: Ordering,
    epsilon: Rational,
    options: SegmentOptions,
    registry: Vec<LabeledInequality>,
    levels: Vec<LevelStore>,
    contradictions: Vec<ContradictionRecord>,
    stats: SegmentStats,
    truncated: bool,
    halted: bool,
}

/// Result of a projection onto one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedBounds {
    pub var: Var,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub lower_exprs: Vec<Bound>,
    pub upper_exprs: Vec<Bound>,
}

/// Runs the elimination over already canonicalized inequalities.
pub fn segment(ineqs: Vec<LabeledInequality>, ordering: Ordering, options: SegmentOptions) -> Result<SDSystem> {
    segment_with_epsilon(ineqs, ordering, options, crate::rational::ratio(1, 100))
}

/// As [`segment`], remembering `epsilon` for later [`SDSystem::extend`] calls.
pub fn segment_with_epsilon(
    ineqs: Vec<LabeledInequality>,
    ordering: Ordering,
    options: SegmentOptions,
    epsilon: Rational,
) -> Result<SDSystem> {
    options.validate()?;
    let mut sys = SDSystem {
        levels: vec![LevelStore::default(); ordering.len()],
        ordering,
        epsilon,
        options,
        registry: Vec::with_capacity(ineqs.len()),
        contradictions: Vec::new(),
        stats: SegmentStats::default(),
        truncated: false,
        halted: false,
    };
    for (expected, ineq) in (1..).zip(&ineqs) {
        if ineq.id() != expected || !ineq.is_original() {
            return Err(Error::InvalidModel(format!("inequality {} is not numbered consecutively from 1", ineq.label)));
        }
    }
    let top = sys.register_originals(ineqs)?;
    if let Some(top) = top {
        sys.eliminate(top, None);
    }
    Ok(sys)
}

impl SDSystem {
    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn options(&self) -> SegmentOptions {
        self.options
    }

    pub fn stats(&self) -> &SegmentStats {
        &self.stats
    }

    /// Every registered inequality in id order.
    pub fn inequalities(&self) -> &[LabeledInequality] {
        &self.registry
    }

    pub fn get(&self, id: IneqId) -> Option<&LabeledInequality> {
        (id as usize).checked_sub(1).and_then(|i| self.registry.get(i))
    }

    pub fn next_id(&self) -> IneqId {
        self.registry.len() as IneqId + 1
    }

    pub fn contradictions(&self) -> &[ContradictionRecord] {
        &self.contradictions
    }

    pub fn is_feasible(&self) -> bool {
        self.contradictions.is_empty()
    }

    /// Set when the contradiction cap was reached and enumeration stopped.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub(crate) fn levels(&self) -> &[LevelStore] {
        &self.levels
    }

    /// Stored `(lower, upper)` bounds of `v`.
    pub fn bounds_of(&self, v: Var) -> (&[Bound], &[Bound]) {
        match self.ordering.index_of(v) {
            Some(i) => (&self.levels[i - 1].lower, &self.levels[i - 1].upper),
            None => (&[], &[]),
        }
    }

    /// All stored bounds, highest-indexed variable first, lower before upper.
    pub fn bounds(&self) -> impl Iterator<Item = &Bound> + '_ {
        self.levels.iter().rev().flat_map(|l| l.lower.iter().chain(l.upper.iter()))
    }

    /// The bound form of a registered inequality, if it has one.
    pub fn bound_for(&self, id: IneqId) -> Option<Bound> {
        let ineq = self.get(id)?;
        match isolate(&ineq.body, &self.ordering).ok()? {
            Isolated::Bound { var, kind, expr } => Some(Bound { var, kind, expr, source: id }),
            _ => None,
        }
    }

    /// Adjoins one crossover product under the configured policy.
    pub fn adjoin(&mut self, candidate: Candidate) -> Result<AdjoinOutcome> {
        if detect_contradiction(&candidate.body) {
            return Err(Error::Contradictory);
        }
        let Isolated::Bound { var, kind, expr } = isolate(&candidate.body, &self.ordering)? else {
            self.stats.tautologies += 1;
            return Ok(AdjoinOutcome::Tautology);
        };
        let bound = Bound { var, kind, expr, source: 0 };
        let redundant = match self.options.policy {
            Policy::KeepAll => false,
            Policy::DropDuplicates => self.has_identical(&bound),
            Policy::BoundsMethod => {
                let bx = BoxBounds::compute(&self.levels, &self.ordering);
                stored_dominates(self, &bx, &bound)
            }
        };
        if redundant {
            self.stats.suppressed += 1;
            return Ok(AdjoinOutcome::Suppressed);
        }
        Ok(AdjoinOutcome::Added(self.register_derived(candidate, bound)))
    }

    /// Adds constraints to a contradiction-free system, crossing only pairs
    /// that involve at least one new bound.
    pub fn extend(&self, relations: &[Relation]) -> Result<SDSystem> {
        self.extend_with_options(relations, self.options)
    }

    pub fn extend_with_options(&self, relations: &[Relation], options: SegmentOptions) -> Result<SDSystem> {
        options.validate()?;
        if !self.is_feasible() {
            return Err(Error::Contradictory);
        }
        for rel in relations {
            if let Some(v) = rel.mentioned().into_iter().find(|v| self.ordering.index_of(*v).is_none()) {
                return Err(Error::UnknownVariable(v.to_string()));
            }
        }
        let first_new = self.next_id();
        let ineqs = canonicalize_from(relations, &self.epsilon, first_new)?;
        let mut sys = self.clone();
        sys.options = options;
        sys.halted = false;
        let top = sys.register_originals(ineqs)?;
        if let Some(top) = top {
            sys.eliminate(top, Some(first_new));
        }
        Ok(sys)
    }

    /// Original ids reached by following the parents of both sides.
    pub fn backtrack(&self, record: &ContradictionRecord) -> BTreeSet<IneqId> {
        let mut roots = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![record.lower, record.upper];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            let Some(ineq) = self.get(id) else { continue };
            if ineq.is_original() {
                roots.insert(id);
            } else {
                stack.push(ineq.label.lower);
                stack.push(ineq.label.upper);
            }
        }
        roots
    }

    /// Constant range of the first variable, or symbolic bounds of others.
    pub fn project_bounds(&self, v: Var) -> Result<ProjectedBounds> {
        if !self.is_feasible() {
            return Err(Error::Contradictory);
        }
        let idx = self
            .ordering
            .index_of(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        let store = &self.levels[idx - 1];
        let (mut lower, mut upper) = (None, None);
        if idx == 1 {
            lower = store.lower.iter().map(|b| b.expr.constant_term().clone()).max();
            upper = store.upper.iter().map(|b| b.expr.constant_term().clone()).min();
        }
        Ok(ProjectedBounds {
            var: v,
            lower,
            upper,
            lower_exprs: store.lower.clone(),
            upper_exprs: store.upper.clone(),
        })
    }

    fn has_identical(&self, bound: &Bound) -> bool {
        let idx = self.ordering.index_of(bound.var).expect("bound variable is ordered");
        self.levels[idx - 1].exprs.contains(&(bound.kind, bound.expr.clone()))
    }

    fn store_bound(&mut self, bound: Bound) {
        let idx = self.ordering.index_of(bound.var).expect("bound variable is ordered");
        let level = &mut self.levels[idx - 1];
        level.exprs.insert((bound.kind, bound.expr.clone()));
        match bound.kind {
            BoundKind::Lower => level.lower.push(bound),
            BoundKind::Upper => level.upper.push(bound),
        }
    }

    fn register_derived(&mut self, candidate: Candidate, mut bound: Bound) -> IneqId {
        let id = self.next_id();
        bound.source = id;
        self.registry.push(LabeledInequality {
            label: Label { id, lower: candidate.lower, upper: candidate.upper },
            mentioned: candidate.body.vars().collect(),
            body: candidate.body,
            origin: OriginTag::derived(),
        });
        self.store_bound(bound);
        id
    }

    /// Registers and isolates originals; returns the highest level touched.
    fn register_originals(&mut self, ineqs: Vec<LabeledInequality>) -> Result<Option<usize>> {
        let mut top = None;
        for ineq in ineqs {
            let id = ineq.id();
            let iso = isolate(&ineq.body, &self.ordering)?;
            let constant = ineq.body.constant_term().clone();
            self.registry.push(ineq);
            match iso {
                Isolated::Bound { var, kind, expr } => {
                    let level = self.ordering.index_of(var).expect("checked by isolate");
                    top = top.max(Some(level));
                    self.store_bound(Bound { var, kind, expr, source: id });
                }
                Isolated::Tautology => {}
                Isolated::ImmediateContradiction => {
                    if self.record(ContradictionRecord { lower: id, upper: id, constant }) {
                        return Ok(None);
                    }
                }
            }
        }
        Ok(top)
    }

    /// Logs a contradiction; true when processing must stop.
    fn record(&mut self, rec: ContradictionRecord) -> bool {
        if self.contradictions.len() >= self.options.max_contradictions {
            self.truncated = true;
            self.halted = true;
            return true;
        }
        self.contradictions.push(rec);
        if self.options.mode == Mode::StopAtFirst {
            self.halted = true;
        }
        self.halted
    }

    fn eliminate(&mut self, top: usize, first_new: Option<IneqId>) {
        for level in (1..=top).rev() {
            if self.halted {
                return;
            }
            self.process_level(level, first_new);
        }
    }

    fn process_level(&mut self, level: usize, first_new: Option<IneqId>) {
        let store = &self.levels[level - 1];
        let (lowers, uppers) = (store.lower.clone(), store.upper.clone());
        let is_new = |id: IneqId| first_new.is_none_or(|f| id >= f);
        let mut batch: Vec<(Candidate, Bound)> = Vec::new();
        for lower in &lowers {
            for upper in &uppers {
                if !is_new(lower.source) && !is_new(upper.source) {
                    continue;
                }
                let cand = cro(lower, upper).expect("bounds of one level cross");
                self.stats.crossovers += 1;
                if detect_contradiction(&cand.body) {
                    let constant = cand.body.constant_term().clone();
                    if self.record(ContradictionRecord { lower: cand.lower, upper: cand.upper, constant }) {
                        return;
                    }
                    continue;
                }
                if is_tautology(&cand.body) {
                    self.stats.tautologies += 1;
                    continue;
                }
                if self.options.policy == Policy::BoundsMethod {
                    let Ok(Isolated::Bound { var, kind, expr }) = isolate(&cand.body, &self.ordering) else {
                        unreachable!("non-constant body isolates")
                    };
                    batch.push((cand, Bound { var, kind, expr, source: 0 }));
                } else {
                    self.adjoin(cand).expect("candidate is not contradictory");
                }
            }
        }
        if !batch.is_empty() {
            self.adjoin_batch(batch);
        }
    }

    /// Bounds-method filtering of one level's products: a candidate is
    /// dropped when a stored bound or a batch peer dominates it on the box
    /// (equivalent peers keep the earliest).
    fn adjoin_batch(&mut self, batch: Vec<(Candidate, Bound)>) {
        let bx = BoxBounds::compute(&self.levels, &self.ordering);
        let ord = &self.ordering;
        let keep: Vec<bool> = batch
            .iter()
            .enumerate()
            .map(|(i, (_, b))| {
                if stored_dominates(self, &bx, b) {
                    return false;
                }
                !batch.iter().enumerate().any(|(j, (_, p))| {
                    j != i
                        && p.var == b.var
                        && p.kind == b.kind
                        && bx.dominates(&p.expr, &b.expr, b.kind, ord)
                        && (j < i || !bx.dominates(&b.expr, &p.expr, b.kind, ord))
                })
            })
            .collect();
        for ((cand, bound), keep) in batch.into_iter().zip(keep) {
            if keep {
                self.register_derived(cand, bound);
            } else {
                self.stats.suppressed += 1;
            }
        }
    }
}
