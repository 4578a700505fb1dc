use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::document::Exact;
use crate::analysis::{minimal_sets, Analyzer, RelationKind, RelationMatrices, TraceNode};
use crate::engine::{BoundKind, IneqId, Mode, SDSystem};
use crate::error::{Error, Result};
use crate::expr::Var;
use crate::rational::{display2, Rational};

/// What to compute; the same request drives the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalysisRequest {
    Check {
        #[serde(default)]
        explain_all: bool,
    },
    Bounds,
    Relations {
        #[serde(default)]
        necessary: bool,
        #[serde(default)]
        possible: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair: Option<[String; 2]>,
    },
    Reduct {
        pair: [String; 2],
    },
    Construct {
        pair: [String; 2],
    },
    CriteriaReducts,
    Trace {
        #[serde(default)]
        explain_all: bool,
    },
}

impl AnalysisRequest {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Check { .. } => "check",
            Self::Bounds => "bounds",
            Self::Relations { .. } => "relations",
            Self::Reduct { .. } => "reduct",
            Self::Construct { .. } => "construct",
            Self::CriteriaReducts => "criteria-reducts",
            Self::Trace { .. } => "trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub variable: String,
    pub coefficient: Exact,
}

/// One registered inequality. With a variable it reads
/// `variable relation terms + constant`; without one it is `terms + constant <= 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    pub relation: String,
    pub terms: Vec<TermDoc>,
    pub constant: Exact,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionRow {
    pub lower: IneqId,
    pub upper: IneqId,
    pub constant: Exact,
    pub roots: Vec<IneqId>,
    pub comparisons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub label: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TraceDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeRow {
    pub variable: String,
    pub lower: Option<Exact>,
    pub upper: Option<Exact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub left: String,
    pub right: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub necessary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub possible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckedSubset {
    pub criteria: Vec<String>,
    pub consistent: bool,
}

/// Result of one analysis. Empty sections are omitted from the structured form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub minimal_subsets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contradictions: Vec<ContradictionRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<TraceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub system: Vec<InequalityRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranges: Vec<RangeRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub necessary: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub possible: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hasse_edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraint_subsets: Vec<Vec<IneqId>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reducts: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsalvageable: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hitting_sets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constructs: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checked: Vec<CheckedSubset>,
}

impl ReportDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Parse { location: e.path().to_string(), message: e.inner().to_string() })
    }

    /// Relation grid of `kind` as booleans, if present.
    pub fn grid(&self, kind: RelationKind) -> Option<Vec<Vec<bool>>> {
        let rows = match kind {
            RelationKind::Necessary => self.necessary.as_ref()?,
            RelationKind::Possible => self.possible.as_ref()?,
        };
        Some(rows.iter().map(|r| r.split_whitespace().map(|c| c == "T").collect()).collect())
    }
}

/// Resolves an alternative given by name or by 1-based position.
pub fn resolve_alternative(analyzer: &Analyzer, token: &str) -> Result<usize> {
    match analyzer.alternative(token) {
        Ok(i) => Ok(i),
        Err(e) => match token.parse::<usize>() {
            Ok(n) if (1..=analyzer.problem().table.len()).contains(&n) => Ok(n - 1),
            _ => Err(e),
        },
    }
}

pub fn run_analysis(analyzer: &Analyzer, request: &AnalysisRequest) -> Result<ReportDocument> {
    let mut doc = ReportDocument { kind: request.kind().to_string(), ..Default::default() };
    let pair = |p: &[String; 2]| -> Result<(usize, usize)> {
        Ok((resolve_alternative(analyzer, &p[0])?, resolve_alternative(analyzer, &p[1])?))
    };
    let names = analyzer.problem().table.alternatives().to_vec();
    match request {
        AnalysisRequest::Check { explain_all } => {
            let sys = analyzer.system(mode(*explain_all))?;
            let report = analyzer.consistency_of(&sys);
            doc.feasible = Some(report.feasible);
            doc.truncated = Some(report.truncated);
            doc.minimal_subsets = report.minimal_comparison_subsets;
            doc.contradictions = contradiction_rows(&sys, analyzer);
            doc.traces = contradiction_traces(&sys, analyzer);
        }
        AnalysisRequest::Bounds => {
            doc.feasible = Some(true);
            doc.ranges = analyzer
                .weight_ranges()?
                .into_iter()
                .map(|r| RangeRow { variable: r.variable, lower: r.lower.map(Exact), upper: r.upper.map(Exact) })
                .collect();
        }
        AnalysisRequest::Relations { necessary, possible, pair: p } => {
            let (nec, pos) = if *necessary || *possible { (*necessary, *possible) } else { (true, true) };
            doc.feasible = Some(true);
            if let Some(p) = p {
                let (i, k) = pair(p)?;
                let verdict = |on: bool, kind| on.then(|| analyzer.robust_relation(kind, i, k)).transpose();
                doc.pair = Some(PairReport {
                    left: names[i].clone(),
                    right: names[k].clone(),
                    necessary: verdict(nec, RelationKind::Necessary)?,
                    possible: verdict(pos, RelationKind::Possible)?,
                });
            } else {
                let m = analyzer.relation_matrices()?;
                doc.alternatives = m.alternatives.clone();
                if nec {
                    doc.necessary = Some(grid_rows(&m.necessary));
                    doc.hasse_edges =
                        m.hasse_edges.iter().map(|&(a, b)| [names[a].clone(), names[b].clone()]).collect();
                }
                if pos {
                    doc.possible = Some(grid_rows(&m.possible));
                }
            }
        }
        AnalysisRequest::Reduct { pair: p } => {
            let (i, k) = pair(p)?;
            let r = analyzer.preference_reduct(i, k)?;
            doc.feasible = Some(true);
            doc.pair = Some(PairReport {
                left: names[i].clone(),
                right: names[k].clone(),
                necessary: Some(true),
                possible: None,
            });
            doc.constraint_subsets = r.constraint_subsets.iter().map(|s| s.iter().copied().collect()).collect();
            doc.reducts = r.reducts;
        }
        AnalysisRequest::Construct { pair: p } => {
            let (i, k) = pair(p)?;
            let c = analyzer.preference_construct(i, k)?;
            doc.feasible = Some(true);
            doc.pair = Some(PairReport {
                left: names[i].clone(),
                right: names[k].clone(),
                necessary: None,
                possible: Some(false),
            });
            doc.unsalvageable = Some(c.unsalvageable);
            doc.constraint_subsets = c.constraint_subsets.iter().map(|s| s.iter().copied().collect()).collect();
            doc.hitting_sets = c.hitting_sets;
            doc.constructs = c.constructs;
        }
        AnalysisRequest::CriteriaReducts => {
            let r = analyzer.criteria_reducts()?;
            doc.reducts = r.reducts;
            doc.checked = r
                .checked
                .into_iter()
                .map(|(criteria, consistent)| CheckedSubset { criteria, consistent })
                .collect();
        }
        AnalysisRequest::Trace { explain_all } => {
            let sys = analyzer.system(mode(*explain_all))?;
            doc.feasible = Some(sys.is_feasible());
            doc.truncated = Some(sys.truncated());
            doc.system = system_rows(&sys, analyzer);
            doc.contradictions = contradiction_rows(&sys, analyzer);
        }
    }
    Ok(doc)
}

fn mode(explain_all: bool) -> Mode {
    if explain_all {
        Mode::EnumerateAll
    } else {
        Mode::StopAtFirst
    }
}

fn grid_rows(m: &[Vec<bool>]) -> Vec<String> {
    m.iter()
        .map(|row| row.iter().map(|&b| if b { "T" } else { "F" }).collect::<Vec<_>>().join(" "))
        .collect()
}

fn system_rows(sys: &SDSystem, analyzer: &Analyzer) -> Vec<InequalityRow> {
    let vars = analyzer.variables();
    // higher-level variables print first, as in the elimination tables
    let mut order: Vec<Var> = sys.ordering().vars().to_vec();
    order.reverse();
    let terms = |e: &crate::expr::LinearExpr| -> Vec<TermDoc> {
        let mut out: Vec<TermDoc> = order
            .iter()
            .filter_map(|v| {
                let c = e.coef(*v);
                (c != Rational::default()).then(|| TermDoc { variable: vars.name(*v).to_string(), coefficient: Exact(c) })
            })
            .collect();
        for (v, c) in e.terms() {
            if !order.contains(&v) {
                out.push(TermDoc { variable: vars.name(v).to_string(), coefficient: Exact(c.clone()) });
            }
        }
        out
    };
    sys.inequalities()
        .iter()
        .map(|q| {
            let origin = q.origin.reference.clone();
            let text = analyzer.bound_text(sys, q.id());
            match sys.bound_for(q.id()) {
                Some(b) => InequalityRow {
                    label: q.label.to_string(),
                    variable: Some(vars.name(b.var).to_string()),
                    relation: match b.kind {
                        BoundKind::Lower => ">=".into(),
                        BoundKind::Upper => "<=".into(),
                    },
                    terms: terms(&b.expr),
                    constant: Exact(b.expr.constant_term().clone()),
                    text,
                    origin,
                },
                None => InequalityRow {
                    label: q.label.to_string(),
                    variable: None,
                    relation: "<=".into(),
                    terms: terms(&q.body),
                    constant: Exact(q.body.constant_term().clone()),
                    text,
                    origin,
                },
            }
        })
        .collect()
}

fn contradiction_rows(sys: &SDSystem, analyzer: &Analyzer) -> Vec<ContradictionRow> {
    let report = analyzer.consistency_of(sys);
    sys.contradictions()
        .iter()
        .zip(report.contradiction_sets)
        .map(|(rec, set)| ContradictionRow {
            lower: rec.lower,
            upper: rec.upper,
            constant: Exact(rec.constant.clone()),
            roots: set.original_ids.into_iter().collect(),
            comparisons: set.comparisons,
        })
        .collect()
}

/// Genealogy of the first contradiction reaching each inclusion-minimal root set.
fn contradiction_traces(sys: &SDSystem, analyzer: &Analyzer) -> Vec<TraceDoc> {
    let roots: Vec<BTreeSet<IneqId>> = sys.contradictions().iter().map(|r| sys.backtrack(r)).collect();
    let minimal = minimal_sets(&roots);
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for (rec, r) in sys.contradictions().iter().zip(&roots) {
        if !minimal.contains(r) || !done.insert(r.clone()) {
            continue;
        }
        let mut parents = vec![rec.lower];
        if rec.upper != rec.lower {
            parents.push(rec.upper);
        }
        out.push(TraceDoc {
            label: format!("{{{},{}}}", rec.lower, rec.upper),
            text: format!("{} <= 0", display2(&rec.constant)),
            origin: None,
            children: parents.iter().filter_map(|&p| analyzer.trace(sys, p)).map(trace_doc).collect(),
        });
    }
    out
}

fn trace_doc(n: TraceNode) -> TraceDoc {
    TraceDoc {
        label: n.label.to_string(),
        text: n.text,
        origin: n.origin,
        children: n.children.into_iter().map(trace_doc).collect(),
    }
}

pub fn render_report(report: &ReportDocument, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Structured => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Text => render_text(report).into_bytes(),
    }
}

fn set_text(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn ids_text(ids: &[IneqId]) -> String {
    format!("{{{}}}", ids.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
}

fn opt_text(v: &Option<Exact>) -> String {
    v.as_ref().map(|x| display2(&x.0)).unwrap_or_else(|| "unbounded".into())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "T"
    } else {
        "F"
    }
}

fn render_text(r: &ReportDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "analysis: {}", r.kind);
    if let Some(f) = r.feasible {
        let _ = writeln!(s, "verdict: {}", if f { "feasible" } else { "infeasible" });
    }
    if r.truncated == Some(true) {
        let _ = writeln!(s, "note: enumeration stopped at the contradiction cap");
    }
    if let Some(p) = &r.pair {
        let _ = write!(s, "pair: ({}, {})", p.left, p.right);
        if let Some(n) = p.necessary {
            let _ = write!(s, "  necessary={}", yes_no(n));
        }
        if let Some(q) = p.possible {
            let _ = write!(s, "  possible={}", yes_no(q));
        }
        s.push('\n');
    }
    if !r.minimal_subsets.is_empty() {
        let _ = writeln!(s, "\nminimal comparison subsets:");
        for m in &r.minimal_subsets {
            let _ = writeln!(s, "  {}", set_text(m));
        }
    }
    if !r.system.is_empty() {
        let _ = writeln!(s, "\nsystem:");
        let width = r.system.iter().map(|row| row.label.len()).max().unwrap_or(0);
        for row in &r.system {
            let origin = row.origin.as_deref().map(|o| format!("  [{o}]")).unwrap_or_default();
            let _ = writeln!(s, "  {:<width$}  {}{}", row.label, row.text, origin);
        }
    }
    if !r.contradictions.is_empty() {
        let _ = writeln!(s, "\ncontradictions:");
        for c in &r.contradictions {
            let _ = writeln!(
                s,
                "  {{{},{}}}  {} <= 0  roots {}  comparisons {}",
                c.lower,
                c.upper,
                display2(&c.constant.0),
                ids_text(&c.roots),
                set_text(&c.comparisons)
            );
        }
    }
    if !r.traces.is_empty() {
        let _ = writeln!(s, "\ntraces:");
        for t in &r.traces {
            render_trace(&mut s, t, 1);
        }
    }
    if !r.ranges.is_empty() {
        let _ = writeln!(s, "\nranges:");
        let width = r.ranges.iter().map(|x| x.variable.len()).max().unwrap_or(0);
        for x in &r.ranges {
            let _ = writeln!(s, "  {:<width$}  [{}, {}]", x.variable, opt_text(&x.lower), opt_text(&x.upper));
        }
    }
    for (title, grid) in [("necessary", &r.necessary), ("possible", &r.possible)] {
        if let Some(rows) = grid {
            let _ = writeln!(s, "\n{title}:");
            render_grid(&mut s, &r.alternatives, rows);
        }
    }
    if !r.hasse_edges.is_empty() {
        let _ = writeln!(s, "\nhasse edges:");
        for [a, b] in &r.hasse_edges {
            let _ = writeln!(s, "  {a} -> {b}");
        }
    }
    if !r.constraint_subsets.is_empty() {
        let _ = writeln!(s, "\nconstraint subsets:");
        for c in &r.constraint_subsets {
            let _ = writeln!(s, "  {}", ids_text(c));
        }
    }
    if r.unsalvageable == Some(true) {
        let _ = writeln!(s, "\nno subset of comparisons restores the relation");
    }
    for (title, lists) in [("hitting sets", &r.hitting_sets), ("constructs", &r.constructs), ("reducts", &r.reducts)] {
        if !lists.is_empty() {
            let _ = writeln!(s, "\n{title}:");
            for l in lists {
                let _ = writeln!(s, "  {}", set_text(l));
            }
        }
    }
    if !r.checked.is_empty() {
        let _ = writeln!(s, "\nchecked criteria subsets:");
        for c in &r.checked {
            let verdict = if c.consistent { "consistent" } else { "inconsistent" };
            let _ = writeln!(s, "  {}  {verdict}", set_text(&c.criteria));
        }
    }
    s
}

fn render_trace(s: &mut String, t: &TraceDoc, depth: usize) {
    let origin = t.origin.as_deref().map(|o| format!("  [{o}]")).unwrap_or_default();
    let _ = writeln!(s, "{}{}  {}{}", "  ".repeat(depth), t.label, t.text, origin);
    for c in &t.children {
        render_trace(s, c, depth + 1);
    }
}

fn render_grid(s: &mut String, names: &[String], rows: &[String]) {
    let width = names.iter().map(String::len).max().unwrap_or(1);
    let _ = write!(s, "  {:width$}", "");
    for n in names {
        let _ = write!(s, " {n:>width$}");
    }
    s.push('\n');
    for (name, row) in names.iter().zip(rows) {
        let _ = write!(s, "  {name:<width$}");
        for cell in row.split_whitespace() {
            let _ = write!(s, " {cell:>width$}");
        }
        s.push('\n');
    }
}

/// Graphviz rendering of the necessary relation's transitive reduction.
pub fn export_hasse(m: &RelationMatrices) -> String {
    let mut s = String::from("digraph necessary {\n  rankdir=TB;\n");
    for n in &m.alternatives {
        let _ = writeln!(s, "  \"{n}\";");
    }
    for &(a, b) in &m.hasse_edges {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", m.alternatives[a], m.alternatives[b]);
    }
    s.push_str("}\n");
    s
}
