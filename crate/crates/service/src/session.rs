use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use segdesc_core::analysis::Analyzer;
use segdesc_core::io::{render_report, run_analysis, AnalysisRequest, ProblemDocument, ReportDocument, ReportFormat};
use segdesc_core::uta::{Comparison, ReferenceComparisons};
use segdesc_core::{Error, Result};

/// Comparison edits, applied removals first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonEdit {
    #[serde(default)]
    pub add: Vec<String>,
    #[serde(default)]
    pub remove: Vec<String>,
}

impl ComparisonEdit {
    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.remove.is_empty()
    }
}

/// State of one revision: the document and an analyzer whose elimination
/// bases are shared by every query until the next edit.
pub struct Revision {
    pub number: u64,
    pub document: ProblemDocument,
    pub analyzer: Arc<Analyzer>,
}

pub struct Session {
    pub id: String,
    initial: ProblemDocument,
    current: RwLock<Arc<Revision>>,
    /// Serializes edits; reads go through `current` only.
    edits: Mutex<Vec<ComparisonEdit>>,
    analyses: Mutex<Vec<Arc<Vec<u8>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub revision: u64,
    pub comparisons: Vec<String>,
    pub analyses: usize,
    pub document: ProblemDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionSummary {
    pub id: String,
    pub revision: u64,
    pub comparisons: Vec<String>,
    pub report: ReportDocument,
}

fn revision(number: u64, document: ProblemDocument) -> Result<Revision> {
    let problem = document.to_problem()?;
    let analyzer = Arc::new(Analyzer::new(&problem)?);
    Ok(Revision { number, document, analyzer })
}

fn comparison_ids(doc: &ProblemDocument) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for chain in &doc.comparisons {
        out.extend(ReferenceComparisons::from_chain(chain)?.pairs().iter().map(Comparison::id));
    }
    Ok(out)
}

/// Applies `edit` to the document's comparisons; the result is validated
/// by the caller when the new revision is built.
fn apply(doc: &ProblemDocument, edit: &ComparisonEdit) -> Result<ProblemDocument> {
    let mut pairs: Vec<Comparison> = Vec::new();
    for chain in &doc.comparisons {
        pairs.extend(ReferenceComparisons::from_chain(chain)?.pairs().iter().cloned());
    }
    let mut current = ReferenceComparisons::new(pairs);
    for (i, text) in edit.remove.iter().enumerate() {
        let id = Comparison::parse(text).map_err(|e| at("remove", i, e))?.id();
        if !current.remove(&id) {
            return Err(at("remove", i, Error::InvalidModel(format!("comparison `{id}` is not present"))));
        }
    }
    for (i, text) in edit.add.iter().enumerate() {
        let added = ReferenceComparisons::from_chain(text).map_err(|e| at("add", i, e))?;
        if added.is_empty() {
            return Err(at("add", i, Error::InvalidModel("empty comparison".into())));
        }
        for c in added.pairs() {
            current.push(c.clone());
        }
    }
    let mut next = doc.clone();
    next.set_comparisons(current.pairs());
    Ok(next)
}

fn at(field: &str, i: usize, e: Error) -> Error {
    let message = match e {
        Error::Parse { message, .. } => message,
        other => other.to_string(),
    };
    Error::Parse { location: format!("{field}[{i}]"), message }
}

impl Session {
    fn new(id: String, document: ProblemDocument) -> Result<Self> {
        let first = revision(0, document.clone())?;
        Ok(Self {
            id,
            initial: document,
            current: RwLock::new(Arc::new(first)),
            edits: Mutex::new(Vec::new()),
            analyses: Mutex::new(Vec::new()),
        })
    }

    pub fn current(&self) -> Arc<Revision> {
        self.current.read().expect("revision lock").clone()
    }

    pub fn summary(&self) -> Result<SessionSummary> {
        let rev = self.current();
        Ok(SessionSummary {
            id: self.id.clone(),
            revision: rev.number,
            comparisons: comparison_ids(&rev.document)?,
            analyses: self.analyses.lock().expect("analyses lock").len(),
            document: rev.document.clone(),
        })
    }

    /// Applies an edit and returns the fresh consistency verdict. A rejected
    /// edit leaves the revision unchanged.
    pub fn revise(&self, edit: ComparisonEdit) -> Result<RevisionSummary> {
        let mut log = self.edits.lock().expect("edit lock");
        let rev = if edit.is_empty() {
            self.current()
        } else {
            let base = self.current();
            let document = apply(&base.document, &edit)?;
            let next = Arc::new(revision(base.number + 1, document)?);
            *self.current.write().expect("revision lock") = next.clone();
            log.push(edit);
            next
        };
        drop(log);
        let report = run_analysis(&rev.analyzer, &AnalysisRequest::Check { explain_all: false })?;
        Ok(RevisionSummary {
            id: self.id.clone(),
            revision: rev.number,
            comparisons: comparison_ids(&rev.document)?,
            report,
        })
    }

    /// Runs an analysis on the current revision; returns its index and the
    /// structured report bytes.
    pub fn analyze(&self, request: &AnalysisRequest) -> Result<(usize, Arc<Vec<u8>>)> {
        let rev = self.current();
        let report = run_analysis(&rev.analyzer, request)?;
        let bytes = Arc::new(render_report(&report, ReportFormat::Structured));
        let mut stored = self.analyses.lock().expect("analyses lock");
        stored.push(bytes.clone());
        Ok((stored.len() - 1, bytes))
    }

    pub fn analysis(&self, n: usize) -> Option<Arc<Vec<u8>>> {
        self.analyses.lock().expect("analyses lock").get(n).cloned()
    }

    fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            document: self.initial.clone(),
            edits: self.edits.lock().expect("edit lock").clone(),
        }
    }
}

/// Replayable persisted form of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub document: ProblemDocument,
    pub edits: Vec<ComparisonEdit>,
}

#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, document: ProblemDocument) -> Result<Arc<Session>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.insert(id, document)
    }

    fn insert(&self, id: String, document: ProblemDocument) -> Result<Arc<Session>> {
        let session = Arc::new(Session::new(id.clone(), document)?);
        self.sessions.write().expect("store lock").insert(id, session.clone());
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.read().expect("store lock").get(id).cloned()
    }

    pub fn snapshot(&self) -> Vec<SessionSnapshot> {
        let mut all: Vec<SessionSnapshot> =
            self.sessions.read().expect("store lock").values().map(|s| s.snapshot()).collect();
        all.sort_by(|a, b| a.id.cmp(&b.id));
        all
    }

    /// Rebuilds sessions by replaying their edit logs.
    pub fn restore(snapshots: Vec<SessionSnapshot>) -> Result<Self> {
        let store = Self::new();
        for snap in snapshots {
            let session = store.insert(snap.id, snap.document)?;
            for edit in snap.edits {
                session.revise(edit)?;
            }
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use segdesc_core::io::bundled;

    fn iter1() -> ProblemDocument {
        ProblemDocument::from_json(bundled("sales-manager-iter1").unwrap()).unwrap()
    }

    #[test]
    fn removing_the_two_judgments_restores_consistency() {
        let store = SessionStore::new();
        let s = store.create(iter1()).unwrap();
        let before = s.revise(ComparisonEdit::default()).unwrap();
        assert_eq!((before.revision, before.report.feasible), (0, Some(false)));
        let edit = ComparisonEdit { add: vec![], remove: vec!["a8>a14".into(), "a14 ≻ a7".into()] };
        let after = s.revise(edit).unwrap();
        assert_eq!((after.revision, after.report.feasible), (1, Some(true)));
        assert_eq!(after.comparisons, ["a6~a9", "a9>a8"]);
    }

    #[test]
    fn rejected_edits_keep_the_revision() {
        let store = SessionStore::new();
        let s = store.create(iter1()).unwrap();
        let self_pair = ComparisonEdit { add: vec!["a3>a3".into()], remove: vec![] };
        assert!(s.revise(self_pair).is_err());
        let unknown = ComparisonEdit { add: vec!["a3>a99".into()], remove: vec![] };
        assert!(s.revise(unknown).is_err());
        assert_eq!(s.current().number, 0);
    }

    #[test]
    fn snapshot_replays() {
        let store = SessionStore::new();
        let s = store.create(iter1()).unwrap();
        s.revise(ComparisonEdit { add: vec![], remove: vec!["a8>a14".into()] }).unwrap();
        let snaps = store.snapshot();
        let restored = SessionStore::restore(snaps).unwrap();
        let r = restored.get(&s.id).unwrap();
        assert_eq!(r.current().number, 1);
        assert_eq!(r.current().document, s.current().document);
    }
}
