use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, ratio, serde_exact, Rational};
use crate::uta::{Comparison, Criterion, Marginals, ModelConfig, PerformanceTable, Problem, ReferenceComparisons};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    #[default]
    Gain,
    Cost,
}

impl Direction {
    fn is_gain(&self) -> bool {
        *self == Direction::Gain
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Direction::is_gain")]
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    #[serde(with = "serde_exact")]
    pub low: Rational,
    #[serde(with = "serde_exact")]
    pub high: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeDoc {
    pub id: String,
    pub performances: Vec<Exact>,
}

/// A rational that reads JSON numbers or strings and writes strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exact(#[serde(with = "serde_exact")] pub Rational);

/// Ranking problem as stored on disk. Each comparison entry is a chain
/// such as `a6 ~ a9 > a8`; a single pair is a chain of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub criteria: Vec<CriterionDoc>,
    pub alternatives: Vec<AlternativeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<String>,
    #[serde(default = "default_epsilon", with = "serde_exact")]
    pub epsilon: Rational,
    #[serde(default)]
    pub marginals: Marginals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria_subset: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_exact::option")]
    pub hypothesis_epsilon: Option<Rational>,
}

fn default_epsilon() -> Rational {
    ratio(1, 100)
}

/// Comparison settings kept next to a CSV performance table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferencesDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub criteria: Vec<CriterionDoc>,
    #[serde(default)]
    pub comparisons: Vec<String>,
    #[serde(default = "default_epsilon", with = "serde_exact")]
    pub epsilon: Rational,
    #[serde(default)]
    pub marginals: Marginals,
    #[serde(default)]
    pub criteria_subset: Option<Vec<String>>,
    #[serde(default, with = "serde_exact::option")]
    pub hypothesis_epsilon: Option<Rational>,
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let location = if path == "." || path.is_empty() {
            format!("line {} column {}", inner.line(), inner.column())
        } else {
            format!("field `{}` (line {} column {})", path, inner.line(), inner.column())
        };
        let mut message = inner.to_string();
        if let Some(cut) = message.find(" at line ") {
            message.truncate(cut);
        }
        Error::Parse { location, message }
    })
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Builds a document from a CSV table (`alternative,<criterion>...`) and
    /// a JSON preferences sidecar.
    pub fn from_csv(csv_text: &str, preferences_json: &str) -> Result<Self> {
        let prefs: PreferencesDoc = from_json(preferences_json)?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { location: "csv header".into(), message: e.to_string() })?
            .clone();
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut alternatives = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::Parse { location: format!("csv line {line}"), message: e.to_string() })?;
            let id = record.get(0).unwrap_or_default().to_string();
            let performances = record
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, cell)| {
                    parse_rational(cell).map(Exact).map_err(|e| Error::Parse {
                        location: format!("csv line {line}, column `{}`", names.get(j).map_or("?", |s| s.as_str())),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            alternatives.push(AlternativeDoc { id, performances });
        }
        let criteria = names
            .iter()
            .map(|n| {
                prefs.criteria.iter().find(|c| &c.name == n).cloned().unwrap_or(CriterionDoc {
                    name: n.clone(),
                    direction: Direction::Gain,
                    domain: None,
                    gamma: None,
                })
            })
            .collect();
        Ok(Self {
            name: prefs.name,
            criteria,
            alternatives,
            comparisons: prefs.comparisons,
            epsilon: prefs.epsilon,
            marginals: prefs.marginals,
            criteria_subset: prefs.criteria_subset,
            hypothesis_epsilon: prefs.hypothesis_epsilon,
        })
    }

    /// Validated model problem; cost criteria are negated.
    pub fn to_problem(&self) -> Result<Problem> {
        let n = self.criteria.len();
        let mut rows = Vec::with_capacity(self.alternatives.len());
        for (i, alt) in self.alternatives.iter().enumerate() {
            if alt.performances.len() != n {
                return Err(Error::Parse {
                    location: format!("alternatives[{i}].performances"),
                    message: format!("expected {n} values, found {}", alt.performances.len()),
                });
            }
            let row = alt
                .performances
                .iter()
                .zip(&self.criteria)
                .map(|(v, c)| match c.direction {
                    Direction::Gain => v.0.clone(),
                    Direction::Cost => -v.0.clone(),
                })
                .collect();
            rows.push(row);
        }
        let ids = self.alternatives.iter().map(|a| a.id.clone()).collect();
        let table = PerformanceTable::new(ids, rows)?;
        let mut criteria = Vec::with_capacity(n);
        for (j, c) in self.criteria.iter().enumerate() {
            let (low, high) = match (&c.domain, c.direction) {
                (Some(d), Direction::Gain) => (d.low.clone(), d.high.clone()),
                (Some(d), Direction::Cost) => (-d.high.clone(), -d.low.clone()),
                (None, _) => table.observed_domain(j).ok_or_else(|| Error::Parse {
                    location: format!("criteria[{j}]"),
                    message: "no alternatives to derive the domain from".into(),
                })?,
            };
            criteria.push(Criterion::new(c.name.clone(), low, high).with_gamma(c.gamma.unwrap_or(2)));
        }
        let mut comparisons = ReferenceComparisons::default();
        for (i, chain) in self.comparisons.iter().enumerate() {
            let parsed = ReferenceComparisons::from_chain(chain).map_err(|e| Error::Parse {
                location: format!("comparisons[{i}]"),
                message: e.to_string(),
            })?;
            for c in parsed.pairs() {
                comparisons.push(c.clone());
            }
        }
        let config = ModelConfig {
            epsilon: self.epsilon.clone(),
            marginals: self.marginals,
            criteria_subset: self.criteria_subset.clone(),
            hypothesis_epsilon: self.hypothesis_epsilon.clone(),
        };
        Problem::new(table, criteria, comparisons, config).map_err(|e| locate(self, e))
    }

    /// Replaces the comparison list by the given pairs.
    pub fn set_comparisons(&mut self, pairs: &[Comparison]) {
        self.comparisons = pairs.iter().map(Comparison::id).collect();
    }
}

fn locate(doc: &ProblemDocument, e: Error) -> Error {
    let in_comparisons = |name: &str| {
        doc.comparisons.iter().position(|c| {
            ReferenceComparisons::from_chain(c)
                .map(|r| r.pairs().iter().any(|p| p.left == name || p.right == name))
                .unwrap_or(false)
        })
    };
    match &e {
        Error::UnknownAlternative(name) | Error::SelfComparison(name) => match in_comparisons(name) {
            Some(i) => Error::Parse { location: format!("comparisons[{i}]"), message: e.to_string() },
            None => e,
        },
        Error::NonPositiveEpsilon => Error::Parse { location: "field `epsilon`".into(), message: e.to_string() },
        _ => e,
    }
}

/// Parses either a JSON problem document or, if `sidecar` is given, a CSV
/// table with its preferences file.
pub fn parse_problem(bytes: &[u8], sidecar: Option<&[u8]>) -> Result<Problem> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Parse { location: "input".into(), message: e.to_string() })?;
    let doc = match sidecar {
        None => ProblemDocument::from_json(text)?,
        Some(prefs) => {
            let prefs = std::str::from_utf8(prefs)
                .map_err(|e| Error::Parse { location: "preferences".into(), message: e.to_string() })?;
            ProblemDocument::from_csv(text, prefs)?
        }
    };
    doc.to_problem()
}

/// Datasets shipped with the library, by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "sales-manager" => Some(include_str!("../../data/sales-manager.json")),
        "sales-manager-iter1" => Some(include_str!("../../data/sales-manager-iter1.json")),
        "sales-manager-iter2" => Some(include_str!("../../data/sales-manager-iter2.json")),
        _ => None,
    }
}

pub const BUNDLED: [&str; 3] = ["sales-manager", "sales-manager-iter1", "sales-manager-iter2"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn bundled_table_has_fifteen_alternatives() {
        let p = ProblemDocument::from_json(bundled("sales-manager").unwrap()).unwrap().to_problem().unwrap();
        assert_eq!(p.table.len(), 15);
        assert_eq!(p.criteria.len(), 3);
        assert_eq!(p.config.epsilon, ratio(1, 100));
        assert_eq!((p.criteria[1].domain_low.clone(), p.criteria[1].domain_high.clone()), (int(2), int(62)));
    }

    #[test]
    fn chain_expands() {
        let p = ProblemDocument::from_json(bundled("sales-manager-iter2").unwrap()).unwrap().to_problem().unwrap();
        let ids: Vec<String> = p.comparisons.pairs().iter().map(Comparison::id).collect();
        assert_eq!(ids, ["a6~a9", "a9>a8", "a8>a7"]);
    }

    #[test]
    fn round_trips() {
        let doc = ProblemDocument::from_json(bundled("sales-manager-iter1").unwrap()).unwrap();
        let again = ProblemDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn bad_epsilon_names_the_field() {
        let text = r#"{"criteria":[{"name":"g"}],"alternatives":[],"epsilon":"bogus"}"#;
        let Error::Parse { location, .. } = ProblemDocument::from_json(text).unwrap_err() else { panic!() };
        assert!(location.contains("epsilon"), "{location}");
    }

    #[test]
    fn unknown_alternative_points_at_comparison() {
        let mut doc = ProblemDocument::from_json(bundled("sales-manager").unwrap()).unwrap();
        doc.comparisons = vec!["a1 > a2".into(), "a3 > zz".into()];
        let Error::Parse { location, .. } = doc.to_problem().unwrap_err() else { panic!() };
        assert_eq!(location, "comparisons[1]");
    }

    #[test]
    fn csv_with_sidecar() {
        let csv = "alternative,g1,g2\na,1,0.5\nb,0,1\n";
        let prefs = r#"{"comparisons":["a > b"],"epsilon":"0.05"}"#;
        let p = parse_problem(csv.as_bytes(), Some(prefs.as_bytes())).unwrap();
        assert_eq!(p.table.perf(0, 1), &ratio(1, 2));
        assert_eq!(p.config.epsilon, ratio(1, 20));
        let bad = "alternative,g1\na,x\n";
        let Error::Parse { location, .. } = parse_problem(bad.as_bytes(), Some(prefs.as_bytes())).unwrap_err() else {
            panic!()
        };
        assert!(location.contains("line 2"));
    }

    #[test]
    fn cost_criteria_are_negated() {
        let text = r#"{"criteria":[{"name":"price","direction":"COST"}],
            "alternatives":[{"id":"a","performances":[10]},{"id":"b","performances":[20]}]}"#;
        let p = ProblemDocument::from_json(text).unwrap().to_problem().unwrap();
        assert_eq!(p.table.perf(0, 0), &int(-10));
        assert_eq!(p.criteria[0].domain_low, int(-20));
    }
}
