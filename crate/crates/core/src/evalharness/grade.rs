//! Accuracy overall and by rung, alignment and query type.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dataset::QuestionRecord;
use crate::graph::catalog;
use crate::query::QueryType;
use crate::verbalize::AlignmentLevel;

use super::chain::{Transcript, SUBQUESTIONS};
use super::{EvalError, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub graded: usize,
    pub correct: usize,
    /// Percent; 0 when nothing was graded.
    pub accuracy: f64,
}

impl Stratum {
    fn add(&mut self, correct: bool) {
        self.graded += 1;
        self.correct += usize::from(correct);
        self.accuracy = 100.0 * self.correct as f64 / self.graded as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: String,
    pub overall: Stratum,
    /// Fraction of transcripts whose verdict could not be parsed, in percent.
    pub unknown_rate: f64,
    pub by_rung: BTreeMap<u8, Stratum>,
    pub by_alignment: BTreeMap<String, Stratum>,
    pub by_query: BTreeMap<String, Stratum>,
    /// Mean size of the symmetric difference between the edges named in the
    /// step-1 response and the true edges, over transcripts that asked step 1.
    pub graph_edit_distance: Option<f64>,
    /// Percent of step-2 responses naming the right query type.
    pub query_type_accuracy: Option<f64>,
}

fn edges_in(text: &str) -> BTreeSet<(String, String)> {
    let re = Regex::new(r"\b([A-Za-z]\w*)\s*->\s*([A-Za-z]\w*)\b").expect("valid regex");
    re.captures_iter(text).map(|c| (c[1].to_string(), c[2].to_string())).collect()
}

fn true_edges(record: &QuestionRecord) -> BTreeSet<(String, String)> {
    let dag = catalog(record.graph).dag;
    dag.edges().into_iter().map(|(a, b)| (dag.name(a).to_string(), dag.name(b).to_string())).collect()
}

/// The query type named earliest in `text`, preferring the longest name.
fn named_query_type(text: &str) -> Option<QueryType> {
    let lower = text.to_ascii_lowercase();
    QueryType::ALL
        .iter()
        .flat_map(|&q| [q.label().to_string(), q.as_str().replace('_', " ")].into_iter().map(move |n| (q, n)))
        .filter_map(|(q, name)| lower.find(&name).map(|pos| (pos, std::cmp::Reverse(name.len()), q)))
        .min()
        .map(|(_, _, q)| q)
}

fn response_to(t: &Transcript, step: usize) -> Option<&str> {
    t.exchanges.iter().find(|e| e.subquestion == SUBQUESTIONS[step]).map(|e| e.response.as_str())
}

/// Grade transcripts against their records. Every transcript must match
/// exactly one record and vice versa. Unknown verdicts count as wrong.
pub fn grade(transcripts: &[Transcript], records: &[QuestionRecord]) -> Result<Report, EvalError> {
    let mut by_id: HashMap<&str, &QuestionRecord> = HashMap::new();
    for r in records {
        if by_id.insert(r.id.as_str(), r).is_some() {
            return Err(EvalError::DuplicateId(r.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    let mut report = Report {
        model: transcripts.first().map(|t| t.model.clone()).unwrap_or_default(),
        overall: Stratum::default(),
        unknown_rate: 0.0,
        by_rung: BTreeMap::new(),
        by_alignment: BTreeMap::new(),
        by_query: BTreeMap::new(),
        graph_edit_distance: None,
        query_type_accuracy: None,
    };
    for a in AlignmentLevel::ALL {
        report.by_alignment.insert(a.as_str().to_string(), Stratum::default());
    }
    let (mut unknown, mut ged, mut ged_n, mut qt, mut qt_n) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for t in transcripts {
        let r = by_id.get(t.record_id.as_str()).ok_or_else(|| EvalError::UnknownRecord(t.record_id.clone()))?;
        if !seen.insert(t.record_id.as_str()) {
            return Err(EvalError::DuplicateId(t.record_id.clone()));
        }
        let ok = t.final_answer.matches(r.answer);
        unknown += usize::from(t.final_answer == Verdict::Unknown);
        report.overall.add(ok);
        report.by_rung.entry(r.rung).or_default().add(ok);
        report.by_alignment.entry(r.alignment.as_str().to_string()).or_default().add(ok);
        report.by_query.entry(r.query_type.as_str().to_string()).or_default().add(ok);
        if let Some(text) = response_to(t, 0) {
            ged += edges_in(text).symmetric_difference(&true_edges(r)).count();
            ged_n += 1;
        }
        if let Some(text) = response_to(t, 1) {
            qt += usize::from(named_query_type(text) == Some(r.query_type));
            qt_n += 1;
        }
    }
    if let Some(missing) = records.iter().find(|r| !seen.contains(r.id.as_str())) {
        return Err(EvalError::MissingTranscript(missing.id.clone()));
    }
    let n = report.overall.graded;
    report.unknown_rate = if n == 0 { 0.0 } else { 100.0 * unknown as f64 / n as f64 };
    report.graph_edit_distance = (ged_n > 0).then(|| ged as f64 / ged_n as f64);
    report.query_type_accuracy = (qt_n > 0).then(|| 100.0 * qt as f64 / qt_n as f64);
    Ok(report)
}

impl Report {
    /// E.g. `mock: 100.00 overall`.
    pub fn summary_line(&self) -> String {
        format!("{}: {:.2} overall", self.model, self.overall.accuracy)
    }

    /// Aligned plain-text tables.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let rung = |r: u8| self.by_rung.get(&r).copied().unwrap_or_default().accuracy;
        let align = |a: AlignmentLevel| self.by_alignment.get(a.as_str()).copied().unwrap_or_default().accuracy;
        let _ = writeln!(
            s,
            "{:<20} {:>6} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9} {:>8}",
            "model", "n", "overall", "rung 1", "rung 2", "rung 3", "comm", "anti", "nonsense", "unknown"
        );
        let _ = writeln!(
            s,
            "{:<20} {:>6} {:>8.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>9.2} {:>8.2}",
            self.model,
            self.overall.graded,
            self.overall.accuracy,
            rung(1),
            rung(2),
            rung(3),
            align(AlignmentLevel::Commonsensical),
            align(AlignmentLevel::AntiCommonsensical),
            align(AlignmentLevel::Nonsensical),
            self.unknown_rate
        );
        let _ = writeln!(s, "\n{:<20} {:>6} {:>8}", "query type", "n", "acc");
        for (q, st) in &self.by_query {
            let _ = writeln!(s, "{:<20} {:>6} {:>8.2}", q, st.graded, st.accuracy);
        }
        if let Some(g) = self.graph_edit_distance {
            let _ = writeln!(s, "\nstep 1 graph edit distance  {g:.2}");
        }
        if let Some(q) = self.query_type_accuracy {
            let _ = writeln!(s, "step 2 query type accuracy  {q:.2}");
        }
        s
    }
}
