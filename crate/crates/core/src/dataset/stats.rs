//! Summary statistics of a generated set.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::graph::catalog;

use super::QuestionRecord;
use crate::query::Answer;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub total: usize,
    pub by_rung: BTreeMap<u8, usize>,
    pub by_query: BTreeMap<String, usize>,
    pub by_graph: BTreeMap<String, usize>,
    pub by_alignment: BTreeMap<String, usize>,
    /// Fraction of "yes" answers; 0 for an empty set.
    pub positive_fraction: f64,
    /// Over context plus question.
    pub mean_sentences_per_question: f64,
    pub mean_words_per_question: f64,
    pub mean_sentences_per_explanation: f64,
    pub mean_words_per_explanation: f64,
    pub mean_nodes_per_graph: f64,
    pub mean_edges_per_graph: f64,
}

/// Sentences end with `.`, `?` or `!` followed by whitespace or the end of the text.
pub fn count_sentences(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    chars
        .iter()
        .enumerate()
        .filter(|&(i, c)| matches!(c, '.' | '?' | '!') && chars.get(i + 1).is_none_or(|n| n.is_whitespace()))
        .count()
}

pub fn count_words(text: &str) -> usize {
    text.split_whitespace().count()
}

fn mean(sum: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

pub fn compute_stats(records: &[QuestionRecord]) -> DatasetStats {
    let n = records.len();
    let mut by_rung = BTreeMap::new();
    let mut by_query = BTreeMap::new();
    let mut by_graph = BTreeMap::new();
    let mut by_alignment = BTreeMap::new();
    let (mut yes, mut qs, mut qw, mut es, mut ew, mut nodes, mut edges) = (0, 0, 0, 0, 0, 0, 0);
    for r in records {
        *by_rung.entry(r.rung).or_insert(0) += 1;
        *by_query.entry(r.query_type.as_str().to_string()).or_insert(0) += 1;
        *by_graph.entry(r.graph.as_str().to_string()).or_insert(0) += 1;
        *by_alignment.entry(r.alignment.as_str().to_string()).or_insert(0) += 1;
        yes += usize::from(r.answer == Answer::Yes);
        let full = format!("{} {}", r.given_info, r.question);
        qs += count_sentences(&full);
        qw += count_words(&full);
        es += count_sentences(&r.reasoning);
        ew += count_words(&r.reasoning);
        let g = catalog(r.graph);
        nodes += g.dag.len();
        edges += g.dag.edge_count();
    }
    DatasetStats {
        total: n,
        by_rung,
        by_query,
        by_graph,
        by_alignment,
        positive_fraction: mean(yes, n),
        mean_sentences_per_question: mean(qs, n),
        mean_words_per_question: mean(qw, n),
        mean_sentences_per_explanation: mean(es, n),
        mean_words_per_explanation: mean(ew, n),
        mean_nodes_per_graph: mean(nodes, n),
        mean_edges_per_graph: mean(edges, n),
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records                      {}", self.total)?;
        for (rung, c) in &self.by_rung {
            writeln!(f, "  rung {rung:<22} {c}")?;
        }
        for (label, map) in [("query", &self.by_query), ("graph", &self.by_graph), ("alignment", &self.by_alignment)] {
            writeln!(f, "by {label}")?;
            for (k, c) in map {
                writeln!(f, "  {k:<27} {c}")?;
            }
        }
        writeln!(f, "positive class (%)           {:.1}", 100.0 * self.positive_fraction)?;
        writeln!(f, "sentences / question         {:.2}", self.mean_sentences_per_question)?;
        writeln!(f, "words / question             {:.2}", self.mean_words_per_question)?;
        writeln!(f, "sentences / explanation      {:.2}", self.mean_sentences_per_explanation)?;
        writeln!(f, "words / explanation          {:.2}", self.mean_words_per_explanation)?;
        writeln!(f, "nodes / graph                {:.2}", self.mean_nodes_per_graph)?;
        write!(f, "edges / graph                {:.2}", self.mean_edges_per_graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, GenConfig};

    #[test]
    fn sentence_counting() {
        assert_eq!(count_sentences("A is 60.5%. B? C!"), 3);
        assert_eq!(count_sentences("no terminal"), 0);
        assert_eq!(count_words("  a b\nc "), 3);
    }

    #[test]
    fn empty_stats_are_valid() {
        let s = compute_stats(&[]);
        assert_eq!(s.total, 0);
        assert_eq!(s.positive_fraction, 0.0);
        assert!(s.by_rung.is_empty());
    }

    #[test]
    fn counts_sum_to_total() {
        let records = generate(&GenConfig { size: 30, seed: 5, ..GenConfig::default() }).unwrap();
        let s = compute_stats(&records);
        for map in [&s.by_query, &s.by_graph, &s.by_alignment] {
            assert_eq!(map.values().sum::<usize>(), 30);
        }
        assert_eq!(s.by_rung.values().sum::<usize>(), 30);
    }

    #[test]
    fn single_confounding_record() {
        let records = generate(&GenConfig { size: 200, seed: 1, ..GenConfig::default() }).unwrap();
        let r = records.iter().find(|r| r.graph == crate::GraphName::Confounding).unwrap();
        let s = compute_stats(std::slice::from_ref(r));
        assert_eq!((s.mean_nodes_per_graph, s.mean_edges_per_graph), (3.0, 3.0));
    }
}
