//! Stories and the text rendered from them.
//!
//! A story binds every node of a graph to a concept with five grammatical
//! forms. Rendering turns graphs, data, queries and solutions into prose.

pub mod alignment;
pub mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CgteSpec, GraphName};

pub use alignment::{apply_anti_action, nonsense_story, transform_alignment, AntiAction, NONSENSE_WORDS};
pub use render::{
    format_percent, parse_data_text, render_data_text, render_explanation, render_given_info, render_graph_text,
    render_question, ExplanationInput,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerbalizeError {
    #[error("story `{story}` has no binding for node `{node}`")]
    MissingBinding { story: String, node: String },
    #[error("story `{story}` is not written for graph {graph}")]
    IncompatibleGraph { story: String, graph: GraphName },
    #[error("story `{story}` has an empty `{form}` form for node `{node}`")]
    EmptyForm { story: String, node: String, form: &'static str },
    #[error("no replacement concept left in the {0} pool")]
    PoolExhausted(&'static str),
    #[error("only commonsensical stories can be transformed, `{0}` is not")]
    NotCommonsensical(String),
    #[error("unknown alignment level `{0}`")]
    UnknownAlignment(String),
    #[error("unknown story `{0}`")]
    UnknownStory(String),
    #[error("story registry is malformed: {0}")]
    Registry(String),
    #[error("data sentence {index} cannot be parsed: {sentence}")]
    Unparsable { index: usize, sentence: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentLevel {
    Commonsensical,
    AntiCommonsensical,
    Nonsensical,
}

impl AlignmentLevel {
    pub const ALL: [AlignmentLevel; 3] =
        [AlignmentLevel::Commonsensical, AlignmentLevel::AntiCommonsensical, AlignmentLevel::Nonsensical];

    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentLevel::Commonsensical => "commonsensical",
            AlignmentLevel::AntiCommonsensical => "anti_commonsensical",
            AlignmentLevel::Nonsensical => "nonsensical",
        }
    }
}

impl fmt::Display for AlignmentLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlignmentLevel {
    type Err = VerbalizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlignmentLevel::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| VerbalizeError::UnknownAlignment(s.to_string()))
    }
}

/// Grammatical forms of one concept. Index 0 and 1 are the two values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    /// The variable as a whole, e.g. "recovery status".
    pub overall: String,
    /// Noun phrase, e.g. "recovery".
    pub noun: [String; 2],
    /// Clause, e.g. "the patient recovers".
    pub sent: [String; 2],
    /// Noun with attributive clause, e.g. "patients who recover".
    pub attr: [String; 2],
    /// Third conditional, e.g. "if the patient had recovered".
    pub cond: [String; 2],
}

impl Binding {
    pub fn noun(&self, v: u8) -> &str {
        &self.noun[v as usize]
    }

    pub fn sent(&self, v: u8) -> &str {
        &self.sent[v as usize]
    }

    pub fn attr(&self, v: u8) -> &str {
        &self.attr[v as usize]
    }

    pub fn cond(&self, v: u8) -> &str {
        &self.cond[v as usize]
    }

    /// Every surface string of this binding.
    pub fn surface_forms(&self) -> Vec<&str> {
        let mut out = vec![self.overall.as_str()];
        for pair in [&self.noun, &self.sent, &self.attr, &self.cond] {
            out.extend(pair.iter().map(String::as_str));
        }
        out
    }

    fn check(&self, story: &str, node: &str) -> Result<(), VerbalizeError> {
        let forms: [(&'static str, Vec<&String>); 5] = [
            ("overall", vec![&self.overall]),
            ("noun", self.noun.iter().collect()),
            ("sent", self.sent.iter().collect()),
            ("attr", self.attr.iter().collect()),
            ("cond", self.cond.iter().collect()),
        ];
        for (form, values) in forms {
            if values.iter().any(|v| v.trim().is_empty()) {
                return Err(VerbalizeError::EmptyForm { story: story.to_string(), node: node.to_string(), form });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub id: String,
    pub alignment: AlignmentLevel,
    pub graphs: Vec<GraphName>,
    pub bindings: BTreeMap<String, Binding>,
}

impl Story {
    pub fn binding(&self, node: &str) -> Result<&Binding, VerbalizeError> {
        self.bindings
            .get(node)
            .ok_or_else(|| VerbalizeError::MissingBinding { story: self.id.clone(), node: node.to_string() })
    }

    /// Error unless the story is written for `cgte` and binds all of its nodes.
    pub fn check_compatible(&self, cgte: &CgteSpec) -> Result<(), VerbalizeError> {
        if !self.graphs.contains(&cgte.name) {
            return Err(VerbalizeError::IncompatibleGraph { story: self.id.clone(), graph: cgte.name });
        }
        for node in cgte.dag.nodes() {
            self.binding(&node.name)?.check(&self.id, &node.name)?;
        }
        Ok(())
    }
}

/// The bundled stories, parsed once.
pub fn stories() -> &'static [Story] {
    static STORIES: OnceLock<Vec<Story>> = OnceLock::new();
    STORIES.get_or_init(|| {
        let stories: Vec<Story> =
            serde_json::from_str(include_str!("../../data/stories.json")).expect("bundled stories parse");
        stories
    })
}

/// Bundled stories written for `graph`, in file order.
pub fn stories_for(graph: GraphName) -> Vec<&'static Story> {
    stories().iter().filter(|s| s.graphs.contains(&graph)).collect()
}

pub fn story_by_id(id: &str) -> Result<&'static Story, VerbalizeError> {
    stories().iter().find(|s| s.id == id).ok_or_else(|| VerbalizeError::UnknownStory(id.to_string()))
}

/// Upper-case the first character.
pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// "a", "a and b", "a, b and c".
pub fn join_and(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [a] => a.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}
