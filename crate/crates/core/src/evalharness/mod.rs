//! Chain-of-thought evaluation of language models on generated questions.
//!
//! A question is asked as a chain of five subquestions. Each prompt repeats
//! the question and every earlier subquestion-response pair, so the model
//! sees its own work. The last response is parsed for a yes/no verdict and
//! graded against the record.

pub mod chain;
pub mod client;
pub mod grade;

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::Answer;

pub use chain::{build_prompt, causalcot_prompts, prompt_leaks_answer, record_context, run, RunConfig, Exchange, Transcript, SUBQUESTIONS, SYSTEM_PROMPT};
pub use client::{ClientError, Completion, DecodingConfig, HttpClient, HttpConfig, MockClient, ModelClient, Usage};
pub use grade::{grade, Report, Stratum};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid harness config: {0}")]
    Config(String),
    #[error("transcript `{0}` has no matching record")]
    UnknownRecord(String),
    #[error("record `{0}` has no transcript")]
    MissingTranscript(String),
    #[error("id `{0}` appears more than once")]
    DuplicateId(String),
}

/// Parsed final answer of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn matches(self, answer: Answer) -> bool {
        matches!((self, answer), (Verdict::Yes, Answer::Yes) | (Verdict::No, Answer::No))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

fn verdict_of(word: &str) -> Verdict {
    if word.eq_ignore_ascii_case("yes") {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

/// Yes, no or unknown from free text. An explicit "answer is ..." wins
/// (the last one if several); otherwise a leading or trailing yes/no.
/// Bare numbers are not interpreted.
pub fn parse_final_answer(text: &str) -> Verdict {
    static PATTERNS: OnceLock<[Regex; 3]> = OnceLock::new();
    let [explicit, leading, trailing] = PATTERNS.get_or_init(|| {
        [
            Regex::new(r#"(?i)\banswer\s*(?:is|:|=)?\s*[*"'`]*\s*(yes|no)\b"#).expect("valid regex"),
            Regex::new(r"(?i)^\W*(yes|no)\b").expect("valid regex"),
            Regex::new(r"(?i)\b(yes|no)\W*$").expect("valid regex"),
        ]
    });
    if let Some(c) = explicit.captures_iter(text).last() {
        return verdict_of(&c[1]);
    }
    for re in [leading, trailing] {
        if let Some(c) = re.captures(text.trim()) {
            return verdict_of(&c[1]);
        }
    }
    Verdict::Unknown
}
