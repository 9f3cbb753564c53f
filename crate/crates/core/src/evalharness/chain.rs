//! Building and running the five-step prompt chain.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dataset::QuestionRecord;

use super::client::{DecodingConfig, ModelClient, Usage};
use super::{parse_final_answer, EvalError, Verdict};

pub const SYSTEM_PROMPT: &str = "You are an expert in causal inference. Work through each step you are given. \
When asked for the final answer, end your reply with \"the answer is yes\" or \"the answer is no\".";

/// The chain, in order. The last one asks for the final answer.
pub const SUBQUESTIONS: [&str; 5] = [
    "Step 1) Extract the causal graph: name each variable with a single letter and list every direct effect as an edge such as \"X->Y\".",
    "Step 2) Identify the query type of the question (for example marginal probability, conditional probability, average treatment effect, counterfactual probability, natural direct effect) and write it in symbolic form.",
    "Step 3) Formalize the query and derive an estimand that can be computed from the observed data.",
    "Step 4) Collect all the available data from the context in probability notation.",
    "Step 5) Given all the information above, solve for the query. Answer step by step.",
];

/// Context and question, as they open every prompt.
pub fn record_context(record: &QuestionRecord) -> String {
    format!("{} {}", record.given_info, record.question)
}

/// The subquestions asked for `record`.
pub fn causalcot_prompts(_record: &QuestionRecord) -> Vec<String> {
    SUBQUESTIONS.iter().map(|s| s.to_string()).collect()
}

/// Prompt `m` (zero-based): the context, then every earlier subquestion
/// with its response, then subquestion `m`.
pub fn build_prompt(context: &str, subquestions: &[String], responses: &[String], m: usize) -> String {
    let mut out = String::from(context);
    for (s, r) in subquestions.iter().zip(responses).take(m) {
        out.push_str("\n\n");
        out.push_str(s);
        out.push('\n');
        out.push_str(r);
    }
    out.push_str("\n\n");
    out.push_str(&subquestions[m]);
    out
}

/// Whether `prompt` contains anything only the answer key knows.
pub fn prompt_leaks_answer(prompt: &str, record: &QuestionRecord) -> bool {
    let verdict = Regex::new(r"(?i)\banswer\s*(?:is|:)\s*(?:yes|no)\b").expect("valid regex");
    verdict.is_match(prompt)
        || prompt.contains(&record.estimand)
        || record.reasoning.lines().any(|l| l.len() > 12 && prompt.contains(l))
        || prompt.contains(&format!("{:.4}", record.meta.raw_value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub subquestion: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub record_id: String,
    pub model: String,
    pub exchanges: Vec<Exchange>,
    pub final_answer: Verdict,
    /// Set when the chain stopped early; the verdict is then unknown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

impl Transcript {
    /// Every prompt contains all earlier responses.
    pub fn chain_intact(&self) -> bool {
        self.exchanges
            .iter()
            .enumerate()
            .all(|(m, e)| self.exchanges[..m].iter().all(|prev| e.prompt.contains(&prev.response)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Records in flight at once.
    pub parallelism: usize,
    pub decoding: DecodingConfig,
    /// One-based chain steps to ask; the final step is always asked.
    pub steps: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            parallelism: std::thread::available_parallelism().map(usize::from).unwrap_or(1),
            decoding: DecodingConfig::default(),
            steps: (1..=SUBQUESTIONS.len()).collect(),
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), EvalError> {
        if self.parallelism == 0 {
            return Err(EvalError::Config("parallelism must be positive".into()));
        }
        if self.steps.iter().any(|&s| s == 0 || s > SUBQUESTIONS.len()) {
            return Err(EvalError::Config(format!("steps must lie in 1..={}", SUBQUESTIONS.len())));
        }
        if !self.steps.contains(&SUBQUESTIONS.len()) {
            return Err(EvalError::Config("the final step cannot be dropped".into()));
        }
        Ok(())
    }
}

fn run_one(record: &QuestionRecord, client: &dyn ModelClient, config: &RunConfig) -> Transcript {
    let start = Instant::now();
    let context = record_context(record);
    let all = causalcot_prompts(record);
    let mut steps = config.steps.clone();
    steps.sort_unstable();
    steps.dedup();
    let subquestions: Vec<String> = steps.iter().map(|&s| all[s - 1].clone()).collect();
    let mut responses = Vec::new();
    let mut exchanges = Vec::new();
    let mut usage: Option<Usage> = None;
    let mut error = None;
    for m in 0..subquestions.len() {
        let prompt = build_prompt(&context, &subquestions, &responses, m);
        match client.send(super::SYSTEM_PROMPT, &prompt, &config.decoding) {
            Ok(c) => {
                if let Some(u) = c.usage {
                    *usage.get_or_insert_with(Usage::default) += u;
                }
                responses.push(c.text.clone());
                exchanges.push(Exchange { subquestion: subquestions[m].clone(), prompt, response: c.text });
            }
            Err(e) => {
                log::warn!("record {}: {e}", record.id);
                error = Some(e.to_string());
                break;
            }
        }
    }
    let final_answer = match (&error, exchanges.last()) {
        (None, Some(last)) => parse_final_answer(&last.response),
        _ => Verdict::Unknown,
    };
    Transcript {
        record_id: record.id.clone(),
        model: client.name(),
        exchanges,
        final_answer,
        error,
        elapsed_ms: start.elapsed().as_millis() as u64,
        usage,
    }
}

/// Run the chain on every record with at most `parallelism` records in
/// flight. Transcripts come back in record order; client failures are
/// recorded in the transcript rather than aborting the batch.
pub fn run(records: &[QuestionRecord], client: &dyn ModelClient, config: &RunConfig) -> Result<Vec<Transcript>, EvalError> {
    config.validate()?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Transcript>>> = Mutex::new(vec![None; records.len()]);
    let workers = config.parallelism.min(records.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(record) = records.get(i) else { break };
                let t = run_one(record, client, config);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(t);
            });
        }
    });
    Ok(slots.into_inner().expect("workers finished").into_iter().map(|t| t.expect("every slot filled")).collect())
}
