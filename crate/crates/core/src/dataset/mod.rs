//! Benchmark generation, verification, statistics and JSONL storage.

pub mod generate;
pub mod io;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineError;
use crate::graph::GraphName;
use crate::model::{ModelError, ParamsJson};
use crate::query::{Answer, QueryInstance, QueryType, TIE_EPSILON};
use crate::verbalize::{AlignmentLevel, Story, VerbalizeError};

pub use generate::{allocate, assemble_record, cells, generate, verify_record, Cell};
pub use io::{read_jsonl, write_jsonl, write_jsonl_to};
pub use stats::{compute_stats, DatasetStats};

/// Share of records per rung at full scale: 3288 / 3288 / 3984 of 10560.
pub const DEFAULT_RUNG_WEIGHTS: [f64; 3] = [3288.0, 3288.0, 3984.0];

/// Records per cell the full-size benchmark aims for.
pub const QUOTA_RANGE: (usize, usize) = (50, 100);

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("cell {cell}: no acceptable instance after {budget} draws (last rejection: {last})")]
    BudgetExhausted { cell: String, budget: usize, last: String },
    #[error("cell {cell}: {source}")]
    Engine { cell: String, source: EngineError },
    #[error(transparent)]
    Verbalize(#[from] VerbalizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record {id}: field `{field}` does not match its re-derivation")]
    Mismatch { id: String, field: &'static str },
}

/// Knobs for [`generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Total number of records.
    pub size: usize,
    pub seed: u64,
    /// Fractions of commonsensical, anti-commonsensical and nonsensical records.
    pub alignment_mix: [f64; 3],
    /// Relative number of records on rungs 1, 2 and 3.
    pub rung_weights: [f64; 3],
    /// Minimum distance of a question's value from its threshold.
    pub tie_epsilon: f64,
    /// Parameter draws allowed per record before giving up.
    pub rejection_budget: usize,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            size: 1056,
            seed: 0,
            alignment_mix: [1.0 / 3.0; 3],
            rung_weights: DEFAULT_RUNG_WEIGHTS,
            tie_epsilon: TIE_EPSILON,
            rejection_budget: 1000,
            threads: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Config(m));
        let mix_sum: f64 = self.alignment_mix.iter().sum();
        if self.alignment_mix.iter().any(|f| !(0.0..=1.0).contains(f)) || (mix_sum - 1.0).abs() > 1e-9 {
            return bad(format!("alignment fractions must lie in [0, 1] and sum to 1, got {:?}", self.alignment_mix));
        }
        if self.rung_weights.iter().any(|w| !w.is_finite() || *w < 0.0) || self.rung_weights.iter().sum::<f64>() <= 0.0 {
            return bad(format!("rung weights must be nonnegative with a positive sum, got {:?}", self.rung_weights));
        }
        if self.tie_epsilon.is_nan() || self.tie_epsilon < TIE_EPSILON {
            return bad(format!("tie epsilon must be at least {TIE_EPSILON}, got {}", self.tie_epsilon));
        }
        if self.rejection_budget == 0 {
            return bad("rejection budget must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive".into());
        }
        Ok(())
    }
}

/// One data term as stored in record metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTermJson {
    pub term: String,
    pub value: f64,
}

/// Provenance sufficient to re-derive a record from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub seed: u64,
    /// Cell id `graph/query/story`.
    pub cell: String,
    pub index: usize,
    pub engine_version: String,
    /// Identification choices, e.g. `backdoor:{Z}` or `iv_wald_ratio`.
    pub flags: Vec<String>,
    pub query: QueryInstance,
    pub params: ParamsJson,
    /// Estimand value before orienting by question direction.
    pub raw_value: f64,
    pub oracle_value: f64,
    pub data: Vec<DataTermJson>,
    pub story: Story,
}

/// A fully rendered benchmark question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub graph: GraphName,
    pub story_id: String,
    pub alignment: AlignmentLevel,
    pub query_type: QueryType,
    pub rung: u8,
    pub given_info: String,
    pub question: String,
    pub answer: Answer,
    pub value: f64,
    pub estimand: String,
    pub reasoning: String,
    pub meta: RecordMeta,
}
