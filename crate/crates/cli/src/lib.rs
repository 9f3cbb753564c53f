//! The `ladder` command: generate, answer, verify, stats, prompts and eval.
//!
//! Exit codes: 0 on success, 1 on usage or runtime errors, 2 when `verify`
//! finds a record that does not match its re-derivation.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ladder_core::dataset::{self, GenConfig, QuestionRecord};
use ladder_core::engine::{self, ENGINE_VERSION};
use ladder_core::evalharness::{
    self, build_prompt, causalcot_prompts, record_context, HttpClient, HttpConfig, MockClient, ModelClient, RunConfig,
    SYSTEM_PROMPT,
};
use ladder_core::model::ParamsJson;
use ladder_core::{catalog, Answer, CbnParams, Direction, GraphName, QueryInstance, QueryType};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ladder", version, about = "Causal question generation, answering and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark as JSONL.
    Generate(GenerateArgs),
    /// Solve one query on a catalog graph with given parameters.
    Answer(AnswerArgs),
    /// Re-derive every record of a file; exit 2 on any mismatch.
    Verify(InArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
    /// Write the prompt chains for a file without contacting any model.
    Prompts(PromptsArgs),
    /// Run the prompt chain against a model endpoint and grade it.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Number of records [default: 1056, or the config file's value].
    #[arg(long)]
    size: Option<usize>,
    /// JSON generation config; flags take precedence over its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Commonsensical, anti-commonsensical and nonsensical fractions.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    alignment_mix: Option<Vec<f64>>,
    /// Worker threads [default: logical cores].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Increase,
    Decrease,
}

#[derive(Debug, Args)]
struct AnswerArgs {
    #[arg(long)]
    graph: String,
    #[arg(long)]
    query: String,
    /// Parameter file: {"node": {"parents": [...], "table": {"bits": p}}}.
    #[arg(long)]
    params: PathBuf,
    #[arg(long, value_enum, default_value = "increase")]
    direction: DirectionArg,
    /// Factual treatment value for counterfactual queries.
    #[arg(long)]
    evidence: Option<u8>,
    /// Candidate adjustment set, e.g. `Z` or `A,B`.
    #[arg(long, value_delimiter = ',')]
    candidate: Option<Vec<String>>,
    /// Collider value for collider-bias queries.
    #[arg(long)]
    collider: Option<u8>,
}

#[derive(Debug, Args)]
struct InArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PromptsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MockKind {
    /// Always answers yes.
    Yes,
    /// Always answers no.
    No,
    /// Answers every question correctly.
    Oracle,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Chat-completions URL [env: LADDER_ENDPOINT].
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name [env: LADDER_MODEL].
    #[arg(long)]
    model: Option<String>,
    /// Records evaluated concurrently [default: logical cores].
    #[arg(long)]
    parallelism: Option<usize>,
    /// Chain steps to ask (1-5); step 5 is required.
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    /// Write transcripts as JSONL.
    #[arg(long)]
    transcripts: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Use an offline scripted client instead of the endpoint.
    #[arg(long, value_enum)]
    mock: Option<MockKind>,
}

/// Parse `argv` (program name first) and run the subcommand.
pub fn run(argv: Vec<String>) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Answer(a) => answer(a),
        Command::Verify(a) => verify(a),
        Command::Stats(a) => stats(a),
        Command::Prompts(a) => prompts(a),
        Command::Eval(a) => eval(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn read_records(path: &Path) -> Result<Vec<QuestionRecord>> {
    dataset::read_jsonl(path).with_context(|| format!("reading {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<i32> {
    let mut config = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<GenConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => GenConfig::default(),
    };
    config.seed = a.seed;
    if let Some(n) = a.size {
        config.size = n;
    }
    if let Some(mix) = a.alignment_mix {
        config.alignment_mix = [mix[0], mix[1], mix[2]];
    }
    if a.threads.is_some() {
        config.threads = a.threads;
    }
    let records = dataset::generate(&config)?;
    dataset::write_jsonl(&records, &a.out)?;
    log::info!("wrote {} records to {}", records.len(), a.out.display());
    Ok(EXIT_OK)
}

fn answer(a: AnswerArgs) -> Result<i32> {
    let graph: GraphName = a.graph.parse()?;
    let qtype: QueryType = a.query.parse()?;
    let cgte = catalog(graph);
    let text = std::fs::read_to_string(&a.params).with_context(|| format!("reading {}", a.params.display()))?;
    let json: ParamsJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.params.display()))?;
    let params = CbnParams::from_json(&cgte.dag, &json)?;
    let direction = match a.direction {
        DirectionArg::Increase => Direction::Increase,
        DirectionArg::Decrease => Direction::Decrease,
    };
    let mut q = QueryInstance::simple(graph, qtype, direction);
    q.evidence_value = a.evidence.or((qtype == QueryType::CounterfactualProb).then_some(0));
    q.candidate_set = a.candidate.or_else(|| {
        (qtype == QueryType::AdjustmentSet).then(|| {
            let s = engine::adjustment_candidates(&cgte).first().copied().unwrap_or_default();
            cgte.dag.names(s).into_iter().map(String::from).collect()
        })
    });
    q.collider_value = a.collider.or(match qtype {
        QueryType::ColliderBias | QueryType::ExplainingAway => Some(1),
        _ => None,
    });
    let s = engine::solve(&cgte, &params, &q)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "graph     {graph}")?;
    writeln!(out, "query     {} ({})", qtype.as_str(), qtype.label())?;
    writeln!(out, "estimand  {}", s.estimand.render(&cgte))?;
    for note in &s.estimand.notes {
        writeln!(out, "          {note}")?;
    }
    for (i, (k, v)) in s.data.terms().iter().enumerate() {
        writeln!(out, "{:<9} {}={}", if i == 0 { "data" } else { "" }, k.render(&cgte), engine::format_prob(*v))?;
    }
    writeln!(out, "value     {:.4}", s.value)?;
    writeln!(out, "answer    {}", s.answer.title())?;
    Ok(EXIT_OK)
}

fn verify(a: InArgs) -> Result<i32> {
    let records = read_records(&a.input)?;
    let mut failures = 0;
    let mut out = std::io::stdout().lock();
    for r in &records {
        if let Err(e) = dataset::verify_record(r) {
            failures += 1;
            writeln!(out, "MISMATCH {}: {e}", r.id)?;
        }
    }
    writeln!(out, "verified {} records with {ENGINE_VERSION}: {failures} mismatches", records.len())?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VERIFY })
}

fn stats(a: StatsArgs) -> Result<i32> {
    let s = dataset::compute_stats(&read_records(&a.input)?);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s)?);
    } else {
        println!("{s}");
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PromptChain<'a> {
    id: &'a str,
    system: &'a str,
    subquestions: Vec<String>,
    /// The first prompt; later prompts append earlier responses.
    first_prompt: String,
}

fn prompts(a: PromptsArgs) -> Result<i32> {
    let records = read_records(&a.input)?;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    for r in &records {
        let subquestions = causalcot_prompts(r);
        let first_prompt = build_prompt(&record_context(r), &subquestions, &[], 0);
        serde_json::to_writer(&mut w, &PromptChain { id: &r.id, system: SYSTEM_PROMPT, subquestions, first_prompt })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn mock_client(kind: MockKind, records: &[QuestionRecord]) -> MockClient {
    match kind {
        MockKind::Yes => MockClient::new("mock-yes", |_, _| "the answer is yes".into()),
        MockKind::No => MockClient::new("mock-no", |_, _| "the answer is no".into()),
        MockKind::Oracle => {
            let answers: HashMap<String, Answer> = records.iter().map(|r| (record_context(r), r.answer)).collect();
            MockClient::new("mock-oracle", move |prompt, _| {
                let context = prompt.split("\n\n").next().unwrap_or_default();
                answers.get(context).map_or_else(|| "unsure".into(), |a| format!("the answer is {a}"))
            })
        }
    }
}

fn eval(a: EvalArgs) -> Result<i32> {
    let mut config = RunConfig::default();
    if let Some(p) = a.parallelism {
        config.parallelism = p;
    }
    if let Some(steps) = a.steps {
        config.steps = steps;
    }
    let client: Box<dyn ModelClient> = match a.mock {
        Some(kind) => Box::new(mock_client(kind, &read_records(&a.input)?)),
        None => {
            let mut http = HttpConfig::from_env(a.endpoint)?;
            if let Some(m) = a.model {
                http.model = m;
            }
            Box::new(HttpClient::new(http)?)
        }
    };
    let records = read_records(&a.input)?;
    let transcripts = evalharness::run(&records, client.as_ref(), &config)?;
    if let Some(p) = &a.transcripts {
        dataset::write_jsonl(&transcripts, p)?;
    }
    let errored = transcripts.iter().filter(|t| t.error.is_some()).count();
    if errored > 0 {
        log::warn!("{errored} chains stopped early after client failures");
    }
    let report = evalharness::grade(&transcripts, &records)?;
    if let Some(p) = &a.report {
        std::fs::write(p, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", report.to_text());
    println!("{}", report.summary_line());
    if records.is_empty() {
        bail!("no records in {}", a.input.display());
    }
    Ok(EXIT_OK)
}
