//! Cell allocation and per-record sampling.
//!
//! A cell is a (graph, query type, base story) combination. Every cell has
//! its own random stream derived from the master seed and the cell id, so
//! cells can run in any order or in parallel and still give the same output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::engine::{adjustment_candidates, check_display_stable, solve, EngineError, Solution, ENGINE_VERSION};
use crate::graph::{catalog, CgteSpec, GraphName};
use crate::model::{sample_params, CbnParams};
use crate::query::{admissible_pairs, Answer, Direction, QueryInstance, QueryType};
use crate::verbalize::{
    render_explanation, render_given_info, render_question, stories_for, transform_alignment, AlignmentLevel,
    ExplanationInput, Story,
};

use super::{DataTermJson, DatasetError, GenConfig, QuestionRecord, RecordMeta, QUOTA_RANGE};

#[derive(Debug, Clone)]
pub struct Cell {
    pub id: String,
    pub graph: GraphName,
    pub qtype: QueryType,
    pub story: &'static Story,
}

/// Every admissible cell, sorted by id.
pub fn cells() -> Vec<Cell> {
    let mut out = Vec::new();
    for (graph, qtype) in admissible_pairs() {
        for story in stories_for(graph) {
            out.push(Cell { id: format!("{graph}/{}/{}", qtype.as_str(), story.id), graph, qtype, story });
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Split `n` in proportion to `weights`, largest remainders first.
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

fn seeded(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Records per cell: rung totals follow the rung weights, and each rung's
/// total is spread evenly over its cells. Leftover records go to cells
/// picked by the master seed.
pub fn allocate(config: &GenConfig) -> Vec<(Cell, usize)> {
    let all = cells();
    let rung_totals = apportion(config.size, &config.rung_weights);
    let mut counts = vec![0usize; all.len()];
    let mut rng = seeded(config.seed, "allocation");
    for (r, &total) in rung_totals.iter().enumerate() {
        let mut members: Vec<usize> = (0..all.len()).filter(|&i| all[i].qtype.rung() as usize == r + 1).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let (base, extra) = (total / members.len(), total % members.len());
        for (j, &i) in members.iter().enumerate() {
            counts[i] = base + usize::from(j < extra);
        }
    }
    all.into_iter().zip(counts).collect()
}

/// A query of `qtype` with its type-specific fields drawn at random.
fn sample_query(cgte: &CgteSpec, qtype: QueryType, rng: &mut ChaCha8Rng) -> QueryInstance {
    let mut q = QueryInstance::simple(cgte.name, qtype, Direction::Increase);
    match qtype {
        QueryType::CounterfactualProb => q.evidence_value = Some(rng.random_range(0..2)),
        QueryType::AdjustmentSet => {
            let cands = adjustment_candidates(cgte);
            let s = cands[rng.random_range(0..cands.len())];
            q.candidate_set = Some(cgte.dag.names(s).into_iter().map(String::from).collect());
        }
        QueryType::ColliderBias => q.collider_value = Some(rng.random_range(0..2)),
        QueryType::ExplainingAway => q.collider_value = Some(1),
        _ => {}
    }
    q
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::Increase => Direction::Decrease,
        Direction::Decrease => Direction::Increase,
    }
}

/// Draw parameters and a direction until the answer is `target` and the
/// instance passes every rejection rule.
fn sample_instance(
    cell: &Cell,
    cgte: &CgteSpec,
    target: Answer,
    config: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(QueryInstance, CbnParams, Solution), DatasetError> {
    let mut last = String::from("none");
    for _ in 0..config.rejection_budget {
        let params = sample_params(rng, &cgte.dag);
        let mut q = sample_query(cgte, cell.qtype, rng);
        let attempt = solve(cgte, &params, &q).and_then(|s| {
            if s.answer == target {
                return Ok(s);
            }
            q.direction = flip(q.direction);
            solve(cgte, &params, &q)
        });
        let solution = match attempt {
            Ok(s) => s,
            Err(e @ EngineError::OracleMismatch { .. }) => return Err(DatasetError::Engine { cell: cell.id.clone(), source: e }),
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        if (solution.value - cell.qtype.threshold()).abs() < config.tie_epsilon {
            last = format!("value {} within the tie guard", solution.value);
            continue;
        }
        if let Err(e) = check_display_stable(&q, &solution) {
            last = e.to_string();
            continue;
        }
        return Ok((q, params, solution));
    }
    Err(DatasetError::BudgetExhausted { cell: cell.id.clone(), budget: config.rejection_budget, last })
}

/// Render a solved instance into a record.
#[allow(clippy::too_many_arguments)]
pub fn assemble_record(
    cgte: &CgteSpec,
    story: Story,
    query: QueryInstance,
    params: &CbnParams,
    solution: &Solution,
    seed: u64,
    cell: &str,
    index: usize,
) -> Result<QuestionRecord, DatasetError> {
    let given_info = render_given_info(cgte, &story, &solution.data)?;
    let question = render_question(cgte, &query, &story)?;
    let reasoning = render_explanation(ExplanationInput { cgte, story: &story, query: &query, solution })?;
    let data = solution
        .data
        .terms()
        .iter()
        .map(|(k, v)| DataTermJson { term: k.render(cgte), value: *v })
        .collect();
    Ok(QuestionRecord {
        id: format!("{cell}/{index:04}"),
        graph: cgte.name,
        story_id: story.id.clone(),
        alignment: story.alignment,
        query_type: query.qtype,
        rung: query.qtype.rung(),
        given_info,
        question,
        answer: solution.answer,
        value: solution.value,
        estimand: solution.estimand.render(cgte),
        reasoning,
        meta: RecordMeta {
            seed,
            cell: cell.to_string(),
            index,
            engine_version: ENGINE_VERSION.to_string(),
            flags: solution.estimand.flags.clone(),
            query,
            params: params.to_json(&cgte.dag),
            raw_value: solution.raw_value,
            oracle_value: solution.oracle_value,
            data,
            story,
        },
    })
}

fn generate_cell(cell: &Cell, count: usize, config: &GenConfig) -> Result<Vec<QuestionRecord>, DatasetError> {
    let cgte = catalog(cell.graph);
    let mut rng = seeded(config.seed, &cell.id);
    let yes_first = rng.random_bool(0.5);
    let mut levels: Vec<AlignmentLevel> = AlignmentLevel::ALL
        .iter()
        .zip(apportion(count, &config.alignment_mix))
        .flat_map(|(&l, n)| std::iter::repeat_n(l, n))
        .collect();
    levels.shuffle(&mut rng);
    let mut out = Vec::with_capacity(count);
    for (index, level) in levels.into_iter().enumerate() {
        let target = if (index % 2 == 0) == yes_first { Answer::Yes } else { Answer::No };
        let story = transform_alignment(cell.story, level, &mut rng)?;
        let (query, params, solution) = sample_instance(cell, &cgte, target, config, &mut rng)?;
        out.push(assemble_record(&cgte, story, query, &params, &solution, config.seed, &cell.id, index)?);
    }
    Ok(out)
}

/// Generate the benchmark. Output order is by cell id, then index within
/// the cell, whatever the thread count.
pub fn generate(config: &GenConfig) -> Result<Vec<QuestionRecord>, DatasetError> {
    config.validate()?;
    let plan: Vec<(Cell, usize)> = allocate(config).into_iter().filter(|(_, n)| *n > 0).collect();
    if !plan.is_empty() {
        let mean = config.size as f64 / cells().len() as f64;
        if mean < QUOTA_RANGE.0 as f64 || mean > QUOTA_RANGE.1 as f64 {
            log::warn!(
                "{:.1} records per cell on average, outside the usual {}-{} range",
                mean,
                QUOTA_RANGE.0,
                QUOTA_RANGE.1
            );
        }
    }
    let run = || -> Result<Vec<QuestionRecord>, DatasetError> {
        let parts: Vec<Vec<QuestionRecord>> =
            plan.par_iter().map(|(cell, n)| generate_cell(cell, *n, config)).collect::<Result<_, _>>()?;
        Ok(parts.into_iter().flatten().collect())
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| DatasetError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Re-derive `record` from its metadata and compare every field.
pub fn verify_record(record: &QuestionRecord) -> Result<(), DatasetError> {
    let mismatch = |field| DatasetError::Mismatch { id: record.id.clone(), field };
    let meta = &record.meta;
    if meta.query.graph != record.graph {
        return Err(mismatch("graph"));
    }
    if meta.query.qtype != record.query_type {
        return Err(mismatch("query_type"));
    }
    let cgte = catalog(record.graph);
    let params = CbnParams::from_json(&cgte.dag, &meta.params)?;
    let solution =
        solve(&cgte, &params, &meta.query).map_err(|source| DatasetError::Engine { cell: record.id.clone(), source })?;
    let fresh =
        assemble_record(&cgte, meta.story.clone(), meta.query.clone(), &params, &solution, meta.seed, &meta.cell, meta.index)?;
    let checks: [(&'static str, bool); 12] = [
        ("id", fresh.id == record.id),
        ("story_id", fresh.story_id == record.story_id),
        ("alignment", fresh.alignment == record.alignment),
        ("rung", fresh.rung == record.rung),
        ("given_info", fresh.given_info == record.given_info),
        ("question", fresh.question == record.question),
        ("answer", fresh.answer == record.answer),
        ("value", fresh.value.to_bits() == record.value.to_bits()),
        ("estimand", fresh.estimand == record.estimand),
        ("reasoning", fresh.reasoning == record.reasoning),
        ("meta", fresh.meta == record.meta),
        ("cell", meta.cell.starts_with(&format!("{}/{}/", record.graph, record.query_type.as_str()))),
    ];
    match checks.into_iter().find(|(_, ok)| !ok) {
        Some((field, _)) => Err(mismatch(field)),
        None => Ok(()),
    }
}
