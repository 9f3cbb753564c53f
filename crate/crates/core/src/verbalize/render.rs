//! Templates for graphs, data, questions and explanations.

use std::collections::HashMap;

use regex::Regex;

use crate::engine::{format_prob, DataTable, Solution, TermKey};
use crate::graph::{CgteSpec, NodeSet};
use crate::model::Assignment;
use crate::query::{Answer, Direction, QueryInstance, QueryType};

use super::{capitalize, join_and, Binding, Story, VerbalizeError};

/// Opening sentence of every context.
pub const PREAMBLE: &str =
    "Consider a hypothetical world governed only by the relationships below, with no other factors involved.";

fn bind<'a>(cgte: &CgteSpec, story: &'a Story, v: usize) -> Result<&'a Binding, VerbalizeError> {
    story.binding(cgte.dag.name(v))
}

fn overall_of(cgte: &CgteSpec, story: &Story, set: NodeSet) -> Result<Vec<String>, VerbalizeError> {
    set.iter().map(|v| Ok(bind(cgte, story, v)?.overall.clone())).collect()
}

/// One sentence per node with children, then one per unobserved node.
pub fn render_graph_text(cgte: &CgteSpec, story: &Story) -> Result<String, VerbalizeError> {
    let dag = &cgte.dag;
    let mut sentences = Vec::new();
    for v in 0..dag.len() {
        let children = dag.children(v);
        if children.is_empty() {
            continue;
        }
        let names = overall_of(cgte, story, children)?;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        sentences.push(format!(
            "{} has a direct effect on {}.",
            capitalize(&bind(cgte, story, v)?.overall),
            join_and(&refs)
        ));
    }
    for v in cgte.unobserved.iter() {
        sentences.push(format!("{} is unobserved.", capitalize(&bind(cgte, story, v)?.overall)));
    }
    Ok(sentences.join(" "))
}

/// Percentage string without the sign: "60" on the 0.01 grid, "60.5" otherwise.
pub fn format_percent(p: f64) -> String {
    let s = format_prob(p);
    let (int, frac) = s.split_once('.').expect("formatted probability has a decimal point");
    let whole: u32 = int.parse::<u32>().expect("integer part") * 100 + frac[..2].parse::<u32>().expect("digits");
    match &frac[2..] {
        "" => whole.to_string(),
        rest => format!("{whole}.{rest}"),
    }
}

fn literals(cgte: &CgteSpec, given: Assignment) -> Vec<(usize, u8)> {
    let mut lits: Vec<(usize, u8)> = given.iter().collect();
    lits.sort_by_key(|&(v, _)| (v != cgte.treatment, v));
    lits
}

/// The sentence for `key` without its value: everything before " is p%.".
fn term_stem(cgte: &CgteSpec, story: &Story, key: &TermKey) -> Result<String, VerbalizeError> {
    let target = bind(cgte, story, key.target)?.noun(1);
    let lits = literals(cgte, key.given);
    let Some((&(first, fv), rest)) = lits.split_first() else {
        return Ok(format!("The overall probability of {target}"));
    };
    let mut s = format!("For {}, ", bind(cgte, story, first)?.attr(fv));
    if !rest.is_empty() {
        let clauses = rest.iter().map(|&(v, x)| Ok(bind(cgte, story, v)?.sent(x).to_string())).collect::<Result<Vec<_>, VerbalizeError>>()?;
        s.push_str(&format!("when {}, ", clauses.join(" and ")));
    }
    s.push_str(&format!("the probability of {target}"));
    Ok(s)
}

/// One sentence per data term, in table order.
pub fn render_data_text(cgte: &CgteSpec, story: &Story, data: &DataTable) -> Result<String, VerbalizeError> {
    let sentences = data
        .terms()
        .iter()
        .map(|(k, p)| Ok(format!("{} is {}%.", term_stem(cgte, story, k)?, format_percent(*p))))
        .collect::<Result<Vec<_>, VerbalizeError>>()?;
    Ok(sentences.join(" "))
}

/// Every term over observed nodes that could appear in a context.
fn candidate_terms(cgte: &CgteSpec) -> Vec<TermKey> {
    let observed = cgte.observed();
    let mut out = Vec::new();
    for target in observed.iter() {
        for mask in observed.without(target).subsets() {
            for bits in 0..1u8 << mask.len() {
                let mut given = Assignment::empty();
                for (j, v) in mask.iter().enumerate() {
                    given = given.with(v, (bits >> j) & 1);
                }
                out.push(TermKey { target, given });
            }
        }
    }
    out
}

/// Recover the data table from text produced by [`render_data_text`].
/// Values come back at displayed precision.
pub fn parse_data_text(cgte: &CgteSpec, story: &Story, text: &str) -> Result<DataTable, VerbalizeError> {
    let mut stems: HashMap<String, TermKey> = HashMap::new();
    for key in candidate_terms(cgte) {
        stems.insert(term_stem(cgte, story, &key)?, key);
    }
    let sentence = Regex::new(r"(?s)\s*(.*?) is (\d+(?:\.\d)?)%\.").expect("valid regex");
    let mut table = DataTable::default();
    let mut consumed = 0;
    for (index, cap) in sentence.captures_iter(text).enumerate() {
        let whole = cap.get(0).expect("match");
        if whole.start() != consumed {
            return Err(VerbalizeError::Unparsable { index, sentence: text[consumed..whole.start()].to_string() });
        }
        consumed = whole.end();
        let key = stems
            .get(&cap[1])
            .ok_or_else(|| VerbalizeError::Unparsable { index, sentence: whole.as_str().trim().to_string() })?;
        let pct: f64 = cap[2].parse().expect("matched digits");
        table.insert(*key, (pct * 10.0).round() / 1000.0);
    }
    if !text[consumed..].trim().is_empty() {
        return Err(VerbalizeError::Unparsable {
            index: table.len(),
            sentence: text[consumed..].trim().to_string(),
        });
    }
    Ok(table)
}

/// Preamble, graph sentences and data sentences.
pub fn render_given_info(cgte: &CgteSpec, story: &Story, data: &DataTable) -> Result<String, VerbalizeError> {
    story.check_compatible(cgte)?;
    let mut parts = vec![PREAMBLE.to_string(), render_graph_text(cgte, story)?];
    if !data.is_empty() {
        parts.push(render_data_text(cgte, story, data)?);
    }
    Ok(parts.join(" "))
}

fn pick<'a>(d: Direction, inc: &'a str, dec: &'a str) -> &'a str {
    match d {
        Direction::Increase => inc,
        Direction::Decrease => dec,
    }
}

/// The yes/no question for `q`, phrased in its direction.
pub fn render_question(cgte: &CgteSpec, q: &QueryInstance, story: &Story) -> Result<String, VerbalizeError> {
    story.check_compatible(cgte)?;
    let x = bind(cgte, story, cgte.treatment)?;
    let y = bind(cgte, story, cgte.outcome)?;
    let d = q.direction;
    let mediators = || -> Result<String, VerbalizeError> {
        let names = overall_of(cgte, story, cgte.mediators)?;
        Ok(join_and(&names.iter().map(String::as_str).collect::<Vec<_>>()))
    };
    let collider = || {
        cgte.colliders()
            .iter()
            .next()
            .ok_or_else(|| VerbalizeError::Registry(format!("graph {} has no collider", cgte.name)))
    };
    let text = match q.qtype {
        QueryType::MarginalProb => format!(
            "Is the overall likelihood of {} {} than chance?",
            y.noun(1),
            pick(d, "greater", "less")
        ),
        QueryType::CondProb => format!(
            "Is the chance of {} {} when observing {}?",
            y.noun(1),
            pick(d, "larger", "smaller"),
            x.noun(1)
        ),
        QueryType::Ate => format!(
            "Will {} {} the chance of {}?",
            x.noun(1),
            pick(d, "increase", "decrease"),
            y.noun(1)
        ),
        QueryType::AdjustmentSet => {
            let names: Vec<String> = q
                .candidate_set
                .iter()
                .flatten()
                .map(|n| Ok(story.binding(n)?.overall.clone()))
                .collect::<Result<_, VerbalizeError>>()?;
            format!(
                "To understand how {xo} affects {yo}, should we look directly at how {xo} correlates with {yo} in general, \
                 or this correlation case by case according to {s}? Is it more correct to look at the correlation {how}?",
                xo = x.overall,
                yo = y.overall,
                s = names.join(" and "),
                how = pick(d, "case by case", "directly in general"),
            )
        }
        QueryType::ColliderBias => {
            let c = bind(cgte, story, collider()?)?;
            format!(
                "For {}, is the association between {} and {} more {} than the causal effect of {} on {}?",
                c.attr(q.collider_value.unwrap_or(1)),
                x.noun(1),
                y.noun(1),
                pick(d, "positive", "negative"),
                x.overall,
                y.overall
            )
        }
        QueryType::ExplainingAway => {
            let c = bind(cgte, story, collider()?)?;
            format!(
                "For {}, does the chance of {} {} when observing {}?",
                c.attr(1),
                y.noun(1),
                pick(d, "increase", "decrease"),
                x.noun(1)
            )
        }
        QueryType::CounterfactualProb => {
            let xv = q.evidence_value.unwrap_or(0);
            format!(
                "For {}, would it be more likely than not to see {} {}?",
                x.attr(xv),
                y.noun(pick_value(d)),
                x.cond(1 - xv)
            )
        }
        QueryType::Att => format!(
            "For {}, would it be {} likely to see {} {}?",
            x.attr(1),
            pick(d, "less", "more"),
            y.noun(1),
            x.cond(0)
        ),
        QueryType::Nde => {
            let way = pick(d, "positively", "negatively");
            if cgte.mediators.is_empty() {
                format!("Setting aside any mediated pathways, would {} {way} affect {}?", x.noun(1), y.noun(1))
            } else {
                format!(
                    "If we disregard the mediation effect through {}, would {} still {way} affect {}?",
                    mediators()?,
                    x.noun(1),
                    y.noun(1)
                )
            }
        }
        QueryType::Nie => format!(
            "Does {} {} affect {} through {}?",
            x.overall,
            pick(d, "positively", "negatively"),
            y.overall,
            mediators()?
        ),
    };
    Ok(text)
}

fn pick_value(d: Direction) -> u8 {
    match d {
        Direction::Increase => 1,
        Direction::Decrease => 0,
    }
}

/// What the five-step explanation is written from.
#[derive(Debug, Clone, Copy)]
pub struct ExplanationInput<'a> {
    pub cgte: &'a CgteSpec,
    pub story: &'a Story,
    pub query: &'a QueryInstance,
    pub solution: &'a Solution,
}

/// Edge list such as `Z->X, Z->Y, X->Y`.
pub fn edge_list(cgte: &CgteSpec) -> String {
    let dag = &cgte.dag;
    dag.edges().iter().map(|&(a, b)| format!("{}->{}", dag.name(a), dag.name(b))).collect::<Vec<_>>().join(", ")
}

/// The five-step worked solution.
pub fn render_explanation(input: ExplanationInput<'_>) -> Result<String, VerbalizeError> {
    let ExplanationInput { cgte, story, query, solution } = input;
    let dag = &cgte.dag;
    let meanings = (0..dag.len())
        .map(|v| Ok(format!("{} represents {}", dag.name(v), bind(cgte, story, v)?.overall)))
        .collect::<Result<Vec<_>, VerbalizeError>>()?;
    let meanings: Vec<&str> = meanings.iter().map(String::as_str).collect();
    let mut step1 = format!(
        "Step 1: Extract the causal graph: The causal graph expressed in the context is: \"{}\", where {}.",
        edge_list(cgte),
        join_and(&meanings)
    );
    for v in cgte.unobserved.iter() {
        step1.push_str(&format!(" {} is unobserved.", dag.name(v)));
    }
    let qtype = query.qtype;
    let step2 = format!(
        "Step 2: Identify the query type and its symbolic expression: The query type of the above question is \"{}\", and formally as: \"{}\".",
        qtype.label(),
        qtype.symbolic_form()
    );
    let est = solution.estimand.render(cgte);
    let mut step3 = format!(
        "Step 3: Derive the estimand: Based on the graph structure and causal query, the question can be simplified into estimand \"{est}\"."
    );
    for note in &solution.estimand.notes {
        step3.push(' ');
        step3.push_str(note);
    }
    let data = if solution.data.is_empty() { "none".to_string() } else { solution.data.render(cgte) };
    let step4 = format!("Step 4: Collect all the available data: The available data are: \"{data}\".");
    let substitution = solution
        .estimand
        .substitute(cgte, &solution.data)
        .map_err(|e| VerbalizeError::Registry(format!("substitution failed: {e}")))?;
    let answer: Answer = solution.answer;
    let step5 = format!(
        "Step 5: Solve for the estimand: Plug in the available data \"{data}\" into \"{est}\".\n= {substitution}\n\u{2248} {raw:.4}\n\
         Since the estimate for the estimand is {raw:.4}, the overall answer to the question is {ans}.",
        raw = solution.raw_value,
        ans = answer.title()
    );
    Ok([step1, step2, step3, step4, step5].join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::solve;
    use crate::graph::{catalog, GraphName};
    use crate::model::{CbnParams, ParamsJson};
    use crate::verbalize::{stories_for, story_by_id};

    const CONF: &str = r#"{
        "Z": {"parents": [], "table": {"": 0.5}},
        "X": {"parents": ["Z"], "table": {"0": 0.3, "1": 0.7}},
        "Y": {"parents": ["X", "Z"], "table": {"00": 0.4, "10": 0.8, "01": 0.2, "11": 0.6}}
    }"#;

    fn conf_params() -> (CgteSpec, CbnParams) {
        let spec = catalog(GraphName::Confounding);
        let json: ParamsJson = serde_json::from_str(CONF).unwrap();
        let p = CbnParams::from_json(&spec.dag, &json).unwrap();
        (spec, p)
    }

    #[test]
    fn percent_formatting() {
        assert_eq!(format_percent(0.6), "60");
        assert_eq!(format_percent(0.07), "7");
        assert_eq!(format_percent(0.605), "60.5");
        assert_eq!(format_percent(0.6666), "66.7");
        assert_eq!(format_percent(0.9996), "100.0");
        assert_eq!(format_percent(0.0004), "0.0");
    }

    #[test]
    fn kidney_stone_sentences() {
        let spec = catalog(GraphName::Confounding);
        let story = story_by_id("kidney_stone_treatment_recovery").unwrap();
        let (z, y) = (spec.dag.index("Z").unwrap(), spec.outcome);
        let data = DataTable::from_terms([
            (TermKey { target: y, given: Assignment::empty() }, 0.60),
            (TermKey { target: y, given: Assignment::of(z, 0) }, 0.70),
        ]);
        assert_eq!(
            render_data_text(&spec, story, &data).unwrap(),
            "The overall probability of recovery is 60%. \
             For patients who have small kidney stones, the probability of recovery is 70%."
        );
    }

    #[test]
    fn multi_literal_sentence() {
        let spec = catalog(GraphName::Confounding);
        let story = story_by_id("kidney_stone_treatment_recovery").unwrap();
        let (z, x) = (spec.dag.index("Z").unwrap(), spec.treatment);
        let key = TermKey { target: spec.outcome, given: Assignment::of(z, 1).with(x, 0) };
        let text = render_data_text(&spec, story, &DataTable::from_terms([(key, 0.125)])).unwrap();
        assert_eq!(
            text,
            "For patients not receiving treatment, when the patient has large kidney stones, \
             the probability of recovery is 12.5%."
        );
    }

    #[test]
    fn data_text_round_trips() {
        let (spec, p) = conf_params();
        let story = story_by_id("gender_drug_recovery").unwrap();
        let q = QueryInstance::simple(GraphName::Confounding, QueryType::Ate, Direction::Increase);
        let s = solve(&spec, &p, &q).unwrap();
        let text = render_data_text(&spec, story, &s.data).unwrap();
        assert_eq!(parse_data_text(&spec, story, &text).unwrap(), s.data.map_values(crate::engine::estimand::displayed_prob));
    }

    #[test]
    fn parse_rejects_foreign_sentences() {
        let spec = catalog(GraphName::Confounding);
        let story = story_by_id("gender_drug_recovery").unwrap();
        let err = parse_data_text(&spec, story, "The overall probability of rain is 50%.").unwrap_err();
        assert!(matches!(err, VerbalizeError::Unparsable { index: 0, .. }));
        assert!(parse_data_text(&spec, story, "").unwrap().is_empty());
        assert!(parse_data_text(&spec, story, "The overall probability of recovery is 50%. trailing").is_err());
    }

    #[test]
    fn frontdoor_mentions_unobserved() {
        let spec = catalog(GraphName::Frontdoor);
        let story = story_by_id("genotype_smoking_tar_cancer").unwrap();
        let text = render_graph_text(&spec, story).unwrap();
        assert!(text.ends_with("Genotype is unobserved."), "{text}");
    }

    #[test]
    fn missing_binding_names_node() {
        let spec = catalog(GraphName::Chain);
        let mut story = stories_for(GraphName::Chain)[0].clone();
        story.bindings.remove("M");
        match render_graph_text(&spec, &story) {
            Err(VerbalizeError::MissingBinding { node, .. }) => assert_eq!(node, "M"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn question_templates() {
        let spec = catalog(GraphName::Confounding);
        let story = story_by_id("gender_drug_recovery").unwrap();
        let q = |t, d| render_question(&spec, &QueryInstance::simple(GraphName::Confounding, t, d), story).unwrap();
        assert_eq!(
            q(QueryType::CondProb, Direction::Increase),
            "Is the chance of recovery larger when observing taking the drug?"
        );
        assert_eq!(
            q(QueryType::Att, Direction::Decrease),
            "For patients who take the drug, would it be more likely to see recovery if the patient had not taken the drug?"
        );
        assert_eq!(
            q(QueryType::MarginalProb, Direction::Decrease),
            "Is the overall likelihood of recovery less than chance?"
        );
        let mut adj = QueryInstance::simple(GraphName::Confounding, QueryType::AdjustmentSet, Direction::Increase);
        adj.candidate_set = Some(vec!["Z".into()]);
        let text = render_question(&spec, &adj, story).unwrap();
        assert!(text.contains(
            "should we look directly at how drug correlates with recovery status in general, \
             or this correlation case by case according to gender?"
        ));
    }

    #[test]
    fn confounding_explanation() {
        let (spec, p) = conf_params();
        let story = story_by_id("gender_drug_recovery").unwrap();
        let q = QueryInstance::simple(GraphName::Confounding, QueryType::Ate, Direction::Increase);
        let s = solve(&spec, &p, &q).unwrap();
        let text = render_explanation(ExplanationInput { cgte: &spec, story, query: &q, solution: &s }).unwrap();
        assert_eq!(text.matches("Step").count(), 5);
        assert!(text.contains("\"Z->X, Z->Y, X->Y\""));
        assert!(text.ends_with(
            "\u{2248} 0.4000\nSince the estimate for the estimand is 0.4000, the overall answer to the question is Yes."
        ));
    }

    #[test]
    fn chain_nde_explanation_states_zero() {
        let spec = catalog(GraphName::Chain);
        let q = QueryInstance::simple(GraphName::Chain, QueryType::Nde, Direction::Increase);
        let s = crate::engine::Solution {
            estimand: crate::engine::derive_estimand(&spec, &q).unwrap(),
            data: DataTable::default(),
            raw_value: 0.0,
            value: 0.0,
            oracle_value: 0.0,
            answer: Answer::No,
        };
        let story = stories_for(GraphName::Chain)[0];
        let text = render_explanation(ExplanationInput { cgte: &spec, story, query: &q, solution: &s }).unwrap();
        assert!(text.contains("natural direct effect is 0"), "{text}");
        assert_eq!(text.matches("Step").count(), 5);
    }
}
