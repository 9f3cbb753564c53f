//! Anti-commonsensical and nonsensical variants of a story.
//!
//! Only surface forms change. The graph a story is written for stays the
//! same, so everything computed from the graph and parameters is untouched.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::graph::catalog;

use super::{AlignmentLevel, Binding, Story, VerbalizeError};

/// Invented words used as variable names in nonsensical stories.
pub const NONSENSE_WORDS: [&str; 100] = [
    "ziblo", "truq", "fyze", "glimx", "jorv", "wexi", "snov", "yupt", "kraz", "qixy", "vubr", "chiz", "pliv", "moxa",
    "fygo", "rukz", "tasp", "xevo", "jyke", "wibl", "zorf", "quzy", "nyrp", "gwex", "smez", "vytz", "hupx", "cwoj",
    "lirf", "ovka", "pexu", "yigz", "twaz", "kwox", "zuph", "fraq", "jyxo", "swoy", "uvzi", "nekl", "gyzp", "rixq",
    "vwem", "xyfu", "blyz", "qwip", "zeku", "tijv", "yomx", "hwaz", "czix", "plof", "muvy", "fyqo", "rujz", "tasb",
    "xevi", "jyka", "wibm", "zorx", "quzw", "nyro", "gwet", "smeu", "vyta", "hupz", "cwoi", "lirg", "ovki", "pexy",
    "yigw", "twac", "kwoz", "zupj", "fraq", "jyxi", "swoq", "uvzo", "nekm", "gyzl", "rixw", "vwen", "xyfo", "blyx",
    "qwiu", "zeky", "tijw", "yomz", "hwax", "czir", "ploz", "muvq", "fyqi", "rujx", "tasn", "xevu", "jyko", "wibp",
    "zory", "quzt",
];

fn person(overall: &str, noun: [&str; 2], pred: [&str; 2], cond: [&str; 2]) -> Binding {
    Binding {
        overall: overall.to_string(),
        noun: noun.map(str::to_string),
        sent: pred.map(|p| format!("the person {p}")),
        attr: pred.map(|p| format!("people who {p}")),
        cond: cond.map(|c| format!("if the person {c}")),
    }
}

/// Attributes that are an effect in none of the stories.
pub fn unusual_outcomes() -> Vec<Binding> {
    vec![
        person(
            "lip thickness",
            ["thin lips", "thick lips"],
            ["have thin lips", "have thick lips"],
            ["had had thin lips", "had had thick lips"],
        ),
        Binding {
            overall: "earthquakes".into(),
            noun: ["no earthquake".into(), "an earthquake".into()],
            sent: ["there is no earthquake".into(), "there is an earthquake".into()],
            attr: ["days without an earthquake".into(), "days with an earthquake".into()],
            cond: ["if there had been no earthquake".into(), "if there had been an earthquake".into()],
        },
        person(
            "lactose intolerance",
            ["lactose tolerance", "lactose intolerance"],
            ["are lactose tolerant", "are lactose intolerant"],
            ["had been lactose tolerant", "had been lactose intolerant"],
        ),
        Binding {
            overall: "rainfall".into(),
            noun: ["no rainfall".into(), "rainfall".into()],
            sent: ["it does not rain".into(), "it rains".into()],
            attr: ["days without rainfall".into(), "days with rainfall".into()],
            cond: ["if it had not rained".into(), "if it had rained".into()],
        },
        person(
            "peanut allergy",
            ["not being allergic to peanuts", "being allergic to peanuts"],
            ["are not allergic to peanuts", "are allergic to peanuts"],
            ["had not been allergic to peanuts", "had been allergic to peanuts"],
        ),
        person(
            "brown eyes",
            ["eyes that are not brown", "brown eyes"],
            ["do not have brown eyes", "have brown eyes"],
            ["had not had brown eyes", "had had brown eyes"],
        ),
        person(
            "curly hair",
            ["straight hair", "curly hair"],
            ["have straight hair", "have curly hair"],
            ["had had straight hair", "had had curly hair"],
        ),
        person(
            "black hair",
            ["hair that is not black", "black hair"],
            ["do not have black hair", "have black hair"],
            ["had not had black hair", "had had black hair"],
        ),
        person(
            "foot size",
            ["small feet", "large feet"],
            ["have small feet", "have large feet"],
            ["had had small feet", "had had large feet"],
        ),
        person(
            "freckles",
            ["no freckles", "freckles"],
            ["do not have freckles", "have freckles"],
            ["had not had freckles", "had had freckles"],
        ),
    ]
}

/// Treatments that play no causal role in any of the stories.
pub fn irrelevant_treatments() -> Vec<Binding> {
    vec![
        person(
            "ability to swim",
            ["inability to swim", "ability to swim"],
            ["cannot swim", "can swim"],
            ["had not been able to swim", "had been able to swim"],
        ),
        person(
            "religiosity",
            ["not being religious", "being religious"],
            ["are not religious", "are religious"],
            ["had not been religious", "had been religious"],
        ),
        person(
            "having a brother",
            ["having no brother", "having a brother"],
            ["do not have a brother", "have a brother"],
            ["had not had a brother", "had had a brother"],
        ),
        person(
            "having visited England",
            ["never having visited England", "having visited England"],
            ["have never visited England", "have visited England"],
            ["had never visited England", "had visited England"],
        ),
        person(
            "liking spicy food",
            ["disliking spicy food", "liking spicy food"],
            ["dislike spicy food", "like spicy food"],
            ["had disliked spicy food", "had liked spicy food"],
        ),
        person(
            "vegetarianism",
            ["eating meat", "being vegetarian"],
            ["eat meat", "are vegetarian"],
            ["had eaten meat", "had been vegetarian"],
        ),
        person(
            "speaking English",
            ["not speaking English", "speaking English"],
            ["do not speak English", "speak English"],
            ["had not spoken English", "had spoken English"],
        ),
        person(
            "drinking coffee",
            ["not drinking coffee", "drinking coffee"],
            ["do not drink coffee", "drink coffee"],
            ["had not drunk coffee", "had drunk coffee"],
        ),
        person(
            "playing card games",
            ["not playing card games", "playing card games"],
            ["do not play card games", "play card games"],
            ["had not played card games", "had played card games"],
        ),
        person(
            "listening to jazz",
            ["not listening to jazz", "listening to jazz"],
            ["do not listen to jazz", "listen to jazz"],
            ["had not listened to jazz", "had listened to jazz"],
        ),
        Binding {
            overall: "solar eclipse".into(),
            noun: ["no solar eclipse".into(), "a solar eclipse".into()],
            sent: ["there is no solar eclipse".into(), "there is a solar eclipse".into()],
            attr: ["days without a solar eclipse".into(), "days with a solar eclipse".into()],
            cond: ["if there had been no solar eclipse".into(), "if there had been a solar eclipse".into()],
        },
        person(
            "having a sister",
            ["having no sister", "having a sister"],
            ["do not have a sister", "have a sister"],
            ["had not had a sister", "had had a sister"],
        ),
        Binding {
            overall: "full moon".into(),
            noun: ["no full moon".into(), "a full moon".into()],
            sent: ["there is no full moon".into(), "there is a full moon".into()],
            attr: ["nights without a full moon".into(), "nights with a full moon".into()],
            cond: ["if there had been no full moon".into(), "if there had been a full moon".into()],
        },
    ]
}

/// One anti-commonsensical rewrite, indexing into the matching pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntiAction {
    ReplaceOutcome(usize),
    ReplaceTreatment(usize),
}

fn slug(s: &str) -> String {
    s.to_ascii_lowercase().split_whitespace().collect::<Vec<_>>().join("_")
}

fn require_commonsensical(story: &Story) -> Result<(), VerbalizeError> {
    if story.alignment != AlignmentLevel::Commonsensical {
        return Err(VerbalizeError::NotCommonsensical(story.id.clone()));
    }
    Ok(())
}

/// Pool entries whose concept does not already appear in `story`.
fn available(story: &Story, pool: Vec<Binding>) -> Vec<Binding> {
    pool.into_iter().filter(|b| story.bindings.values().all(|s| s.overall != b.overall)).collect()
}

fn primary_graph(story: &Story) -> Result<crate::graph::CgteSpec, VerbalizeError> {
    story
        .graphs
        .first()
        .map(|&g| catalog(g))
        .ok_or_else(|| VerbalizeError::Registry(format!("story `{}` lists no graph", story.id)))
}

/// Rewrite `story` with `action`. Indices refer to the pool after removing
/// concepts the story already uses.
pub fn apply_anti_action(story: &Story, action: AntiAction) -> Result<Story, VerbalizeError> {
    require_commonsensical(story)?;
    let cgte = primary_graph(story)?;
    let (node, pool, kind, idx) = match action {
        AntiAction::ReplaceOutcome(i) => (cgte.outcome_name(), available(story, unusual_outcomes()), "outcome", i),
        AntiAction::ReplaceTreatment(i) => {
            (cgte.treatment_name(), available(story, irrelevant_treatments()), "treatment", i)
        }
    };
    if pool.is_empty() {
        return Err(VerbalizeError::PoolExhausted(kind));
    }
    let binding = pool[idx % pool.len()].clone();
    let mut out = story.clone();
    out.id = format!("{}__anti_{}_{}", story.id, kind, slug(&binding.overall));
    out.alignment = AlignmentLevel::AntiCommonsensical;
    out.bindings.insert(node.to_string(), binding);
    Ok(out)
}

/// Forms for an invented word, derived mechanically.
pub fn nonsense_binding(word: &str) -> Binding {
    Binding {
        overall: word.to_string(),
        noun: [format!("not being {word}"), format!("being {word}")],
        sent: [format!("it is not {word}"), format!("it is {word}")],
        attr: [format!("those who are not {word}"), format!("those who are {word}")],
        cond: [format!("had it not been {word}"), format!("had it been {word}")],
    }
}

/// Rebind the nodes of `story`'s graph, in node order, to `words`.
pub fn nonsense_story(story: &Story, words: &[&str]) -> Result<Story, VerbalizeError> {
    require_commonsensical(story)?;
    let cgte = primary_graph(story)?;
    let n = cgte.dag.len();
    if words.len() < n {
        return Err(VerbalizeError::PoolExhausted("nonsense word"));
    }
    let mut out = story.clone();
    out.alignment = AlignmentLevel::Nonsensical;
    out.id = format!("{}__nonsense_{}", story.id, words[..n].join("_"));
    out.bindings.clear();
    for (node, word) in cgte.dag.nodes().iter().zip(words) {
        out.bindings.insert(node.name.clone(), nonsense_binding(word));
    }
    Ok(out)
}

/// A variant of a commonsensical story at `level`.
pub fn transform_alignment<R: Rng + ?Sized>(
    story: &Story,
    level: AlignmentLevel,
    rng: &mut R,
) -> Result<Story, VerbalizeError> {
    require_commonsensical(story)?;
    match level {
        AlignmentLevel::Commonsensical => Ok(story.clone()),
        AlignmentLevel::AntiCommonsensical => {
            let outcome = rng.random_bool(0.5);
            let pool_len = if outcome {
                available(story, unusual_outcomes()).len()
            } else {
                available(story, irrelevant_treatments()).len()
            };
            if pool_len == 0 {
                return Err(VerbalizeError::PoolExhausted(if outcome { "outcome" } else { "treatment" }));
            }
            let i = rng.random_range(0..pool_len);
            apply_anti_action(story, if outcome { AntiAction::ReplaceOutcome(i) } else { AntiAction::ReplaceTreatment(i) })
        }
        AlignmentLevel::Nonsensical => {
            let n = primary_graph(story)?.dag.len();
            let mut distinct: Vec<&str> = NONSENSE_WORDS.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            let words: Vec<&str> = distinct.choose_multiple(rng, n).copied().collect();
            nonsense_story(story, &words)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphName;
    use crate::verbalize::{render_graph_text, story_by_id};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool_index(pool: Vec<Binding>, story: &Story, overall: &str) -> usize {
        available(story, pool).iter().position(|b| b.overall == overall).unwrap()
    }

    fn anti_text(id: &str, graph: GraphName, outcome: bool, concept: &str) -> String {
        let story = story_by_id(id).unwrap();
        let action = if outcome {
            AntiAction::ReplaceOutcome(pool_index(unusual_outcomes(), story, concept))
        } else {
            AntiAction::ReplaceTreatment(pool_index(irrelevant_treatments(), story, concept))
        };
        let anti = apply_anti_action(story, action).unwrap();
        render_graph_text(&catalog(graph), &anti).unwrap()
    }

    #[test]
    fn unusual_outcome_replaces_effect() {
        assert_eq!(
            anti_text("gender_department_admission", GraphName::Mediation, true, "peanut allergy"),
            "Gender has a direct effect on department competitiveness and peanut allergy. \
             Department competitiveness has a direct effect on peanut allergy."
        );
    }

    #[test]
    fn irrelevant_treatment_replaces_cause() {
        assert_eq!(
            anti_text("encouragement_studying_exam", GraphName::Mediation, false, "ability to swim"),
            "Ability to swim has a direct effect on studying habit and exam score. \
             Studying habit has a direct effect on exam score."
        );
        assert_eq!(
            anti_text("personality_appearance_relationship", GraphName::Collision, false, "liking spicy food"),
            "Liking spicy food has a direct effect on relationship status. \
             Appearance has a direct effect on relationship status."
        );
        assert_eq!(
            anti_text("obesity_smoking_diabetes_lifespan", GraphName::Arrowhead, false, "playing card games"),
            "Playing card games has a direct effect on diabetes and lifespan. \
             Smoking has a direct effect on diabetes and lifespan. \
             Diabetes has a direct effect on lifespan. Smoking is unobserved."
        );
    }

    #[test]
    fn nonsense_chain() {
        let story = story_by_id("smoking_tar_cancer").unwrap();
        let ns = nonsense_story(story, &["ziblo", "truq", "fyze"]).unwrap();
        assert_eq!(ns.alignment, AlignmentLevel::Nonsensical);
        let text = render_graph_text(&catalog(GraphName::Chain), &ns).unwrap();
        assert_eq!(text, "Ziblo has a direct effect on truq. Truq has a direct effect on fyze.");
        let b = ns.binding("X").unwrap();
        assert_eq!(b.noun(1), "being ziblo");
        assert_eq!(b.attr(1), "those who are ziblo");
        assert_eq!(b.cond(1), "had it been ziblo");
    }

    #[test]
    fn commonsensical_is_identity() {
        let story = story_by_id("smoking_tar_cancer").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(&transform_alignment(story, AlignmentLevel::Commonsensical, &mut rng).unwrap(), story);
    }

    #[test]
    fn transforms_keep_graph_and_bind_every_node() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for story in crate::verbalize::stories() {
            let cgte = primary_graph(story).unwrap();
            for level in [AlignmentLevel::AntiCommonsensical, AlignmentLevel::Nonsensical] {
                let t = transform_alignment(story, level, &mut rng).unwrap();
                assert_eq!(t.graphs, story.graphs);
                assert_eq!(t.alignment, level);
                t.check_compatible(&cgte).unwrap();
                let overall: std::collections::BTreeSet<&str> =
                    t.bindings.values().map(|b| b.overall.as_str()).collect();
                assert_eq!(overall.len(), cgte.dag.len(), "{}", t.id);
            }
        }
    }

    #[test]
    fn transforming_twice_is_rejected() {
        let story = story_by_id("smoking_tar_cancer").unwrap();
        let ns = nonsense_story(story, &["ziblo", "truq", "fyze"]).unwrap();
        assert!(matches!(apply_anti_action(&ns, AntiAction::ReplaceOutcome(0)), Err(VerbalizeError::NotCommonsensical(_))));
    }

    #[test]
    fn exhausted_pool_errors() {
        let mut story = story_by_id("smoking_tar_cancer").unwrap().clone();
        for (i, b) in unusual_outcomes().into_iter().enumerate() {
            story.bindings.insert(format!("extra{i}"), b);
        }
        assert_eq!(apply_anti_action(&story, AntiAction::ReplaceOutcome(0)), Err(VerbalizeError::PoolExhausted("outcome")));
    }

    #[test]
    fn pools_are_clean() {
        for b in unusual_outcomes().iter().chain(irrelevant_treatments().iter()) {
            for f in b.surface_forms() {
                assert!(!f.contains(',') && !f.contains('.') && !f.contains('%'), "{f}");
            }
        }
        assert_eq!(unusual_outcomes().len(), 10);
        assert_eq!(irrelevant_treatments().len(), 13);
    }
}
