//! Query taxonomy, graph applicability and the yes/no decision rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphName;

/// Minimum distance from the decision threshold for an instance to count.
pub const TIE_EPSILON: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("unknown query type `{name}`; valid names: {valid}")]
    UnknownQueryType { name: String, valid: String },
    #[error("value {value} is within {TIE_EPSILON} of the threshold {threshold}")]
    Degenerate { value: f64, threshold: f64 },
    #[error("query type {qtype} is not asked on graph {graph}")]
    NotApplicable { graph: GraphName, qtype: QueryType },
    #[error("query type {qtype} requires field `{field}`")]
    MissingField { qtype: QueryType, field: &'static str },
    #[error("query type {qtype} does not take field `{field}`")]
    UnexpectedField { qtype: QueryType, field: &'static str },
    #[error("unknown answer `{0}`")]
    UnknownAnswer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryType {
    MarginalProb,
    CondProb,
    Ate,
    AdjustmentSet,
    ColliderBias,
    CounterfactualProb,
    Att,
    Nde,
    Nie,
    ExplainingAway,
}

impl QueryType {
    pub const ALL: [QueryType; 10] = [
        QueryType::MarginalProb,
        QueryType::CondProb,
        QueryType::Ate,
        QueryType::AdjustmentSet,
        QueryType::ColliderBias,
        QueryType::CounterfactualProb,
        QueryType::Att,
        QueryType::Nde,
        QueryType::Nie,
        QueryType::ExplainingAway,
    ];

    /// Stable snake_case identifier used in serialized records.
    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::MarginalProb => "marginal_prob",
            QueryType::CondProb => "cond_prob",
            QueryType::Ate => "ate",
            QueryType::AdjustmentSet => "adjustment_set",
            QueryType::ColliderBias => "collider_bias",
            QueryType::CounterfactualProb => "counterfactual_prob",
            QueryType::Att => "att",
            QueryType::Nde => "nde",
            QueryType::Nie => "nie",
            QueryType::ExplainingAway => "explaining_away",
        }
    }

    /// Human-readable name used in explanations.
    pub fn label(self) -> &'static str {
        match self {
            QueryType::MarginalProb => "marginal probability",
            QueryType::CondProb => "conditional probability",
            QueryType::Ate => "average treatment effect",
            QueryType::AdjustmentSet => "backdoor adjustment set",
            QueryType::ColliderBias => "collider bias",
            QueryType::CounterfactualProb => "counterfactual probability",
            QueryType::Att => "average treatment effect on treated",
            QueryType::Nde => "natural direct effect",
            QueryType::Nie => "natural indirect effect",
            QueryType::ExplainingAway => "explaining away effect",
        }
    }

    pub fn rung(self) -> u8 {
        match self {
            QueryType::MarginalProb | QueryType::CondProb => 1,
            QueryType::Ate | QueryType::AdjustmentSet | QueryType::ColliderBias | QueryType::ExplainingAway => 2,
            QueryType::CounterfactualProb | QueryType::Att | QueryType::Nde | QueryType::Nie => 3,
        }
    }

    pub fn symbolic_form(self) -> &'static str {
        match self {
            QueryType::MarginalProb => "P(Y)",
            QueryType::CondProb => "P(Y|X)",
            QueryType::Ate => "E[Y|do(X=1)] - E[Y|do(X=0)]",
            QueryType::AdjustmentSet => "If S opens a backdoor path",
            QueryType::ColliderBias => "[P(Y|X=1,C=c) - P(Y|X=0,C=c)] - [E[Y|do(X=1)] - E[Y|do(X=0)]]",
            QueryType::CounterfactualProb => "P(Y_x=y)",
            QueryType::Att => "E[Y_1 - Y_0|X=1]",
            QueryType::Nde => "E[Y_{1,M_0} - Y_{0,M_0}]",
            QueryType::Nie => "E[Y_{0,M_1} - Y_{0,M_0}]",
            QueryType::ExplainingAway => "P(Y|X=1,C=1) - P(Y|X=0,C=1)",
        }
    }

    /// Whether the decision compares a probability to one half rather than a
    /// difference to zero.
    pub fn is_probability_valued(self) -> bool {
        matches!(self, QueryType::MarginalProb | QueryType::CounterfactualProb)
    }

    pub fn threshold(self) -> f64 {
        if self.is_probability_valued() {
            0.5
        } else {
            0.0
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryType {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "marginal" => Some(QueryType::MarginalProb),
            "correlation" | "conditional" => Some(QueryType::CondProb),
            "backadj" | "adjustment" => Some(QueryType::AdjustmentSet),
            "counterfactual" | "det_counterfactual" => Some(QueryType::CounterfactualProb),
            _ => None,
        };
        alias
            .or_else(|| QueryType::ALL.into_iter().find(|q| q.as_str() == key))
            .ok_or_else(|| QueryError::UnknownQueryType {
                name: s.to_string(),
                valid: QueryType::ALL.map(|q| q.as_str()).join(", "),
            })
    }
}

impl Serialize for QueryType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for QueryType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Phrasing of a question. `Decrease` negates the quantity being asked about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

impl Direction {
    /// The quantity a question in this direction compares to the threshold.
    pub fn orient(self, qtype: QueryType, raw: f64) -> f64 {
        match (self, qtype.is_probability_valued()) {
            (Direction::Increase, _) => raw,
            (Direction::Decrease, true) => 1.0 - raw,
            (Direction::Decrease, false) => -raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        }
    }

    /// Capitalized form used in explanations.
    pub fn title(self) -> &'static str {
        match self {
            Answer::Yes => "Yes",
            Answer::No => "No",
        }
    }

    pub fn flip(self) -> Answer {
        match self {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Answer {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Ok(Answer::Yes),
            "no" => Ok(Answer::No),
            _ => Err(QueryError::UnknownAnswer(s.to_string())),
        }
    }
}

/// Yes iff `value` exceeds the type's threshold. Values within
/// [`TIE_EPSILON`] of the threshold are rejected.
pub fn decide_answer(qtype: QueryType, value: f64) -> Result<Answer, QueryError> {
    let threshold = qtype.threshold();
    if !value.is_finite() || (value - threshold).abs() < TIE_EPSILON {
        return Err(QueryError::Degenerate { value, threshold });
    }
    Ok(if value > threshold { Answer::Yes } else { Answer::No })
}

/// Coverage rules: which query types are asked on which graph.
pub fn coverage(graph: GraphName, qtype: QueryType) -> bool {
    use GraphName::*;
    match qtype {
        QueryType::Nde => matches!(graph, Iv | Arrowhead | Confounding | Mediation | DiamondCut),
        QueryType::Nie => matches!(graph, Mediation | Frontdoor | Arrowhead | Diamond | Chain),
        QueryType::ColliderBias | QueryType::ExplainingAway => graph == Collision,
        QueryType::Ate | QueryType::CounterfactualProb => graph != Collision,
        QueryType::Att => !matches!(graph, Collision | Iv),
        QueryType::MarginalProb | QueryType::CondProb | QueryType::AdjustmentSet => true,
    }
}

/// Pairs covered by [`coverage`] that are nevertheless never generated,
/// with the reason. Each one either has no identifying formula under the
/// graph's assumptions or no non-trivial question to ask.
pub fn engine_exclusion(graph: GraphName, qtype: QueryType) -> Option<&'static str> {
    use GraphName::*;
    match (graph, qtype) {
        (Collision, QueryType::CondProb) => Some("treatment and outcome are independent by construction"),
        (Fork | Iv | Frontdoor, QueryType::AdjustmentSet) => {
            Some("no observed candidate set differs from the empty set in validity")
        }
        (Iv, QueryType::CounterfactualProb) => {
            Some("counterfactual of the treated is not identified by the instrument")
        }
        (Arrowhead, QueryType::Nde | QueryType::Nie) => {
            Some("mediator and outcome share an unobserved cause")
        }
        _ => None,
    }
}

/// Whether questions of `qtype` are generated on `graph`.
pub fn applicability(graph: GraphName, qtype: QueryType) -> bool {
    coverage(graph, qtype) && engine_exclusion(graph, qtype).is_none()
}

/// All generated `(graph, query type)` pairs in catalog order.
pub fn admissible_pairs() -> Vec<(GraphName, QueryType)> {
    let mut out = Vec::new();
    for g in GraphName::ALL {
        for q in QueryType::ALL {
            if applicability(g, q) {
                out.push((g, q));
            }
        }
    }
    out
}

/// A fully specified question about one catalog graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInstance {
    pub qtype: QueryType,
    pub graph: GraphName,
    pub direction: Direction,
    /// Factual treatment value (counterfactual questions only); the
    /// counterfactual world sets the treatment to the other value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_value: Option<u8>,
    /// Candidate adjustment set (adjustment-set questions only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_set: Option<Vec<String>>,
    /// Value of the collider being conditioned on (collider questions only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collider_value: Option<u8>,
}

impl QueryInstance {
    /// A query without type-specific fields.
    pub fn simple(graph: GraphName, qtype: QueryType, direction: Direction) -> Self {
        QueryInstance { qtype, graph, direction, evidence_value: None, candidate_set: None, collider_value: None }
    }

    /// Check applicability and that exactly the type-specific fields are set.
    pub fn validate(&self) -> Result<(), QueryError> {
        if !applicability(self.graph, self.qtype) {
            return Err(QueryError::NotApplicable { graph: self.graph, qtype: self.qtype });
        }
        let q = self.qtype;
        let check = |present: bool, wanted: bool, field: &'static str| match (present, wanted) {
            (false, true) => Err(QueryError::MissingField { qtype: q, field }),
            (true, false) => Err(QueryError::UnexpectedField { qtype: q, field }),
            _ => Ok(()),
        };
        check(self.evidence_value.is_some(), q == QueryType::CounterfactualProb, "evidence_value")?;
        check(self.candidate_set.is_some(), q == QueryType::AdjustmentSet, "candidate_set")?;
        check(
            self.collider_value.is_some(),
            matches!(q, QueryType::ColliderBias | QueryType::ExplainingAway),
            "collider_value",
        )?;
        if q == QueryType::ExplainingAway && self.collider_value != Some(1) {
            return Err(QueryError::MissingField { qtype: q, field: "collider_value = 1" });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use GraphName::*;

    #[test]
    fn rungs() {
        assert_eq!(QueryType::MarginalProb.rung(), 1);
        assert_eq!(QueryType::CondProb.rung(), 1);
        assert_eq!(QueryType::Ate.rung(), 2);
        assert_eq!(QueryType::AdjustmentSet.rung(), 2);
        assert_eq!(QueryType::ColliderBias.rung(), 2);
        assert_eq!(QueryType::ExplainingAway.rung(), 2);
        for q in [QueryType::CounterfactualProb, QueryType::Att, QueryType::Nde, QueryType::Nie] {
            assert_eq!(q.rung(), 3);
        }
    }

    #[test]
    fn decide_answer_examples() {
        assert_eq!(decide_answer(QueryType::CondProb, 0.66 - 0.34), Ok(Answer::Yes));
        assert!(matches!(decide_answer(QueryType::Ate, 0.0), Err(QueryError::Degenerate { .. })));
        assert!(matches!(decide_answer(QueryType::MarginalProb, 0.50), Err(QueryError::Degenerate { .. })));
        assert_eq!(decide_answer(QueryType::MarginalProb, 0.51), Ok(Answer::Yes));
        assert_eq!(decide_answer(QueryType::CounterfactualProb, 0.2), Ok(Answer::No));
        assert!(decide_answer(QueryType::Ate, f64::NAN).is_err());
    }

    #[test]
    fn direction_flips_answer() {
        for q in QueryType::ALL {
            for raw in [-0.7, -0.2, 0.03, 0.2, 0.45, 0.8, 0.97] {
                let up = decide_answer(q, Direction::Increase.orient(q, raw));
                let down = decide_answer(q, Direction::Decrease.orient(q, raw));
                match (up, down) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b.flip(), "{q} {raw}"),
                    (Err(_), Err(_)) => {}
                    other => panic!("inconsistent degeneracy {other:?}"),
                }
            }
        }
    }

    #[test]
    fn symbolic_forms() {
        assert_eq!(QueryType::Ate.symbolic_form(), "E[Y|do(X=1)] - E[Y|do(X=0)]");
        assert_eq!(QueryType::Nie.symbolic_form(), "E[Y_{0,M_1} - Y_{0,M_0}]");
        assert_eq!(QueryType::Nde.symbolic_form(), "E[Y_{1,M_0} - Y_{0,M_0}]");
        assert_eq!(QueryType::Att.symbolic_form(), "E[Y_1 - Y_0|X=1]");
        assert_eq!(QueryType::CounterfactualProb.symbolic_form(), "P(Y_x=y)");
    }

    #[test]
    fn names_round_trip() {
        for q in QueryType::ALL {
            assert_eq!(q.as_str().parse::<QueryType>().unwrap(), q);
            let json = serde_json::to_string(&q).unwrap();
            assert_eq!(serde_json::from_str::<QueryType>(&json).unwrap(), q);
        }
        assert_eq!("ATE".parse::<QueryType>().unwrap(), QueryType::Ate);
        let err = "bogus".parse::<QueryType>().unwrap_err().to_string();
        assert!(err.contains("explaining_away"));
    }

    #[test]
    fn coverage_is_total_and_matches_listed_examples() {
        let mut count = 0;
        for g in GraphName::ALL {
            for q in QueryType::ALL {
                let _ = applicability(g, q);
                count += 1;
            }
        }
        assert_eq!(count, 100);
        assert!(!applicability(Collision, QueryType::Ate));
        assert!(coverage(Iv, QueryType::Nde) && applicability(Iv, QueryType::Nde));
        assert!(!applicability(Iv, QueryType::Att));
    }

    #[test]
    fn applicability_never_exceeds_coverage() {
        for g in GraphName::ALL {
            for q in QueryType::ALL {
                if applicability(g, q) {
                    assert!(coverage(g, q));
                }
            }
        }
    }

    #[test]
    fn instance_validation() {
        let ok = QueryInstance::simple(Confounding, QueryType::Ate, Direction::Increase);
        ok.validate().unwrap();
        let bad = QueryInstance::simple(Collision, QueryType::Ate, Direction::Increase);
        assert!(matches!(bad.validate(), Err(QueryError::NotApplicable { .. })));
        let cf = QueryInstance::simple(Confounding, QueryType::CounterfactualProb, Direction::Increase);
        assert!(matches!(cf.validate(), Err(QueryError::MissingField { .. })));
        let mut extra = ok.clone();
        extra.collider_value = Some(1);
        assert!(matches!(extra.validate(), Err(QueryError::UnexpectedField { .. })));
    }
}
