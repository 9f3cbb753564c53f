//! Identification, evaluation and brute-force verification of queries.

pub mod estimand;
pub mod identify;
pub mod oracle;

use thiserror::Error;

use crate::graph::{CgteSpec, GraphError, GraphName};
use crate::model::{Cbn, CbnParams, ModelError};
use crate::query::{decide_answer, Answer, QueryError, QueryInstance, QueryType};

pub use estimand::{format_prob, Atom, DataTable, Estimand, Expr, TermKey, Val};
pub use identify::{
    adjustment_candidates, check_instance, derive_estimand, find_minimal_adjustment_sets, frontdoor_mediator,
    is_valid_backdoor_set,
};
pub use oracle::oracle;

/// Identifier recorded with generated data.
pub const ENGINE_VERSION: &str = concat!("ladder-engine/", env!("CARGO_PKG_VERSION"));

/// Agreement required between the estimand and the brute-force oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("{qtype} is not identifiable on graph {graph}")]
    NotIdentifiable { graph: GraphName, qtype: QueryType },
    #[error("invalid candidate set: {0}")]
    InvalidCandidate(String),
    #[error("data term {0:?} is not available")]
    MissingTerm(TermKey),
    #[error("summation variable for node {0} is unbound")]
    UnboundVariable(usize),
    #[error("division by zero in estimand")]
    DivisionByZero,
    #[error("instrument moves the treatment in both directions")]
    NonMonotone,
    #[error("instrument is too weak (first stage {0:.4})")]
    WeakInstrument(f64),
    #[error("graph {0} has no instrument")]
    NoInstrument(GraphName),
    #[error("graph {0} has no collider of treatment and outcome")]
    NoCollider(GraphName),
    #[error("estimand gives {estimand}, oracle gives {oracle}")]
    OracleMismatch { estimand: f64, oracle: f64 },
    #[error("rounding the displayed data changes the answer")]
    RoundingSensitive,
}

/// Everything computed for one query on one parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub estimand: Estimand,
    pub data: DataTable,
    /// Value of the estimand as derived (before orienting by direction).
    pub raw_value: f64,
    /// The quantity the question compares to its threshold.
    pub value: f64,
    pub oracle_value: f64,
    pub answer: Answer,
}

/// Derive, evaluate, verify against the oracle and decide.
pub fn solve(cgte: &CgteSpec, params: &CbnParams, q: &QueryInstance) -> Result<Solution, EngineError> {
    q.validate()?;
    let cbn = Cbn::new(cgte.dag.clone(), params.clone())?;
    let estimand = derive_estimand(cgte, q)?;
    check_instance(cgte, &cbn, &estimand)?;
    let data = DataTable::from_model(&cbn, &estimand.required_data()?)?;
    let raw_value = estimand.evaluate_with(&data)?;
    let oracle_value = oracle(cgte, &cbn, q)?;
    if (raw_value - oracle_value).abs() > ORACLE_TOLERANCE {
        return Err(EngineError::OracleMismatch { estimand: raw_value, oracle: oracle_value });
    }
    let value = q.direction.orient(q.qtype, raw_value);
    let answer = decide_answer(q.qtype, value)?;
    Ok(Solution { estimand, data, raw_value, value, oracle_value, answer })
}

/// Error unless the answer survives rounding the data to its displayed precision.
pub fn check_display_stable(q: &QueryInstance, solution: &Solution) -> Result<(), EngineError> {
    let shown = solution.data.map_values(estimand::displayed_prob);
    let raw = solution.estimand.evaluate_with(&shown)?;
    match decide_answer(q.qtype, q.direction.orient(q.qtype, raw)) {
        Ok(a) if a == solution.answer => Ok(()),
        _ => Err(EngineError::RoundingSensitive),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, GraphName};
    use crate::model::ParamsJson;
    use crate::query::Direction;

    fn params(g: GraphName, json: &str) -> (CgteSpec, CbnParams) {
        let spec = catalog(g);
        let json: ParamsJson = serde_json::from_str(json).unwrap();
        let p = CbnParams::from_json(&spec.dag, &json).unwrap();
        (spec, p)
    }

    const CONF: &str = r#"{
        "Z": {"parents": [], "table": {"": 0.5}},
        "X": {"parents": ["Z"], "table": {"0": 0.3, "1": 0.7}},
        "Y": {"parents": ["X", "Z"], "table": {"00": 0.4, "10": 0.8, "01": 0.2, "11": 0.6}}
    }"#;

    fn run(g: GraphName, json: &str, qtype: QueryType) -> Solution {
        let (spec, p) = params(g, json);
        solve(&spec, &p, &QueryInstance::simple(g, qtype, Direction::Increase)).unwrap()
    }

    #[test]
    fn confounding_backdoor() {
        let s = run(GraphName::Confounding, CONF, QueryType::Ate);
        assert!((s.raw_value - 0.40).abs() < 1e-12);
        assert_eq!(s.answer, Answer::Yes);
        let spec = catalog(GraphName::Confounding);
        assert_eq!(s.estimand.render(&spec), "\\sum_{Z} P(Z)*[P(Y=1|X=1,Z) - P(Y=1|X=0,Z)]");
        let keys: Vec<String> = s.data.terms().iter().map(|(k, _)| k.render(&spec)).collect();
        assert_eq!(keys, ["P(Z=1)", "P(Y=1|X=0,Z=0)", "P(Y=1|X=0,Z=1)", "P(Y=1|X=1,Z=0)", "P(Y=1|X=1,Z=1)"]);
    }

    #[test]
    fn chain_marginal_terms() {
        let spec = catalog(GraphName::Chain);
        let q = QueryInstance::simple(GraphName::Chain, QueryType::MarginalProb, Direction::Increase);
        let est = derive_estimand(&spec, &q).unwrap();
        let keys: Vec<String> = est.required_data().unwrap().iter().map(|k| k.render(&spec)).collect();
        assert_eq!(keys, ["P(X=1)", "P(M=1|X=0)", "P(M=1|X=1)", "P(Y=1|M=0)", "P(Y=1|M=1)"]);
    }

    #[test]
    fn mediation_nie_terms() {
        let spec = catalog(GraphName::Mediation);
        let q = QueryInstance::simple(GraphName::Mediation, QueryType::Nie, Direction::Increase);
        let est = derive_estimand(&spec, &q).unwrap();
        let keys: Vec<String> = est.required_data().unwrap().iter().map(|k| k.render(&spec)).collect();
        assert_eq!(keys, ["P(M=1|X=0)", "P(M=1|X=1)", "P(Y=1|X=0,M=0)", "P(Y=1|X=0,M=1)"]);
    }

    #[test]
    fn adjustment_sets() {
        let conf = catalog(GraphName::Confounding);
        let z = conf.dag.set(&["Z"]).unwrap();
        assert!(is_valid_backdoor_set(&conf, z).unwrap());
        assert!(!is_valid_backdoor_set(&conf, crate::NodeSet::EMPTY).unwrap());
        assert_eq!(find_minimal_adjustment_sets(&conf), [z]);
        let med = catalog(GraphName::Mediation);
        assert!(is_valid_backdoor_set(&med, crate::NodeSet::EMPTY).unwrap());
        assert!(!is_valid_backdoor_set(&med, med.dag.set(&["M"]).unwrap()).unwrap());
        assert_eq!(find_minimal_adjustment_sets(&catalog(GraphName::Chain)), [crate::NodeSet::EMPTY]);
        assert!(find_minimal_adjustment_sets(&catalog(GraphName::Frontdoor)).is_empty());
        let x = conf.dag.set(&["X"]).unwrap();
        assert!(matches!(is_valid_backdoor_set(&conf, x), Err(EngineError::InvalidCandidate(_))));
    }

    #[test]
    fn chain_nde_is_constant_zero() {
        let spec = catalog(GraphName::Chain);
        let q = QueryInstance::simple(GraphName::Chain, QueryType::Nde, Direction::Increase);
        let est = derive_estimand(&spec, &q).unwrap();
        assert_eq!(est.expr, Expr::Const(0.0));
        assert!(est.notes[0].contains("no direct edge"));
    }

    #[test]
    fn arrowhead_mediation_effects_are_not_identified() {
        let spec = catalog(GraphName::Arrowhead);
        for qtype in [QueryType::Nde, QueryType::Nie] {
            let q = QueryInstance::simple(GraphName::Arrowhead, qtype, Direction::Increase);
            assert!(matches!(derive_estimand(&spec, &q), Err(EngineError::NotIdentifiable { .. })));
        }
    }

    #[test]
    fn substitution_text() {
        let s = run(GraphName::Confounding, CONF, QueryType::Ate);
        let spec = catalog(GraphName::Confounding);
        let text = s.estimand.substitute(&spec, &s.data).unwrap();
        assert_eq!(text, "(1-0.50)*(0.80 - 0.40) + 0.50*(0.60 - 0.20)");
    }

    #[test]
    fn display_stability_rejects_borderline_data() {
        let s = run(GraphName::Confounding, CONF, QueryType::Ate);
        let q = QueryInstance::simple(GraphName::Confounding, QueryType::Ate, Direction::Increase);
        check_display_stable(&q, &s).unwrap();
    }
}
