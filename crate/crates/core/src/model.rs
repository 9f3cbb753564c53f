//! Binary causal Bayesian networks and their canonical structural model.
//!
//! Every node `v` has a table `theta_v[pa]` giving `P(v = 1 | pa)`. Worlds
//! (full assignments) are packed into a `u8`, bit `i` holding node `i`.
//!
//! Counterfactuals use the monotone threshold model `v := 1 iff U_v <= theta_v(pa)`
//! with independent `U_v ~ Uniform(0, 1)`. The thresholds of one node split
//! `[0, 1]` into finitely many cells; inside a cell the node's response to
//! every parent configuration is fixed, so the exogenous box reduces to a
//! finite product of cells weighted by their lengths.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Dag, GraphError, NodeSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("assignment is missing nodes: {0}")]
    Incomplete(String),
    #[error("conditioning event has probability zero")]
    ZeroProbability,
    #[error("node `{node}` expects {expected} table entries, got {got}")]
    TableSize { node: String, expected: usize, got: usize },
    #[error("probability {value} for node `{node}` is outside [0, 1]")]
    OutOfRange { node: String, value: f64 },
    #[error("probability {value} for node `{node}` is not on the 0.01 grid")]
    OffGrid { node: String, value: f64 },
    #[error("no table given for node `{0}`")]
    MissingTable(String),
    #[error("table for node `{node}` is malformed: {reason}")]
    BadTable { node: String, reason: String },
    #[error("value {0} is not binary")]
    NotBinary(u8),
    #[error("parameter sampling gave up after {0} attempts")]
    BudgetExhausted(usize),
}

/// Sum with Neumaier compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Partial assignment of binary values to nodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    mask: NodeSet,
    values: u8,
}

/// A conjunction of literals.
pub type Event = Assignment;

impl Assignment {
    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn of(i: usize, value: u8) -> Self {
        Assignment::empty().with(i, value)
    }

    pub fn from_names(dag: &Dag, literals: &[(&str, u8)]) -> Result<Self, ModelError> {
        let mut a = Assignment::empty();
        for &(name, value) in literals {
            if value > 1 {
                return Err(ModelError::NotBinary(value));
            }
            a = a.with(dag.index(name)?, value);
        }
        Ok(a)
    }

    /// Restriction of a full world to `mask`.
    pub fn from_world(world: u8, mask: NodeSet) -> Self {
        Assignment { mask, values: world & mask.bits() }
    }

    pub fn with(self, i: usize, value: u8) -> Self {
        let bit = 1u8 << i;
        let values = if value != 0 { self.values | bit } else { self.values & !bit };
        Assignment { mask: self.mask.with(i), values }
    }

    pub fn mask(self) -> NodeSet {
        self.mask
    }

    pub fn get(self, i: usize) -> Option<u8> {
        self.mask.contains(i).then(|| (self.values >> i) & 1)
    }

    pub fn is_empty(self) -> bool {
        self.mask.is_empty()
    }

    pub fn len(self) -> usize {
        self.mask.len()
    }

    pub fn iter(self) -> impl Iterator<Item = (usize, u8)> {
        self.mask.iter().map(move |i| (i, (self.values >> i) & 1))
    }

    /// Whether the world agrees with every literal.
    pub fn matches(self, world: u8) -> bool {
        (world ^ self.values) & self.mask.bits() == 0
    }

    /// Conjunction; `None` if the two disagree on a shared node.
    pub fn and(self, other: Assignment) -> Option<Assignment> {
        let shared = self.mask.intersection(other.mask).bits();
        if (self.values ^ other.values) & shared != 0 {
            return None;
        }
        Some(Assignment { mask: self.mask.union(other.mask), values: self.values | other.values })
    }

    /// Literals as `name=value`, joined by commas, in node order.
    pub fn display(self, dag: &Dag) -> String {
        self.iter()
            .map(|(i, v)| format!("{}={}", dag.name(i), v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Bernoulli mechanism tables.
///
/// `tables[v][k]` is `P(v = 1)` when bit `j` of `k` is the value of the
/// `j`-th parent of `v` in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct CbnParams {
    parents: Vec<NodeSet>,
    tables: Vec<Vec<f64>>,
}

impl CbnParams {
    pub fn new(dag: &Dag, tables: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if tables.len() != dag.len() {
            return Err(ModelError::MissingTable(
                dag.nodes().get(tables.len()).map_or_else(String::new, |n| n.name.clone()),
            ));
        }
        for (v, table) in tables.iter().enumerate() {
            let expected = 1 << dag.parents(v).len();
            if table.len() != expected {
                return Err(ModelError::TableSize { node: dag.name(v).to_string(), expected, got: table.len() });
            }
            for &value in table {
                if !(0.0..=1.0).contains(&value) {
                    return Err(ModelError::OutOfRange { node: dag.name(v).to_string(), value });
                }
            }
        }
        let parents = (0..dag.len()).map(|v| dag.parents(v)).collect();
        Ok(CbnParams { parents, tables })
    }

    /// Tables built from a closure over `(node, parent assignment)`.
    pub fn from_fn(dag: &Dag, mut f: impl FnMut(usize, Assignment) -> f64) -> Result<Self, ModelError> {
        let tables = (0..dag.len())
            .map(|v| {
                let pa = dag.parents(v);
                (0..1usize << pa.len()).map(|k| f(v, parent_assignment(pa, k))).collect()
            })
            .collect();
        CbnParams::new(dag, tables)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn table(&self, v: usize) -> &[f64] {
        &self.tables[v]
    }

    /// `P(v = 1 | parents)` with parent values read from `world`.
    pub fn theta(&self, v: usize, world: u8) -> f64 {
        self.tables[v][config_index(self.parents[v], world)]
    }

    /// Error unless every entry is a multiple of 0.01.
    pub fn check_grid(&self, dag: &Dag) -> Result<(), ModelError> {
        for (v, table) in self.tables.iter().enumerate() {
            for &value in table {
                if !on_grid(value) {
                    return Err(ModelError::OffGrid { node: dag.name(v).to_string(), value });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, dag: &Dag) -> ParamsJson {
        let mut out = BTreeMap::new();
        for (v, table) in self.tables.iter().enumerate() {
            let pa: Vec<usize> = self.parents[v].iter().collect();
            let mut entries = BTreeMap::new();
            for (k, &value) in table.iter().enumerate() {
                let key: String = (0..pa.len()).map(|j| if k >> j & 1 == 1 { '1' } else { '0' }).collect();
                entries.insert(key, value);
            }
            out.insert(
                dag.name(v).to_string(),
                NodeTableJson { parents: pa.iter().map(|&p| dag.name(p).to_string()).collect(), table: entries },
            );
        }
        ParamsJson(out)
    }

    /// Parse tables keyed by node name. The parent list of each table may be
    /// given in any order; it must name exactly the node's parents.
    pub fn from_json(dag: &Dag, json: &ParamsJson) -> Result<Self, ModelError> {
        let mut tables = Vec::with_capacity(dag.len());
        for v in 0..dag.len() {
            let name = dag.name(v);
            let entry = json.0.get(name).ok_or_else(|| ModelError::MissingTable(name.to_string()))?;
            let bad = |reason: String| ModelError::BadTable { node: name.to_string(), reason };
            let given: Vec<usize> = entry
                .parents
                .iter()
                .map(|p| dag.index(p))
                .collect::<Result<_, _>>()?;
            let given_set: NodeSet = given.iter().copied().collect();
            if given_set != dag.parents(v) || given.len() != given_set.len() {
                return Err(bad(format!(
                    "parents {:?} do not match the graph parents {:?}",
                    entry.parents,
                    dag.names(dag.parents(v))
                )));
            }
            let pa: Vec<usize> = dag.parents(v).iter().collect();
            let expected = 1usize << pa.len();
            if entry.table.len() != expected {
                return Err(ModelError::TableSize { node: name.to_string(), expected, got: entry.table.len() });
            }
            let mut table = vec![f64::NAN; expected];
            for (key, &value) in &entry.table {
                if key.len() != given.len() || !key.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(bad(format!("bad configuration key `{key}`")));
                }
                let mut k = 0usize;
                for (pos, b) in key.bytes().enumerate() {
                    if b == b'1' {
                        let j = pa.iter().position(|&p| p == given[pos]).expect("parent sets match");
                        k |= 1 << j;
                    }
                }
                table[k] = value;
            }
            if table.iter().any(|x| x.is_nan()) {
                return Err(bad("duplicate configuration keys".to_string()));
            }
            tables.push(table);
        }
        for name in json.0.keys() {
            dag.index(name)?;
        }
        CbnParams::new(dag, tables)
    }
}

/// JSON form: `{"Y": {"parents": ["X", "Z"], "table": {"00": 0.4, "10": 0.8, ...}}}`
/// where character `i` of a key is the value of `parents[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson(pub BTreeMap<String, NodeTableJson>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTableJson {
    pub parents: Vec<String>,
    pub table: BTreeMap<String, f64>,
}

fn on_grid(value: f64) -> bool {
    ((value * 100.0).round() - value * 100.0).abs() < 1e-9
}

/// Index into a node's table for the parent values found in `world`.
pub fn config_index(parents: NodeSet, world: u8) -> usize {
    parents
        .iter()
        .enumerate()
        .fold(0, |k, (j, p)| k | (((world >> p) & 1) as usize) << j)
}

/// Parent assignment encoded by table index `k`.
pub fn parent_assignment(parents: NodeSet, k: usize) -> Assignment {
    parents
        .iter()
        .enumerate()
        .fold(Assignment::empty(), |a, (j, p)| a.with(p, ((k >> j) & 1) as u8))
}

/// A graph together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cbn {
    dag: Dag,
    params: CbnParams,
}

impl Cbn {
    pub fn new(dag: Dag, params: CbnParams) -> Result<Self, ModelError> {
        for v in 0..dag.len() {
            let expected = 1 << dag.parents(v).len();
            if params.tables.get(v).map(Vec::len) != Some(expected) {
                return Err(ModelError::TableSize {
                    node: dag.name(v).to_string(),
                    expected,
                    got: params.tables.get(v).map_or(0, Vec::len),
                });
            }
        }
        Ok(Cbn { dag, params })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn params(&self) -> &CbnParams {
        &self.params
    }

    fn worlds(&self) -> std::ops::Range<u16> {
        0..(1u16 << self.dag.len())
    }

    /// Probability of a full assignment.
    pub fn joint(&self, full: Assignment) -> Result<f64, ModelError> {
        let missing = self.dag.all().minus(full.mask());
        if !missing.is_empty() {
            return Err(ModelError::Incomplete(self.dag.names(missing).join(", ")));
        }
        Ok(self.weight(full.values, Assignment::empty()))
    }

    /// Truncated-factorization weight of `world` under intervention `act`.
    fn weight(&self, world: u8, act: Assignment) -> f64 {
        if !act.matches(world) {
            return 0.0;
        }
        let mut p = 1.0;
        for v in 0..self.dag.len() {
            if act.mask().contains(v) {
                continue;
            }
            let t = self.params.theta(v, world);
            p *= if world >> v & 1 == 1 { t } else { 1.0 - t };
        }
        p
    }

    /// The full distribution under `act` (observational when empty), indexed by world.
    pub fn distribution(&self, act: Assignment) -> Vec<f64> {
        self.worlds().map(|w| self.weight(w as u8, act)).collect()
    }

    fn conditional(&self, dist: &[f64], event: Event, given: Option<Event>) -> Result<f64, ModelError> {
        let given = given.unwrap_or_default();
        let Some(both) = event.and(given) else {
            // Contradictory literals; still reject a null conditioning event.
            let pg = compensated_sum(mass(dist, given));
            return if pg > 0.0 { Ok(0.0) } else { Err(ModelError::ZeroProbability) };
        };
        let num = compensated_sum(mass(dist, both));
        if given.is_empty() {
            return Ok(num);
        }
        let den = compensated_sum(mass(dist, given));
        if den <= 0.0 {
            return Err(ModelError::ZeroProbability);
        }
        Ok(num / den)
    }

    /// `P(event | given)` by enumeration.
    pub fn prob(&self, event: Event, given: Option<Event>) -> Result<f64, ModelError> {
        self.conditional(&self.distribution(Assignment::empty()), event, given)
    }

    /// `P(event | do(act))` by truncated factorization.
    pub fn interventional_prob(&self, act: Assignment, event: Event) -> Result<f64, ModelError> {
        self.conditional(&self.distribution(act), event, None)
    }

    /// `P(event | do(act), given)`.
    pub fn interventional_cond(&self, act: Assignment, event: Event, given: Option<Event>) -> Result<f64, ModelError> {
        self.conditional(&self.distribution(act), event, given)
    }

    /// `E[1{V=1}]` convenience for a single node.
    pub fn marginal(&self, v: usize) -> f64 {
        self.prob(Assignment::of(v, 1), None).expect("unconditional probability")
    }
}

fn mass(dist: &[f64], event: Event) -> impl Iterator<Item = f64> + '_ {
    dist.iter()
        .enumerate()
        .filter(move |(w, _)| event.matches(*w as u8))
        .map(|(_, &p)| p)
}

/// One cell of the exogenous box: the index of each node's threshold cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unit {
    /// For each node, the parent configurations (table indices) under which
    /// the node takes value 1, as a bitmask over table indices.
    response: [u16; crate::graph::MAX_NODES],
}

impl Unit {
    /// Values of all nodes when `act` is imposed.
    pub fn solve(&self, cbn: &Cbn, act: Assignment) -> u8 {
        let mut world = 0u8;
        for &v in cbn.dag.topo_order() {
            let value = match act.get(v) {
                Some(x) => x,
                None => {
                    let k = config_index(cbn.dag.parents(v), world);
                    (self.response[v] >> k & 1) as u8
                }
            };
            world |= value << v;
        }
        world
    }

    /// Values of all nodes when each intervened node is set from a closure over
    /// the unit. Used for nested counterfactuals such as `Y_{x, M_{x'}}`.
    pub fn solve_with(&self, cbn: &Cbn, clamp: &dyn Fn(usize) -> Option<u8>) -> u8 {
        let mut world = 0u8;
        for &v in cbn.dag.topo_order() {
            let value = match clamp(v) {
                Some(x) => x,
                None => {
                    let k = config_index(cbn.dag.parents(v), world);
                    (self.response[v] >> k & 1) as u8
                }
            };
            world |= value << v;
        }
        world
    }
}

/// Canonical monotone threshold structural model over a [`Cbn`].
#[derive(Debug, Clone)]
pub struct Scm {
    cbn: Cbn,
    units: Vec<(f64, Unit)>,
}

impl Scm {
    pub fn new(cbn: Cbn) -> Self {
        let n = cbn.dag.len();
        // Per node: cells (length, response mask) between consecutive thresholds.
        let mut per_node: Vec<Vec<(f64, u16)>> = Vec::with_capacity(n);
        for v in 0..n {
            let table = cbn.params.table(v);
            let mut cuts: Vec<f64> = table.iter().copied().chain([0.0, 1.0]).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let cells = cuts
                .windows(2)
                .map(|w| {
                    let (lo, hi) = (w[0], w[1]);
                    // On (lo, hi], U <= theta iff theta >= hi.
                    let response = table
                        .iter()
                        .enumerate()
                        .filter(|(_, &t)| t >= hi)
                        .fold(0u16, |m, (k, _)| m | 1 << k);
                    (hi - lo, response)
                })
                .filter(|&(len, _)| len > 0.0)
                .collect();
            per_node.push(cells);
        }
        let mut units = vec![(1.0, Unit { response: [0; crate::graph::MAX_NODES] })];
        for (v, cells) in per_node.iter().enumerate() {
            let mut next = Vec::with_capacity(units.len() * cells.len());
            for &(w, unit) in &units {
                for &(len, response) in cells {
                    let mut u = unit;
                    u.response[v] = response;
                    next.push((w * len, u));
                }
            }
            units = next;
        }
        Scm { cbn, units }
    }

    pub fn cbn(&self) -> &Cbn {
        &self.cbn
    }

    /// Exogenous cells with their probability mass.
    pub fn units(&self) -> &[(f64, Unit)] {
        &self.units
    }

    /// `P(target under do(act) | evidence in the factual world)`.
    pub fn counterfactual_prob(&self, evidence: Event, act: Assignment, target: Event) -> Result<f64, ModelError> {
        self.expectation(evidence, |u| {
            let w = u.solve(&self.cbn, act);
            if target.matches(w) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `E[f(unit) | evidence]` over the exogenous distribution.
    pub fn expectation(&self, evidence: Event, f: impl Fn(&Unit) -> f64) -> Result<f64, ModelError> {
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (w, u) in &self.units {
            let factual = u.solve(&self.cbn, Assignment::empty());
            if evidence.matches(factual) {
                den.push(*w);
                num.push(w * f(u));
            }
        }
        let den = compensated_sum(den);
        if den <= 0.0 {
            return Err(ModelError::ZeroProbability);
        }
        Ok(compensated_sum(num) / den)
    }
}

/// Parameters with every entry uniform on `{0.01, ..., 0.99}`.
pub fn sample_params<R: Rng + ?Sized>(rng: &mut R, dag: &Dag) -> CbnParams {
    CbnParams::from_fn(dag, |_, _| rng.random_range(1..=99u32) as f64 / 100.0).expect("grid values are valid")
}

/// Rejection sampling of parameters satisfying `accept`, at most `budget` draws.
pub fn sample_params_where<R: Rng + ?Sized>(
    rng: &mut R,
    dag: &Dag,
    budget: usize,
    mut accept: impl FnMut(&CbnParams) -> bool,
) -> Result<CbnParams, ModelError> {
    for _ in 0..budget {
        let params = sample_params(rng, dag);
        if accept(&params) {
            return Ok(params);
        }
    }
    Err(ModelError::BudgetExhausted(budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, GraphName, Node, Role};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn confounding() -> Cbn {
        let spec = catalog(GraphName::Confounding);
        let json = r#"{
            "Z": {"parents": [], "table": {"": 0.5}},
            "X": {"parents": ["Z"], "table": {"0": 0.3, "1": 0.7}},
            "Y": {"parents": ["X", "Z"], "table": {"00": 0.4, "10": 0.8, "01": 0.2, "11": 0.6}}
        }"#;
        let params = CbnParams::from_json(&spec.dag, &serde_json::from_str(json).unwrap()).unwrap();
        Cbn::new(spec.dag, params).unwrap()
    }

    fn ev(cbn: &Cbn, lits: &[(&str, u8)]) -> Assignment {
        Assignment::from_names(cbn.dag(), lits).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn joint_examples() {
        let m = confounding();
        assert!(close(m.joint(ev(&m, &[("Z", 1), ("X", 1), ("Y", 1)])).unwrap(), 0.21));
        assert!(close(m.joint(ev(&m, &[("Z", 0), ("X", 0), ("Y", 0)])).unwrap(), 0.21));
        let total = compensated_sum(m.distribution(Assignment::empty()));
        assert!(close(total, 1.0));
        assert!(matches!(m.joint(ev(&m, &[("Z", 1)])), Err(ModelError::Incomplete(s)) if s == "X, Y"));
    }

    #[test]
    fn prob_examples() {
        let m = confounding();
        let y1 = ev(&m, &[("Y", 1)]);
        assert!(close(m.prob(y1, None).unwrap(), 0.50));
        assert!(close(m.prob(y1, Some(ev(&m, &[("X", 1)]))).unwrap(), 0.66));
        assert!(close(m.prob(y1, Some(ev(&m, &[("X", 0)]))).unwrap(), 0.34));
        let z1 = ev(&m, &[("Z", 1)]);
        assert!(close(m.prob(z1, Some(z1)).unwrap(), 1.0));
    }

    #[test]
    fn interventional_examples() {
        let m = confounding();
        let y1 = ev(&m, &[("Y", 1)]);
        assert!(close(m.interventional_prob(ev(&m, &[("X", 1)]), y1).unwrap(), 0.70));
        assert!(close(m.interventional_prob(ev(&m, &[("X", 0)]), y1).unwrap(), 0.30));
        let x1 = ev(&m, &[("X", 1)]);
        assert!(close(m.interventional_prob(x1, x1).unwrap(), 1.0));
    }

    #[test]
    fn zero_probability_conditioning() {
        let spec = catalog(GraphName::Chain);
        let params = CbnParams::from_fn(&spec.dag, |v, _| if v == 0 { 0.0 } else { 0.5 }).unwrap();
        let m = Cbn::new(spec.dag, params).unwrap();
        let x1 = ev(&m, &[("X", 1)]);
        assert_eq!(m.prob(ev(&m, &[("Y", 1)]), Some(x1)), Err(ModelError::ZeroProbability));
    }

    fn single_edge() -> Scm {
        let dag = Dag::new(vec![Node::new("X", Role::Treatment), Node::new("Y", Role::Outcome)], &[("X", "Y")]).unwrap();
        let params = CbnParams::new(&dag, vec![vec![0.5], vec![0.3, 0.9]]).unwrap();
        Scm::new(Cbn::new(dag, params).unwrap())
    }

    #[test]
    fn counterfactual_examples() {
        let scm = single_edge();
        let d = scm.cbn().dag().clone();
        let a = |l: &[(&str, u8)]| Assignment::from_names(&d, l).unwrap();
        let p = scm.counterfactual_prob(a(&[("X", 0), ("Y", 1)]), a(&[("X", 1)]), a(&[("Y", 1)])).unwrap();
        assert!(close(p, 1.0));
        let p = scm.counterfactual_prob(a(&[("X", 1), ("Y", 0)]), a(&[("X", 0)]), a(&[("Y", 1)])).unwrap();
        assert!(close(p, 0.0));
        let p = scm.counterfactual_prob(a(&[("X", 0), ("Y", 1)]), a(&[("X", 0)]), a(&[("Y", 1)])).unwrap();
        assert!(close(p, 1.0));
    }

    #[test]
    fn units_reproduce_observational_distribution() {
        let m = confounding();
        let scm = Scm::new(m.clone());
        let mut dist = [0.0; 8];
        for (w, u) in scm.units() {
            dist[u.solve(&m, Assignment::empty()) as usize] += w;
        }
        for (a, b) in dist.iter().zip(m.distribution(Assignment::empty())) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = confounding();
        let json = m.params().to_json(m.dag());
        let text = serde_json::to_string(&json).unwrap();
        let back = CbnParams::from_json(m.dag(), &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(&back, m.params());

        let mut bad = json.clone();
        bad.0.get_mut("X").unwrap().table.insert("1".into(), 1.5);
        assert!(matches!(CbnParams::from_json(m.dag(), &bad), Err(ModelError::OutOfRange { .. })));

        let mut bad = json.clone();
        bad.0.get_mut("Y").unwrap().parents = vec!["X".into()];
        assert!(matches!(CbnParams::from_json(m.dag(), &bad), Err(ModelError::BadTable { .. })));

        let mut bad = json;
        bad.0.remove("Z");
        assert_eq!(CbnParams::from_json(m.dag(), &bad), Err(ModelError::MissingTable("Z".into())));
    }

    #[test]
    fn sampling_is_deterministic_and_on_grid() {
        let dag = catalog(GraphName::Chain).dag;
        let a = sample_params(&mut ChaCha8Rng::seed_from_u64(42), &dag);
        let b = sample_params(&mut ChaCha8Rng::seed_from_u64(42), &dag);
        assert_eq!(a, b);
        a.check_grid(&dag).unwrap();
        for v in 0..dag.len() {
            assert!(a.table(v).iter().all(|&t| (0.01..=0.99).contains(&t)));
        }
        let err = sample_params_where(&mut ChaCha8Rng::seed_from_u64(1), &dag, 10, |_| false);
        assert_eq!(err, Err(ModelError::BudgetExhausted(10)));
    }
}
