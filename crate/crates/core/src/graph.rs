//! Small directed acyclic graphs over at most four binary variables.
//!
//! Nodes are addressed by index internally; [`NodeSet`] is a bitmask over
//! those indices. Name-based helpers are provided for the public surface.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on graph size.
pub const MAX_NODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node names must be nonempty")]
    EmptyName,
    #[error("graph has {0} nodes, at most {MAX_NODES} are supported")]
    TooManyNodes(usize),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("node sets must be pairwise disjoint (overlap on {0})")]
    Overlap(String),
    #[error("unknown catalog graph `{name}`; valid keys: {valid}")]
    UnknownCatalogGraph { name: String, valid: String },
    #[error("invalid treatment/outcome specification: {0}")]
    InvalidCgte(String),
}

/// Bitmask over node indices of one [`Dag`].
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u8);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u8) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn single(i: usize) -> Self {
        debug_assert!(i < 8);
        NodeSet(1 << i)
    }

    pub fn full(n: usize) -> Self {
        NodeSet(((1u16 << n) - 1) as u8)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        NodeSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn minus(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |&i| self.contains(i))
    }

    /// All subsets of `self`, ordered by size and then by bitmask.
    pub fn subsets(self) -> Vec<NodeSet> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut sub = self.0;
        loop {
            out.push(NodeSet(sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.0;
        }
        out.sort_by_key(|s| (s.len(), s.0));
        out
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Treatment,
    Outcome,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub name: String,
    pub role: Role,
}

impl Node {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        Node { name: name.into(), role }
    }
}

/// Parents, children, ancestors and descendants of one node. None contain
/// the node itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relatives {
    pub parents: NodeSet,
    pub children: NodeSet,
    pub ancestors: NodeSet,
    pub descendants: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<Node>,
    parents: Vec<NodeSet>,
    topo: Vec<usize>,
}

impl Dag {
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        if nodes.len() > MAX_NODES {
            return Err(GraphError::TooManyNodes(nodes.len()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.name.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if nodes[..i].iter().any(|m| m.name == n.name) {
                return Err(GraphError::DuplicateNode(n.name.clone()));
            }
        }
        let lookup = |name: &str| {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
        };
        let mut parents = vec![NodeSet::EMPTY; nodes.len()];
        for &(from, to) in edges {
            let (a, b) = (lookup(from)?, lookup(to)?);
            if a == b {
                return Err(GraphError::SelfLoop(from.to_string()));
            }
            if parents[b].contains(a) {
                return Err(GraphError::DuplicateEdge(from.to_string(), to.to_string()));
            }
            parents[b].insert(a);
        }
        Self::from_parents(nodes, parents)
    }

    fn from_parents(nodes: Vec<Node>, parents: Vec<NodeSet>) -> Result<Self, GraphError> {
        // Kahn's algorithm, smallest index first for a stable order.
        let n = nodes.len();
        let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
        let mut topo = Vec::with_capacity(n);
        let mut done = NodeSet::EMPTY;
        while topo.len() < n {
            let next = (0..n).find(|&i| !done.contains(i) && indegree[i] == 0);
            let Some(v) = next else {
                return Err(GraphError::Cyclic);
            };
            done.insert(v);
            topo.push(v);
            for c in 0..n {
                if parents[c].contains(v) {
                    indegree[c] -= 1;
                }
            }
        }
        Ok(Dag { nodes, parents, topo })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn all(&self) -> NodeSet {
        NodeSet::full(self.len())
    }

    pub fn index(&self, name: &str) -> Result<usize, GraphError> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn set(&self, names: &[&str]) -> Result<NodeSet, GraphError> {
        names.iter().map(|n| self.index(n)).collect()
    }

    pub fn names(&self, set: NodeSet) -> Vec<&str> {
        set.iter().map(|i| self.name(i)).collect()
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn parents(&self, v: usize) -> NodeSet {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> NodeSet {
        (0..self.len()).filter(|&c| self.parents[c].contains(v)).collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    /// Edges as `(cause, effect)` index pairs, ordered by cause then effect.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.children(a).iter() {
                out.push((a, b));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Strict ancestors of every node in `set`, plus `set` itself.
    pub fn ancestral_closure(&self, set: NodeSet) -> NodeSet {
        let mut out = set;
        let mut stack: Vec<usize> = set.iter().collect();
        while let Some(v) = stack.pop() {
            for p in self.parents[v].iter() {
                if !out.contains(p) {
                    out.insert(p);
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Strict descendants of every node in `set`, plus `set` itself.
    pub fn descendant_closure(&self, set: NodeSet) -> NodeSet {
        let mut out = set;
        let mut stack: Vec<usize> = set.iter().collect();
        while let Some(v) = stack.pop() {
            for c in self.children(v).iter() {
                if !out.contains(c) {
                    out.insert(c);
                    stack.push(c);
                }
            }
        }
        out
    }

    pub fn ancestors(&self, v: usize) -> NodeSet {
        self.ancestral_closure(NodeSet::single(v)).without(v)
    }

    pub fn descendants(&self, v: usize) -> NodeSet {
        self.descendant_closure(NodeSet::single(v)).without(v)
    }

    pub fn relatives(&self, v: &str) -> Result<Relatives, GraphError> {
        let i = self.index(v)?;
        Ok(Relatives {
            parents: self.parents(i),
            children: self.children(i),
            ancestors: self.ancestors(i),
            descendants: self.descendants(i),
        })
    }

    /// d-separation of `a` and `b` given `s`, by the reachability (Bayes-ball)
    /// traversal. Empty `a` or `b` are trivially separated.
    pub fn d_separated(&self, a: NodeSet, b: NodeSet, s: NodeSet) -> Result<bool, GraphError> {
        for (x, y) in [(a, b), (a, s), (b, s)] {
            let overlap = x.intersection(y);
            if !overlap.is_empty() {
                return Err(GraphError::Overlap(self.names(overlap).join(",")));
            }
        }
        if a.is_empty() || b.is_empty() {
            return Ok(true);
        }
        Ok(self.reachable(a, s).intersection(b).is_empty())
    }

    /// Nodes with an active trail from some node in `from` given `given`.
    fn reachable(&self, from: NodeSet, given: NodeSet) -> NodeSet {
        #[derive(Clone, Copy, PartialEq)]
        enum Dir {
            // arrived from a child
            Up,
            // arrived from a parent
            Down,
        }
        let anc_given = self.ancestral_closure(given);
        let mut visited = [[false; 2]; MAX_NODES];
        let mut reach = NodeSet::EMPTY;
        let mut queue: VecDeque<(usize, Dir)> = from.iter().map(|v| (v, Dir::Up)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            let slot = if dir == Dir::Up { 0 } else { 1 };
            if visited[v][slot] {
                continue;
            }
            visited[v][slot] = true;
            if !given.contains(v) {
                reach.insert(v);
            }
            match dir {
                Dir::Up if !given.contains(v) => {
                    for p in self.parents[v].iter() {
                        queue.push_back((p, Dir::Up));
                    }
                    for c in self.children(v).iter() {
                        queue.push_back((c, Dir::Down));
                    }
                }
                Dir::Up => {}
                Dir::Down => {
                    if !given.contains(v) {
                        for c in self.children(v).iter() {
                            queue.push_back((c, Dir::Down));
                        }
                    }
                    if anc_given.contains(v) {
                        for p in self.parents[v].iter() {
                            queue.push_back((p, Dir::Up));
                        }
                    }
                }
            }
        }
        reach
    }

    /// Copy with every edge pointing into `targets` removed.
    pub fn mutilate(&self, targets: NodeSet) -> Dag {
        let parents = self
            .parents
            .iter()
            .enumerate()
            .map(|(v, &p)| if targets.contains(v) { NodeSet::EMPTY } else { p })
            .collect();
        Dag::from_parents(self.nodes.clone(), parents).expect("edge deletion keeps a DAG acyclic")
    }

    /// Copy with every edge leaving `sources` removed.
    pub fn remove_outgoing(&self, sources: NodeSet) -> Dag {
        let parents = self.parents.iter().map(|&p| p.minus(sources)).collect();
        Dag::from_parents(self.nodes.clone(), parents).expect("edge deletion keeps a DAG acyclic")
    }
}

/// Keys of the built-in graph catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphName {
    Chain,
    Collision,
    Fork,
    Confounding,
    Mediation,
    Diamond,
    DiamondCut,
    Iv,
    Arrowhead,
    Frontdoor,
}

impl GraphName {
    pub const ALL: [GraphName; 10] = [
        GraphName::Chain,
        GraphName::Collision,
        GraphName::Fork,
        GraphName::Confounding,
        GraphName::Mediation,
        GraphName::Diamond,
        GraphName::DiamondCut,
        GraphName::Iv,
        GraphName::Arrowhead,
        GraphName::Frontdoor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphName::Chain => "chain",
            GraphName::Collision => "collision",
            GraphName::Fork => "fork",
            GraphName::Confounding => "confounding",
            GraphName::Mediation => "mediation",
            GraphName::Diamond => "diamond",
            GraphName::DiamondCut => "diamondcut",
            GraphName::Iv => "IV",
            GraphName::Arrowhead => "arrowhead",
            GraphName::Frontdoor => "frontdoor",
        }
    }
}

impl fmt::Display for GraphName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphName {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphName::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| GraphError::UnknownCatalogGraph {
                name: s.to_string(),
                valid: GraphName::ALL.map(|g| g.as_str()).join(", "),
            })
    }
}

impl Serialize for GraphName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GraphName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A causal graph with a designated treatment-outcome pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgteSpec {
    pub name: GraphName,
    pub dag: Dag,
    pub treatment: usize,
    pub outcome: usize,
    pub unobserved: NodeSet,
    /// Nodes on a directed treatment -> outcome path.
    pub mediators: NodeSet,
    /// Observed instrument for the treatment, if the graph is an IV design.
    pub instrument: Option<usize>,
}

impl CgteSpec {
    pub fn new(
        name: GraphName,
        dag: Dag,
        treatment: usize,
        outcome: usize,
        unobserved: NodeSet,
        instrument: Option<usize>,
    ) -> Result<Self, GraphError> {
        let bad = |msg: &str| Err(GraphError::InvalidCgte(msg.to_string()));
        if treatment == outcome {
            return bad("treatment equals outcome");
        }
        if treatment >= dag.len() || outcome >= dag.len() {
            return bad("treatment or outcome out of range");
        }
        if unobserved.contains(treatment) || unobserved.contains(outcome) {
            return bad("treatment and outcome must be observed");
        }
        if !unobserved.is_subset(dag.all()) {
            return bad("unobserved nodes outside the graph");
        }
        if let Some(z) = instrument {
            if unobserved.contains(z) || z == treatment || z == outcome {
                return bad("instrument must be an observed non-treatment, non-outcome node");
            }
        }
        let mediators = dag
            .descendants(treatment)
            .intersection(dag.ancestors(outcome));
        Ok(CgteSpec { name, dag, treatment, outcome, unobserved, mediators, instrument })
    }

    pub fn observed(&self) -> NodeSet {
        self.dag.all().minus(self.unobserved)
    }

    pub fn is_markovian(&self) -> bool {
        self.unobserved.is_empty()
    }

    /// Common causes of treatment and outcome.
    pub fn confounders(&self) -> NodeSet {
        self.dag
            .ancestors(self.treatment)
            .intersection(self.dag.ancestors(self.outcome))
            .minus(self.dag.descendants(self.treatment))
    }

    /// Nodes with both treatment and outcome among their parents.
    pub fn colliders(&self) -> NodeSet {
        (0..self.dag.len())
            .filter(|&v| {
                let p = self.dag.parents(v);
                p.contains(self.treatment) && p.contains(self.outcome)
            })
            .collect()
    }

    pub fn treatment_name(&self) -> &str {
        self.dag.name(self.treatment)
    }

    pub fn outcome_name(&self) -> &str {
        self.dag.name(self.outcome)
    }

    pub fn to_json(&self) -> CatalogJson {
        CatalogJson {
            name: self.name,
            nodes: self
                .dag
                .nodes()
                .iter()
                .map(|n| CatalogNode { id: n.name.clone(), role: n.role })
                .collect(),
            edges: self
                .dag
                .edges()
                .into_iter()
                .map(|(a, b)| [self.dag.name(a).to_string(), self.dag.name(b).to_string()])
                .collect(),
            unobserved: self.dag.names(self.unobserved).into_iter().map(String::from).collect(),
        }
    }

    pub fn from_json(json: &CatalogJson) -> Result<Self, GraphError> {
        let nodes = json.nodes.iter().map(|n| Node::new(n.id.clone(), n.role)).collect();
        let edges: Vec<(&str, &str)> =
            json.edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let dag = Dag::new(nodes, &edges)?;
        let find_role = |role: Role| {
            let mut it = dag.nodes().iter().enumerate().filter(|(_, n)| n.role == role);
            match (it.next(), it.next()) {
                (Some((i, _)), None) => Ok(i),
                _ => Err(GraphError::InvalidCgte(format!("expected exactly one {role:?} node"))),
            }
        };
        let treatment = find_role(Role::Treatment)?;
        let outcome = find_role(Role::Outcome)?;
        let unobserved = dag.set(&json.unobserved.iter().map(String::as_str).collect::<Vec<_>>())?;
        // The instrument is not part of the interchange format; it is
        // recovered from the catalog entry of the same name.
        let instrument = catalog(json.name).instrument;
        CgteSpec::new(json.name, dag, treatment, outcome, unobserved, instrument)
    }
}

/// Interchange form of a catalog entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogJson {
    pub name: GraphName,
    pub nodes: Vec<CatalogNode>,
    pub edges: Vec<[String; 2]>,
    pub unobserved: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogNode {
    pub id: String,
    pub role: Role,
}

/// The canonical treatment-outcome graph for a catalog key.
pub fn catalog(name: GraphName) -> CgteSpec {
    use Role::*;
    let (nodes, edges, unobserved, instrument): (&[(&str, Role)], &[(&str, &str)], &[&str], Option<&str>) =
        match name {
            GraphName::Chain => (&[("X", Treatment), ("M", Other), ("Y", Outcome)], &[("X", "M"), ("M", "Y")], &[], None),
            GraphName::Collision => (&[("X", Treatment), ("Y", Outcome), ("C", Other)], &[("X", "C"), ("Y", "C")], &[], None),
            GraphName::Fork => (&[("X", Treatment), ("Z", Other), ("Y", Outcome)], &[("Z", "Y"), ("X", "Y")], &[], None),
            GraphName::Confounding => (
                &[("Z", Other), ("X", Treatment), ("Y", Outcome)],
                &[("Z", "X"), ("Z", "Y"), ("X", "Y")],
                &[],
                None,
            ),
            GraphName::Mediation => (
                &[("X", Treatment), ("M", Other), ("Y", Outcome)],
                &[("X", "M"), ("M", "Y"), ("X", "Y")],
                &[],
                None,
            ),
            GraphName::Diamond => (
                &[("X", Treatment), ("A", Other), ("B", Other), ("Y", Outcome)],
                &[("X", "A"), ("X", "B"), ("A", "Y"), ("B", "Y")],
                &[],
                None,
            ),
            GraphName::DiamondCut => (
                &[("Z", Other), ("X", Treatment), ("B", Other), ("Y", Outcome)],
                &[("Z", "X"), ("Z", "B"), ("X", "Y"), ("B", "Y")],
                &[],
                None,
            ),
            GraphName::Iv => (
                &[("Z", Other), ("U", Other), ("X", Treatment), ("Y", Outcome)],
                &[("Z", "X"), ("U", "X"), ("U", "Y"), ("X", "Y")],
                &["U"],
                Some("Z"),
            ),
            GraphName::Arrowhead => (
                &[("X", Treatment), ("U", Other), ("M", Other), ("Y", Outcome)],
                &[("X", "M"), ("X", "Y"), ("M", "Y"), ("U", "M"), ("U", "Y")],
                &["U"],
                None,
            ),
            GraphName::Frontdoor => (
                &[("U", Other), ("X", Treatment), ("M", Other), ("Y", Outcome)],
                &[("U", "X"), ("U", "Y"), ("X", "M"), ("M", "Y")],
                &["U"],
                None,
            ),
        };
    let dag = Dag::new(nodes.iter().map(|&(n, r)| Node::new(n, r)).collect(), edges)
        .expect("catalog graphs are valid");
    let treatment = dag.index("X").expect("catalog treatment");
    let outcome = dag.index("Y").expect("catalog outcome");
    let unobserved = dag.set(unobserved).expect("catalog unobserved");
    let instrument = instrument.map(|z| dag.index(z).expect("catalog instrument"));
    CgteSpec::new(name, dag, treatment, outcome, unobserved, instrument).expect("catalog entry is valid")
}

/// Name-based catalog lookup.
pub fn catalog_by_name(name: &str) -> Result<CgteSpec, GraphError> {
    Ok(catalog(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(dag: &Dag, s: NodeSet) -> Vec<&str> {
        dag.names(s)
    }

    #[test]
    fn relatives_on_small_graphs() {
        let chain = catalog(GraphName::Chain).dag;
        let r = chain.relatives("M").unwrap();
        assert_eq!(names(&chain, r.parents), ["X"]);
        assert_eq!(names(&chain, r.children), ["Y"]);
        assert_eq!(names(&chain, r.descendants), ["Y"]);

        let conf = catalog(GraphName::Confounding).dag;
        let r = conf.relatives("Z").unwrap();
        assert_eq!(names(&conf, r.descendants), ["X", "Y"]);

        let coll = catalog(GraphName::Collision).dag;
        assert!(coll.relatives("C").unwrap().descendants.is_empty());
    }

    #[test]
    fn relatives_unknown_node() {
        let chain = catalog(GraphName::Chain).dag;
        assert_eq!(chain.relatives("Q"), Err(GraphError::UnknownNode("Q".into())));
    }

    #[test]
    fn d_separation_examples() {
        let chain = catalog(GraphName::Chain).dag;
        let s = |n: &[&str]| chain.set(n).unwrap();
        assert!(chain.d_separated(s(&["X"]), s(&["Y"]), s(&["M"])).unwrap());
        assert!(!chain.d_separated(s(&["X"]), s(&["Y"]), NodeSet::EMPTY).unwrap());

        let coll = catalog(GraphName::Collision).dag;
        let s = |n: &[&str]| coll.set(n).unwrap();
        assert!(coll.d_separated(s(&["X"]), s(&["Y"]), NodeSet::EMPTY).unwrap());
        assert!(!coll.d_separated(s(&["X"]), s(&["Y"]), s(&["C"])).unwrap());

        let conf = catalog(GraphName::Confounding).dag;
        let s = |n: &[&str]| conf.set(n).unwrap();
        assert!(!conf.d_separated(s(&["X"]), s(&["Y"]), NodeSet::EMPTY).unwrap());
    }

    #[test]
    fn d_separation_descendant_of_collider_opens_path() {
        let dag = Dag::new(
            vec![
                Node::new("X", Role::Treatment),
                Node::new("Y", Role::Outcome),
                Node::new("C", Role::Other),
                Node::new("D", Role::Other),
            ],
            &[("X", "C"), ("Y", "C"), ("C", "D")],
        )
        .unwrap();
        let s = |n: &[&str]| dag.set(n).unwrap();
        assert!(!dag.d_separated(s(&["X"]), s(&["Y"]), s(&["D"])).unwrap());
        assert!(dag.d_separated(s(&["X"]), s(&["Y"]), NodeSet::EMPTY).unwrap());
    }

    #[test]
    fn d_separation_rejects_overlap() {
        let chain = catalog(GraphName::Chain).dag;
        let x = chain.set(&["X"]).unwrap();
        assert!(matches!(chain.d_separated(x, x, NodeSet::EMPTY), Err(GraphError::Overlap(_))));
    }

    #[test]
    fn mutilate_examples() {
        let conf = catalog(GraphName::Confounding);
        let m = conf.dag.mutilate(NodeSet::single(conf.treatment));
        let edges: Vec<_> = m.edges().into_iter().map(|(a, b)| (m.name(a), m.name(b))).collect();
        assert_eq!(edges, [("Z", "Y"), ("X", "Y")]);

        let chain = catalog(GraphName::Chain);
        let m = chain.dag.mutilate(NodeSet::single(chain.outcome));
        assert_eq!(m.edge_count(), 1);
        assert!(m.has_edge(0, 1));

        assert_eq!(chain.dag.mutilate(NodeSet::EMPTY), chain.dag);
    }

    #[test]
    fn dag_rejects_cycles_and_self_loops() {
        let nodes = || vec![Node::new("A", Role::Other), Node::new("B", Role::Other)];
        assert_eq!(Dag::new(nodes(), &[("A", "B"), ("B", "A")]), Err(GraphError::Cyclic));
        assert_eq!(Dag::new(nodes(), &[("A", "A")]), Err(GraphError::SelfLoop("A".into())));
        assert!(matches!(Dag::new(nodes(), &[("A", "Q")]), Err(GraphError::UnknownNode(_))));
    }

    #[test]
    fn catalog_examples() {
        let fd = catalog(GraphName::Frontdoor);
        let edges: Vec<_> = fd.dag.edges().into_iter().map(|(a, b)| (fd.dag.name(a), fd.dag.name(b))).collect();
        assert_eq!(edges, [("U", "X"), ("U", "Y"), ("X", "M"), ("M", "Y")]);
        assert_eq!(fd.dag.names(fd.unobserved), ["U"]);

        let conf = catalog(GraphName::Confounding);
        assert_eq!(conf.dag.edge_count(), 3);
        assert!(conf.unobserved.is_empty());

        let coll = catalog(GraphName::Collision);
        assert_eq!(coll.treatment_name(), "X");
        assert_eq!(coll.outcome_name(), "Y");
        assert_eq!(coll.dag.names(coll.colliders()), ["C"]);
    }

    #[test]
    fn catalog_unknown_key_lists_valid_names() {
        let err = catalog_by_name("square").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frontdoor") && msg.contains("diamondcut"), "{msg}");
    }

    #[test]
    fn catalog_json_round_trip() {
        for g in GraphName::ALL {
            let spec = catalog(g);
            let json = serde_json::to_string(&spec.to_json()).unwrap();
            let back: CatalogJson = serde_json::from_str(&json).unwrap();
            assert_eq!(CgteSpec::from_json(&back).unwrap(), spec);
        }
        let text = serde_json::to_string(&catalog(GraphName::Iv).to_json()).unwrap();
        assert!(text.starts_with(r#"{"name":"IV","nodes":[{"id":"Z","role":"other"}"#), "{text}");
    }

    #[test]
    fn mediators_lie_on_directed_paths() {
        for g in GraphName::ALL {
            let spec = catalog(g);
            for m in spec.mediators.iter() {
                assert!(spec.dag.descendants(spec.treatment).contains(m));
                assert!(spec.dag.ancestors(spec.outcome).contains(m));
            }
        }
        assert_eq!(catalog(GraphName::Diamond).mediators.len(), 2);
        assert!(catalog(GraphName::Confounding).mediators.is_empty());
    }

    #[test]
    fn subsets_are_ordered_by_size() {
        let s = NodeSet::from_bits(0b1011);
        let subs = s.subsets();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], NodeSet::EMPTY);
        assert!(subs.windows(2).all(|w| w[0].len() <= w[1].len()));
    }
}
