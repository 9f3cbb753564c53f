//! Causal inference over small binary causal Bayesian networks.
//!
//! The crate covers the whole pipeline: a catalog of treatment-outcome
//! graphs ([`graph`]), exact observational, interventional and
//! counterfactual semantics ([`model`]), the query taxonomy ([`query`]),
//! identification with an independent brute-force check ([`engine`]),
//! natural-language rendering ([`verbalize`]), benchmark generation
//! ([`dataset`]) and a chain-of-thought evaluation harness ([`evalharness`]).

pub mod graph;
pub mod model;
pub mod query;
pub mod engine;
pub mod verbalize;
pub mod dataset;
pub mod evalharness;

pub use graph::{catalog, CgteSpec, Dag, GraphName, NodeSet};
pub use model::{Assignment, Cbn, CbnParams, Event, Scm};
pub use query::{Answer, Direction, QueryInstance, QueryType};
