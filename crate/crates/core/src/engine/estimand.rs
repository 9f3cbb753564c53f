//! Rung-1 expression trees and their evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{CgteSpec, NodeSet};
use crate::model::{compensated_sum, Assignment, Cbn};

use super::EngineError;

/// Value of a literal inside an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Fixed(u8),
    /// Taken from the enclosing summation over this node.
    Bound,
}

/// `P(target = v | given)` over observed nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub target: usize,
    pub target_val: Val,
    pub given: Vec<(usize, Val)>,
}

impl Atom {
    pub fn new(target: usize, target_val: Val, given: &[(usize, Val)]) -> Self {
        Atom { target, target_val, given: given.to_vec() }
    }

    pub fn nodes(&self) -> NodeSet {
        self.given.iter().map(|&(v, _)| v).collect::<NodeSet>().with(self.target)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Atom(Atom),
    /// Sum of `body` over every value combination of `vars`.
    Sum { vars: NodeSet, body: Box<Expr> },
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// A value fixed by graph structure alone, e.g. whether a set is admissible.
    Indicator { label: String, value: f64 },
}

impl Expr {
    pub fn p(target: usize, target_val: Val, given: &[(usize, Val)]) -> Expr {
        Expr::Atom(Atom::new(target, target_val, given))
    }

    pub fn sum(vars: NodeSet, body: Expr) -> Expr {
        if vars.is_empty() {
            body
        } else {
            Expr::Sum { vars, body: Box::new(body) }
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::Const(1.0),
            1 => factors.into_iter().next().expect("one factor"),
            _ => Expr::Mul(factors),
        }
    }

    /// Every atom of the tree.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Atom(a) = e {
                out.push(a);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Sum { body, .. } => body.walk(f),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.walk(f)),
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Const(_) | Expr::Atom(_) | Expr::Indicator { .. } => {}
        }
    }

    /// Fold over the tree with summations expanded.
    fn fold<T>(&self, env: Assignment, leaf: &mut dyn FnMut(&Expr, Assignment) -> Result<T, EngineError>, combine: &dyn Fn(&Expr, Vec<T>) -> Result<T, EngineError>) -> Result<T, EngineError> {
        match self {
            Expr::Const(_) | Expr::Atom(_) | Expr::Indicator { .. } => leaf(self, env),
            Expr::Sum { vars, body } => {
                let nodes: Vec<usize> = vars.iter().collect();
                let mut parts = Vec::with_capacity(1 << nodes.len());
                for k in 0..1usize << nodes.len() {
                    let mut inner = env;
                    for (j, &v) in nodes.iter().enumerate() {
                        inner = inner.with(v, ((k >> j) & 1) as u8);
                    }
                    parts.push(body.fold(inner, leaf, combine)?);
                }
                combine(self, parts)
            }
            Expr::Add(xs) | Expr::Mul(xs) => {
                let parts = xs.iter().map(|x| x.fold(env, leaf, combine)).collect::<Result<_, _>>()?;
                combine(self, parts)
            }
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                let parts = vec![a.fold(env, leaf, combine)?, b.fold(env, leaf, combine)?];
                combine(self, parts)
            }
        }
    }
}

fn resolve(val: Val, node: usize, env: Assignment) -> Result<u8, EngineError> {
    match val {
        Val::Fixed(x) => Ok(x),
        Val::Bound => env.get(node).ok_or(EngineError::UnboundVariable(node)),
    }
}

/// `P(target = 1 | given)`; the key under which a data value is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub target: usize,
    pub given: Assignment,
}

impl TermKey {
    fn of(atom: &Atom, env: Assignment) -> Result<(TermKey, u8), EngineError> {
        let value = resolve(atom.target_val, atom.target, env)?;
        let mut given = Assignment::empty();
        for &(v, val) in &atom.given {
            given = given.with(v, resolve(val, v, env)?);
        }
        Ok((TermKey { target: atom.target, given }, value))
    }

    /// Treatment first, then remaining literals in node order.
    fn ordered_given(&self, cgte: &CgteSpec) -> Vec<(usize, u8)> {
        let mut lits: Vec<(usize, u8)> = self.given.iter().collect();
        lits.sort_by_key(|&(v, _)| (v != cgte.treatment, v));
        lits
    }

    /// E.g. `P(Y=1|X=0,Z=1)`.
    pub fn render(&self, cgte: &CgteSpec) -> String {
        let dag = &cgte.dag;
        let mut s = format!("P({}=1", dag.name(self.target));
        let lits = self.ordered_given(cgte);
        for (i, (v, x)) in lits.into_iter().enumerate() {
            s.push(if i == 0 { '|' } else { ',' });
            let _ = write!(s, "{}={}", dag.name(v), x);
        }
        s.push(')');
        s
    }

    /// Sort key: marginals first, then by target and conditioning values.
    fn order(&self) -> (usize, usize, u8, u8) {
        (self.given.len(), self.target, self.given.mask().bits(), self.given.iter().fold(0, |m, (v, x)| m | x << v))
    }
}

/// Data values keyed by term, in presentation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataTable {
    terms: Vec<(TermKey, f64)>,
    index: BTreeMap<TermKey, usize>,
}

impl DataTable {
    pub fn from_terms(terms: impl IntoIterator<Item = (TermKey, f64)>) -> Self {
        let mut table = DataTable::default();
        for (k, v) in terms {
            table.insert(k, v);
        }
        table
    }

    pub fn insert(&mut self, key: TermKey, value: f64) {
        match self.index.get(&key) {
            Some(&i) => self.terms[i].1 = value,
            None => {
                self.index.insert(key, self.terms.len());
                self.terms.push((key, value));
            }
        }
    }

    /// Exact values of `keys` under the model.
    pub fn from_model(cbn: &Cbn, keys: &[TermKey]) -> Result<Self, EngineError> {
        let mut table = DataTable::default();
        for key in keys {
            let p = cbn.prob(Assignment::of(key.target, 1), (!key.given.is_empty()).then_some(key.given))?;
            table.insert(*key, p);
        }
        Ok(table)
    }

    pub fn get(&self, key: &TermKey) -> Option<f64> {
        self.index.get(key).map(|&i| self.terms[i].1)
    }

    pub fn terms(&self) -> &[(TermKey, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Copy with every value passed through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> DataTable {
        DataTable::from_terms(self.terms.iter().map(|&(k, v)| (k, f(v))))
    }

    /// E.g. `P(Z=1)=0.50; P(Y=1|X=0,Z=0)=0.40`.
    pub fn render(&self, cgte: &CgteSpec) -> String {
        self.terms
            .iter()
            .map(|(k, v)| format!("{}={}", k.render(cgte), format_prob(*v)))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Probability as displayed: two decimals on the 0.01 grid, otherwise three
/// (one decimal as a percentage).
pub fn format_prob(p: f64) -> String {
    if ((p * 100.0).round() - p * 100.0).abs() < 1e-9 {
        format!("{:.2}", p)
    } else {
        format!("{:.3}", p)
    }
}

/// `p` rounded to the precision [`format_prob`] shows.
pub fn displayed_prob(p: f64) -> f64 {
    format_prob(p).parse().expect("formatted float")
}

/// An identifying expression plus human-readable notes and provenance flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimand {
    pub expr: Expr,
    pub notes: Vec<String>,
    pub flags: Vec<String>,
}

impl Estimand {
    pub fn new(expr: Expr) -> Self {
        Estimand { expr, notes: Vec::new(), flags: Vec::new() }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    /// The deduplicated probability terms the expression reads, sorted.
    pub fn required_data(&self) -> Result<Vec<TermKey>, EngineError> {
        let mut keys = Vec::new();
        self.expr.fold(
            Assignment::empty(),
            &mut |e, env| {
                if let Expr::Atom(a) = e {
                    keys.push(TermKey::of(a, env)?.0);
                }
                Ok(())
            },
            &|_, _| Ok(()),
        )?;
        keys.sort_by_key(|k| k.order());
        keys.dedup();
        Ok(keys)
    }

    /// Value using only the terms in `data`.
    pub fn evaluate_with(&self, data: &DataTable) -> Result<f64, EngineError> {
        self.expr.fold(
            Assignment::empty(),
            &mut |e, env| match e {
                Expr::Const(c) => Ok(*c),
                Expr::Indicator { value, .. } => Ok(*value),
                Expr::Atom(a) => {
                    let (key, value) = TermKey::of(a, env)?;
                    let p = data.get(&key).ok_or(EngineError::MissingTerm(key))?;
                    Ok(if value == 1 { p } else { 1.0 - p })
                }
                _ => unreachable!("leaf callback only sees leaves"),
            },
            &|e, parts| match e {
                Expr::Sum { .. } | Expr::Add(_) => Ok(compensated_sum(parts)),
                Expr::Mul(_) => Ok(parts.into_iter().product()),
                Expr::Sub(..) => Ok(parts[0] - parts[1]),
                Expr::Div(..) => {
                    if parts[1] == 0.0 {
                        Err(EngineError::DivisionByZero)
                    } else {
                        Ok(parts[0] / parts[1])
                    }
                }
                _ => unreachable!("combine only sees inner nodes"),
            },
        )
    }

    /// Value with the data read off the model.
    pub fn evaluate(&self, cbn: &Cbn) -> Result<f64, EngineError> {
        let data = DataTable::from_model(cbn, &self.required_data()?)?;
        self.evaluate_with(&data)
    }

    /// Plain-text normal form, e.g. `\sum_{Z} P(Z)*[P(Y=1|X=1,Z) - P(Y=1|X=0,Z)]`.
    pub fn render(&self, cgte: &CgteSpec) -> String {
        render(&self.expr, cgte, false)
    }

    /// The expression with sums expanded and data values substituted.
    pub fn substitute(&self, cgte: &CgteSpec, data: &DataTable) -> Result<String, EngineError> {
        let _ = cgte;
        self.expr.fold(
            Assignment::empty(),
            &mut |e, env| match e {
                Expr::Const(c) => Ok(Piece::atom(format_number(*c))),
                Expr::Indicator { value, .. } => Ok(Piece::atom(format_number(*value))),
                Expr::Atom(a) => {
                    let (key, value) = TermKey::of(a, env)?;
                    let p = data.get(&key).ok_or(EngineError::MissingTerm(key))?;
                    let shown = format_prob(p);
                    Ok(Piece::atom(if value == 1 { shown } else { format!("(1-{shown})") }))
                }
                _ => unreachable!("leaf callback only sees leaves"),
            },
            &|e, parts| {
                Ok(match e {
                    Expr::Sum { .. } | Expr::Add(_) => Piece::sum(parts.into_iter().map(|p| p.text).collect::<Vec<_>>().join(" + ")),
                    Expr::Mul(_) => Piece::atom(parts.into_iter().map(Piece::factor).collect::<Vec<_>>().join("*")),
                    Expr::Sub(..) => {
                        let mut it = parts.into_iter();
                        let (a, b) = (it.next().expect("lhs"), it.next().expect("rhs"));
                        Piece::sum(format!("{} - {}", a.text, b.factor()))
                    }
                    Expr::Div(..) => {
                        let mut it = parts.into_iter();
                        let (a, b) = (it.next().expect("lhs"), it.next().expect("rhs"));
                        Piece::atom(format!("{} / {}", a.factor(), b.factor()))
                    }
                    _ => unreachable!("combine only sees inner nodes"),
                })
            },
        )
        .map(|p| p.text)
    }
}

struct Piece {
    text: String,
    compound: bool,
}

impl Piece {
    fn atom(text: String) -> Self {
        Piece { text, compound: false }
    }

    fn sum(text: String) -> Self {
        Piece { text, compound: true }
    }

    fn factor(self) -> String {
        if self.compound {
            format!("({})", self.text)
        } else {
            self.text
        }
    }
}

fn format_number(x: f64) -> String {
    if x == x.trunc() {
        format!("{}", x as i64)
    } else {
        format!("{:.4}", x)
    }
}

fn render_val(cgte: &CgteSpec, v: usize, val: Val) -> String {
    match val {
        Val::Fixed(x) => format!("{}={}", cgte.dag.name(v), x),
        Val::Bound => cgte.dag.name(v).to_string(),
    }
}

fn render(e: &Expr, cgte: &CgteSpec, in_product: bool) -> String {
    match e {
        Expr::Const(c) => format_number(*c),
        Expr::Indicator { label, .. } => label.clone(),
        Expr::Atom(a) => {
            let mut given = a.given.clone();
            given.sort_by_key(|&(v, _)| (v != cgte.treatment, v));
            let mut s = format!("P({}", render_val(cgte, a.target, a.target_val));
            for (i, (v, val)) in given.into_iter().enumerate() {
                s.push(if i == 0 { '|' } else { ',' });
                s.push_str(&render_val(cgte, v, val));
            }
            s.push(')');
            s
        }
        Expr::Sum { vars, body } => {
            let names = cgte.dag.names(*vars).join(",");
            let s = format!("\\sum_{{{}}} {}", names, render(body, cgte, false));
            if in_product {
                format!("[{s}]")
            } else {
                s
            }
        }
        Expr::Add(xs) => {
            let s = xs.iter().map(|x| render(x, cgte, false)).collect::<Vec<_>>().join(" + ");
            if in_product {
                format!("[{s}]")
            } else {
                s
            }
        }
        Expr::Mul(xs) => xs.iter().map(|x| render(x, cgte, true)).collect::<Vec<_>>().join("*"),
        Expr::Sub(a, b) => {
            let s = format!("{} - {}", render(a, cgte, matches!(**a, Expr::Sub(..))), render(b, cgte, true));
            if in_product {
                format!("[{s}]")
            } else {
                s
            }
        }
        Expr::Div(a, b) => format!("{} / {}", render(a, cgte, true), render(b, cgte, true)),
    }
}
