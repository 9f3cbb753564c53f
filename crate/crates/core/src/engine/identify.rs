//! Identification: rewriting each query as a Rung-1 expression.

use crate::graph::{CgteSpec, NodeSet};
use crate::model::{Assignment, Cbn};
use crate::query::{QueryInstance, QueryType};

use super::estimand::{Estimand, Expr, Val};
use super::EngineError;

/// Flag attached to ratio estimands that rely on the instrument.
pub const FLAG_IV: &str = "iv_wald_ratio";
/// Smallest accepted first-stage difference for the instrument.
pub const MIN_COMPLIANCE: f64 = 0.05;

/// Whether conditioning on `s` blocks every backdoor path from treatment to outcome.
pub fn is_valid_backdoor_set(cgte: &CgteSpec, s: NodeSet) -> Result<bool, EngineError> {
    let dag = &cgte.dag;
    let endpoints = NodeSet::single(cgte.treatment).with(cgte.outcome);
    if !s.intersection(endpoints).is_empty() {
        return Err(EngineError::InvalidCandidate(format!(
            "{{{}}} contains the treatment or the outcome",
            dag.names(s).join(",")
        )));
    }
    if !s.intersection(cgte.unobserved).is_empty() {
        return Err(EngineError::InvalidCandidate(format!("{{{}}} contains an unobserved node", dag.names(s).join(","))));
    }
    if !s.intersection(dag.descendants(cgte.treatment)).is_empty() {
        return Ok(false);
    }
    let cut = dag.remove_outgoing(NodeSet::single(cgte.treatment));
    Ok(cut.d_separated(NodeSet::single(cgte.treatment), NodeSet::single(cgte.outcome), s)?)
}

/// Observed nodes other than treatment and outcome.
pub fn covariates(cgte: &CgteSpec) -> NodeSet {
    cgte.observed().without(cgte.treatment).without(cgte.outcome)
}

/// Inclusion-minimal valid backdoor sets, ordered by size then node order.
pub fn find_minimal_adjustment_sets(cgte: &CgteSpec) -> Vec<NodeSet> {
    let mut found: Vec<NodeSet> = Vec::new();
    for s in covariates(cgte).subsets() {
        if found.iter().any(|f| f.is_subset(s)) {
            continue;
        }
        if is_valid_backdoor_set(cgte, s).expect("candidates avoid treatment, outcome and unobserved nodes") {
            found.push(s);
        }
    }
    found
}

/// Nonempty candidate sets whose validity differs from that of the empty set,
/// i.e. sets for which "adjust or not" has a definite answer.
pub fn adjustment_candidates(cgte: &CgteSpec) -> Vec<NodeSet> {
    let empty_valid = is_valid_backdoor_set(cgte, NodeSet::EMPTY).expect("empty set is a candidate");
    covariates(cgte)
        .subsets()
        .into_iter()
        .filter(|s| !s.is_empty())
        .filter(|&s| is_valid_backdoor_set(cgte, s).expect("candidate") != empty_valid)
        .collect()
}

/// A single observed mediator satisfying the front-door criterion.
pub fn frontdoor_mediator(cgte: &CgteSpec) -> Option<usize> {
    let dag = &cgte.dag;
    let (x, y) = (cgte.treatment, cgte.outcome);
    let xs = NodeSet::single(x);
    let ys = NodeSet::single(y);
    cgte.mediators.minus(cgte.unobserved).iter().find(|&m| {
        let ms = NodeSet::single(m);
        // Every directed path from X to Y passes through M.
        let intercepts = !dag.remove_outgoing(ms).descendants(x).contains(y);
        // No open backdoor path from X to M.
        let x_to_m = dag.remove_outgoing(xs).d_separated(xs, ms, NodeSet::EMPTY).unwrap_or(false);
        // X blocks every backdoor path from M to Y.
        let m_to_y = dag.remove_outgoing(ms).d_separated(ms, ys, xs).unwrap_or(false);
        intercepts && x_to_m && m_to_y
    })
}

fn fixed(v: usize, x: u8) -> (usize, Val) {
    (v, Val::Fixed(x))
}

fn bound(v: usize) -> (usize, Val) {
    (v, Val::Bound)
}

fn y1(cgte: &CgteSpec, given: &[(usize, Val)]) -> Expr {
    Expr::p(cgte.outcome, Val::Fixed(1), given)
}

/// `P(S = s | cond)` for bound `s`, factored by the chain rule in node order.
fn chain_rule(cgte: &CgteSpec, s: NodeSet, cond: &[(usize, Val)]) -> Vec<Expr> {
    let mut given = cond.to_vec();
    let mut out = Vec::new();
    for v in cgte.dag.topo_order().iter().copied().filter(|&v| s.contains(v)) {
        out.push(Expr::p(v, Val::Bound, &given));
        given.push(bound(v));
    }
    out
}

fn set_name(cgte: &CgteSpec, s: NodeSet) -> String {
    format!("{{{}}}", cgte.dag.names(s).join(","))
}

/// `sum_s P(s | cond) [P(y | X=1, s) - P(y | X=0, s)]`.
fn backdoor_contrast(cgte: &CgteSpec, s: NodeSet, cond: &[(usize, Val)]) -> Expr {
    let x = cgte.treatment;
    let given = |xv| {
        let mut g = vec![fixed(x, xv)];
        g.extend(s.iter().map(bound));
        g
    };
    let diff = Expr::sub(y1(cgte, &given(1)), y1(cgte, &given(0)));
    let mut factors = chain_rule(cgte, s, cond);
    factors.push(diff);
    Expr::sum(s, Expr::mul(factors))
}

/// `sum_m [P(m | X=1) - P(m | X=0)] * inner(m)`.
fn mediator_contrast(cgte: &CgteSpec, m: usize, inner: Expr) -> Expr {
    let x = cgte.treatment;
    let diff = Expr::sub(Expr::p(m, Val::Bound, &[fixed(x, 1)]), Expr::p(m, Val::Bound, &[fixed(x, 0)]));
    Expr::sum(NodeSet::single(m), Expr::mul(vec![diff, inner]))
}

fn frontdoor_ate(cgte: &CgteSpec, m: usize) -> Expr {
    let x = cgte.treatment;
    let inner = Expr::sum(
        NodeSet::single(x),
        Expr::mul(vec![y1(cgte, &[bound(x), bound(m)]), Expr::p(x, Val::Bound, &[])]),
    );
    mediator_contrast(cgte, m, inner)
}

fn wald(cgte: &CgteSpec, z: usize) -> Expr {
    let x = cgte.treatment;
    let num = Expr::sub(y1(cgte, &[fixed(z, 1)]), y1(cgte, &[fixed(z, 0)]));
    let den = Expr::sub(Expr::p(x, Val::Fixed(1), &[fixed(z, 1)]), Expr::p(x, Val::Fixed(1), &[fixed(z, 0)]));
    Expr::div(num, den)
}

fn not_identifiable(cgte: &CgteSpec, qtype: QueryType) -> EngineError {
    EngineError::NotIdentifiable { graph: cgte.name, qtype }
}

fn derive_ate(cgte: &CgteSpec) -> Result<Estimand, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let xn = cgte.treatment_name();
    let yn = cgte.outcome_name();
    if !cgte.dag.descendants(x).contains(y) {
        return Ok(Estimand::new(Expr::Const(0.0))
            .note(format!("There is no directed path from {xn} to {yn}, so the causal effect is 0."))
            .flag("constant_zero"));
    }
    if let Some(s) = find_minimal_adjustment_sets(cgte).first().copied() {
        let est = Estimand::new(backdoor_contrast(cgte, s, &[])).flag(format!("backdoor:{}", set_name(cgte, s)));
        return Ok(if s.is_empty() {
            est.note(format!("There are no open backdoor paths from {xn} to {yn}, so the interventional and conditional distributions coincide."))
        } else {
            est.note(format!("Adjusting for {} blocks every backdoor path from {xn} to {yn}.", set_name(cgte, s)))
        });
    }
    if let Some(m) = frontdoor_mediator(cgte) {
        return Ok(Estimand::new(frontdoor_ate(cgte, m))
            .flag("frontdoor")
            .note(format!("{} satisfies the front-door criterion for the effect of {xn} on {yn}.", cgte.dag.name(m))));
    }
    if let Some(z) = cgte.instrument {
        return Ok(Estimand::new(wald(cgte, z))
            .flag(FLAG_IV)
            .note(format!("{} is an instrument for {xn}; the effect is the ratio of its effects on {yn} and on {xn}.", cgte.dag.name(z))));
    }
    Err(not_identifiable(cgte, QueryType::Ate))
}

/// Whether every ancestor of the outcome is observed.
fn markovian_for_outcome(cgte: &CgteSpec) -> bool {
    cgte.dag.ancestors(cgte.outcome).intersection(cgte.unobserved).is_empty()
}

/// Factors of the edge g-formula for `E[Y_{x_d, M_{x_i}}]`: every node in the
/// outcome's ancestry except the treatment, with the treatment fixed to `x_i`
/// in their conditioning sets. Returns `(vars, factors that read X, factors that do not)`.
fn edge_factors(cgte: &CgteSpec, xi: u8) -> (NodeSet, Vec<Expr>, Vec<Expr>) {
    let dag = &cgte.dag;
    let x = cgte.treatment;
    let vars = dag.ancestors(cgte.outcome).without(x);
    let mut reads_x = Vec::new();
    let mut other = Vec::new();
    for &v in dag.topo_order() {
        if !vars.contains(v) {
            continue;
        }
        let pa = dag.parents(v);
        let given: Vec<(usize, Val)> =
            pa.iter().map(|p| if p == x { fixed(x, xi) } else { bound(p) }).collect();
        let factor = Expr::p(v, Val::Bound, &given);
        if pa.contains(x) {
            reads_x.push(factor);
        } else {
            other.push(factor);
        }
    }
    (vars, reads_x, other)
}

fn outcome_given(cgte: &CgteSpec, xd: u8) -> Vec<(usize, Val)> {
    let x = cgte.treatment;
    cgte.dag
        .parents(cgte.outcome)
        .iter()
        .map(|p| if p == x { fixed(x, xd) } else { bound(p) })
        .collect()
}

fn derive_nde(cgte: &CgteSpec) -> Result<Estimand, EngineError> {
    let xn = cgte.treatment_name();
    let yn = cgte.outcome_name();
    if !cgte.dag.has_edge(cgte.treatment, cgte.outcome) {
        return Ok(Estimand::new(Expr::Const(0.0))
            .note(format!("There is no direct edge from {xn} to {yn}, so the natural direct effect is 0."))
            .flag("constant_zero"));
    }
    if markovian_for_outcome(cgte) {
        let (vars, reads_x, other) = edge_factors(cgte, 0);
        let diff = Expr::sub(y1(cgte, &outcome_given(cgte, 1)), y1(cgte, &outcome_given(cgte, 0)));
        let mut factors = other;
        factors.extend(reads_x);
        factors.push(diff);
        let mut est = Estimand::new(Expr::sum(vars, Expr::mul(factors))).flag("mediation_formula");
        if cgte.mediators.is_empty() {
            est = est.note(format!("There is no mediated path from {xn} to {yn}, so the natural direct effect equals the total effect."));
        }
        return Ok(est);
    }
    if cgte.mediators.is_empty() {
        let ate = derive_ate(cgte)?;
        return Ok(Estimand { flags: [vec!["nde_equals_ate".to_string()], ate.flags].concat(), ..ate }
            .note(format!("There is no mediated path from {xn} to {yn}, so the natural direct effect equals the total effect.")));
    }
    Err(not_identifiable(cgte, QueryType::Nde))
}

fn derive_nie(cgte: &CgteSpec) -> Result<Estimand, EngineError> {
    let xn = cgte.treatment_name();
    let yn = cgte.outcome_name();
    if cgte.mediators.is_empty() {
        return Ok(Estimand::new(Expr::Const(0.0))
            .note(format!("There is no mediated path from {xn} to {yn}, so the natural indirect effect is 0."))
            .flag("constant_zero"));
    }
    if markovian_for_outcome(cgte) {
        let (vars, reads_1, other) = edge_factors(cgte, 1);
        let (_, reads_0, _) = edge_factors(cgte, 0);
        let mut factors = other;
        factors.push(Expr::sub(Expr::mul(reads_1), Expr::mul(reads_0)));
        factors.push(y1(cgte, &outcome_given(cgte, 0)));
        let mut est = Estimand::new(Expr::sum(vars, Expr::mul(factors))).flag("mediation_formula");
        if !cgte.dag.has_edge(cgte.treatment, cgte.outcome) {
            est = est.note(format!("There is no direct edge from {xn} to {yn}, so the natural indirect effect equals the total effect."));
        }
        return Ok(est);
    }
    if !cgte.dag.has_edge(cgte.treatment, cgte.outcome) {
        let ate = derive_ate(cgte)?;
        return Ok(Estimand { flags: [vec!["nie_equals_ate".to_string()], ate.flags].concat(), ..ate }
            .note(format!("There is no direct edge from {xn} to {yn}, so the natural indirect effect equals the total effect.")));
    }
    Err(not_identifiable(cgte, QueryType::Nie))
}

fn derive_att(cgte: &CgteSpec) -> Result<Estimand, EngineError> {
    let x = cgte.treatment;
    if let Some(s) = find_minimal_adjustment_sets(cgte).first().copied() {
        return Ok(Estimand::new(backdoor_contrast(cgte, s, &[fixed(x, 1)])).flag(format!("backdoor:{}", set_name(cgte, s))));
    }
    if let Some(m) = frontdoor_mediator(cgte) {
        return Ok(Estimand::new(mediator_contrast(cgte, m, y1(cgte, &[fixed(x, 1), bound(m)]))).flag("frontdoor"));
    }
    Err(not_identifiable(cgte, QueryType::Att))
}

/// `P(Y_{x'} = 1 | X = x)` with `x' = 1 - x`.
fn derive_counterfactual(cgte: &CgteSpec, x_val: u8) -> Result<Estimand, EngineError> {
    let x = cgte.treatment;
    let flip = 1 - x_val;
    if let Some(s) = find_minimal_adjustment_sets(cgte).first().copied() {
        let mut g = vec![fixed(x, flip)];
        g.extend(s.iter().map(bound));
        let mut factors = chain_rule(cgte, s, &[fixed(x, x_val)]);
        factors.push(y1(cgte, &g));
        return Ok(Estimand::new(Expr::sum(s, Expr::mul(factors))).flag(format!("backdoor:{}", set_name(cgte, s))));
    }
    if let Some(m) = frontdoor_mediator(cgte) {
        let body = Expr::mul(vec![Expr::p(m, Val::Bound, &[fixed(x, flip)]), y1(cgte, &[fixed(x, x_val), bound(m)])]);
        return Ok(Estimand::new(Expr::sum(NodeSet::single(m), body)).flag("frontdoor"));
    }
    Err(not_identifiable(cgte, QueryType::CounterfactualProb))
}

fn derive_marginal(cgte: &CgteSpec) -> Estimand {
    let dag = &cgte.dag;
    let y = cgte.outcome;
    let anc = dag.ancestors(y);
    if anc.intersection(cgte.unobserved).is_empty() {
        let mut factors: Vec<Expr> = dag
            .topo_order()
            .iter()
            .filter(|&&v| anc.contains(v))
            .map(|&v| Expr::p(v, Val::Bound, &dag.parents(v).iter().map(bound).collect::<Vec<_>>()))
            .collect();
        factors.push(y1(cgte, &dag.parents(y).iter().map(bound).collect::<Vec<_>>()));
        Estimand::new(Expr::sum(anc, Expr::mul(factors)))
    } else {
        let x = cgte.treatment;
        Estimand::new(Expr::sum(
            NodeSet::single(x),
            Expr::mul(vec![Expr::p(x, Val::Bound, &[]), y1(cgte, &[bound(x)])]),
        ))
    }
}

fn collider(cgte: &CgteSpec) -> Result<usize, EngineError> {
    cgte.colliders().iter().next().ok_or(EngineError::NoCollider(cgte.name))
}

fn conditional_contrast(cgte: &CgteSpec, c: usize, cv: u8) -> Expr {
    let x = cgte.treatment;
    Expr::sub(y1(cgte, &[fixed(x, 1), fixed(c, cv)]), y1(cgte, &[fixed(x, 0), fixed(c, cv)]))
}

fn candidate_set(cgte: &CgteSpec, q: &QueryInstance) -> Result<NodeSet, EngineError> {
    let names = q.candidate_set.as_ref().ok_or(EngineError::Query(crate::query::QueryError::MissingField {
        qtype: q.qtype,
        field: "candidate_set",
    }))?;
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(cgte.dag.set(&refs)?)
}

fn backdoor_note(cgte: &CgteSpec, s: NodeSet, valid: bool) -> String {
    let xn = cgte.treatment_name();
    let yn = cgte.outcome_name();
    let name = if s.is_empty() { "The empty set".to_string() } else { set_name(cgte, s) };
    if valid && s.is_empty() {
        format!("There is no open backdoor path from {xn} to {yn}.")
    } else if valid {
        format!("{name} blocks every backdoor path from {xn} to {yn}.")
    } else if !s.intersection(cgte.dag.descendants(cgte.treatment)).is_empty() {
        format!("{name} contains a descendant of {xn}.")
    } else {
        format!("{name} leaves a backdoor path from {xn} to {yn} open.")
    }
}

/// A Rung-1 expression equal to the raw query value (before direction).
pub fn derive_estimand(cgte: &CgteSpec, q: &QueryInstance) -> Result<Estimand, EngineError> {
    let x = cgte.treatment;
    match q.qtype {
        QueryType::MarginalProb => Ok(derive_marginal(cgte)),
        QueryType::CondProb => Ok(Estimand::new(Expr::sub(y1(cgte, &[fixed(x, 1)]), y1(cgte, &[fixed(x, 0)])))),
        QueryType::Ate => derive_ate(cgte),
        QueryType::Att => derive_att(cgte),
        QueryType::Nde => derive_nde(cgte),
        QueryType::Nie => derive_nie(cgte),
        QueryType::CounterfactualProb => {
            let xv = q.evidence_value.ok_or(EngineError::Query(crate::query::QueryError::MissingField {
                qtype: q.qtype,
                field: "evidence_value",
            }))?;
            derive_counterfactual(cgte, xv)
        }
        QueryType::AdjustmentSet => {
            let s = candidate_set(cgte, q)?;
            let valid_s = is_valid_backdoor_set(cgte, s)?;
            let valid_empty = is_valid_backdoor_set(cgte, NodeSet::EMPTY)?;
            let ind = |v: bool| if v { 1.0 } else { 0.0 };
            let expr = Expr::sub(
                Expr::Indicator { label: format!("valid({})", set_name(cgte, s)), value: ind(valid_s) },
                Expr::Indicator { label: "valid({})".to_string(), value: ind(valid_empty) },
            );
            Ok(Estimand::new(expr)
                .note(backdoor_note(cgte, s, valid_s))
                .note(backdoor_note(cgte, NodeSet::EMPTY, valid_empty)))
        }
        QueryType::ColliderBias => {
            let c = collider(cgte)?;
            let cv = q.collider_value.unwrap_or(1);
            let ate = derive_ate(cgte)?;
            let notes = ate.notes.clone();
            Ok(Estimand { expr: Expr::sub(conditional_contrast(cgte, c, cv), ate.expr), notes, flags: ate.flags })
        }
        QueryType::ExplainingAway => {
            let c = collider(cgte)?;
            Ok(Estimand::new(conditional_contrast(cgte, c, 1)))
        }
    }
}

/// Parameter-level conditions an instance must meet for its estimand to be
/// trusted: the instrument must move the treatment in one direction only, and
/// by at least [`MIN_COMPLIANCE`].
pub fn check_instance(cgte: &CgteSpec, cbn: &Cbn, estimand: &Estimand) -> Result<(), EngineError> {
    if !estimand.flags.iter().any(|f| f == FLAG_IV) {
        return Ok(());
    }
    let z = cgte.instrument.ok_or(EngineError::NoInstrument(cgte.name))?;
    let x = cgte.treatment;
    let dag = &cgte.dag;
    let others = dag.parents(x).without(z);
    let params = cbn.params();
    let (mut up, mut down) = (false, false);
    for rest in others.subsets() {
        let world = rest.bits();
        let d = params.theta(x, world | 1 << z) - params.theta(x, world & !(1 << z));
        up |= d > 0.0;
        down |= d < 0.0;
    }
    if up && down {
        return Err(EngineError::NonMonotone);
    }
    let first_stage = cbn.prob(Assignment::of(x, 1), Some(Assignment::of(z, 1)))?
        - cbn.prob(Assignment::of(x, 1), Some(Assignment::of(z, 0)))?;
    if first_stage.abs() < MIN_COMPLIANCE {
        return Err(EngineError::WeakInstrument(first_stage));
    }
    Ok(())
}
