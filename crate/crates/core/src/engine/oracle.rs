//! Brute-force answers computed without any identification step.
//!
//! Rung 1 enumerates the joint distribution, Rung 2 uses truncated
//! factorization on the full graph (unobserved nodes included), Rung 3
//! integrates over the exogenous cells of the threshold model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CgteSpec, NodeSet};
use crate::model::{compensated_sum, Assignment, Cbn, CbnParams, Scm, Unit};
use crate::query::{QueryInstance, QueryType};

use super::EngineError;

fn bit(world: u8, v: usize) -> f64 {
    f64::from((world >> v) & 1)
}

fn cond_diff(cbn: &Cbn, cgte: &CgteSpec, extra: Assignment) -> Result<f64, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let y1 = Assignment::of(y, 1);
    let g = |xv| extra.and(Assignment::of(x, xv)).expect("disjoint literals");
    Ok(cbn.prob(y1, Some(g(1)))? - cbn.prob(y1, Some(g(0)))?)
}

fn interventional_ate(cbn: &Cbn, cgte: &CgteSpec) -> Result<f64, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let y1 = Assignment::of(y, 1);
    Ok(cbn.interventional_prob(Assignment::of(x, 1), y1)? - cbn.interventional_prob(Assignment::of(x, 0), y1)?)
}

/// Average effect among units whose treatment follows the instrument:
/// `E[(X_{z=1} - X_{z=0})(Y_{x=1} - Y_{x=0})] / E[X_{z=1} - X_{z=0}]`.
/// Fails when the instrument pushes some units up and others down.
pub fn complier_effect(scm: &Scm, cgte: &CgteSpec, z: usize) -> Result<f64, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let cbn = scm.cbn();
    let (mut num, mut den) = (Vec::new(), Vec::new());
    let (mut up, mut down) = (false, false);
    for (w, u) in scm.units() {
        let c = bit(u.solve(cbn, Assignment::of(z, 1)), x) - bit(u.solve(cbn, Assignment::of(z, 0)), x);
        if c == 0.0 {
            continue;
        }
        up |= c > 0.0;
        down |= c < 0.0;
        let effect = bit(u.solve(cbn, Assignment::of(x, 1)), y) - bit(u.solve(cbn, Assignment::of(x, 0)), y);
        num.push(w * c * effect);
        den.push(w * c);
    }
    if up && down {
        return Err(EngineError::NonMonotone);
    }
    let den = compensated_sum(den);
    if den == 0.0 {
        return Err(EngineError::DivisionByZero);
    }
    Ok(compensated_sum(num) / den)
}

/// `Y` under treatment `xd` with the mediators held at their values under `xi`.
fn nested_outcome(u: &Unit, cbn: &Cbn, cgte: &CgteSpec, xd: u8, xi: u8) -> f64 {
    let x = cgte.treatment;
    let under_xi = u.solve(cbn, Assignment::of(x, xi));
    let mediators = cgte.mediators;
    let world = u.solve_with(cbn, &|v| {
        if v == x {
            Some(xd)
        } else if mediators.contains(v) {
            Some((under_xi >> v) & 1)
        } else {
            None
        }
    });
    bit(world, cgte.outcome)
}

/// Whether adjusting for `s` reproduces the interventional distribution on a
/// few generic parameterizations of the graph. Independent of d-separation.
pub fn adjustment_works(cgte: &CgteSpec, s: NodeSet) -> Result<bool, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_dad1_u64);
    for _ in 0..3 {
        let params = CbnParams::from_fn(&cgte.dag, |_, _| rng.random_range(0.05..0.95))?;
        let cbn = Cbn::new(cgte.dag.clone(), params)?;
        for xv in 0..2u8 {
            let truth = cbn.interventional_prob(Assignment::of(x, xv), Assignment::of(y, 1))?;
            let mut terms = Vec::new();
            for k in 0..1u16 << s.len() {
                let mut sv = Assignment::empty();
                for (j, v) in s.iter().enumerate() {
                    sv = sv.with(v, ((k >> j) & 1) as u8);
                }
                let ps = if s.is_empty() { 1.0 } else { cbn.prob(sv, None)? };
                let given = sv.with(x, xv);
                terms.push(ps * cbn.prob(Assignment::of(y, 1), Some(given))?);
            }
            if (compensated_sum(terms) - truth).abs() > 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The raw query value (before direction) computed by brute force.
pub fn oracle(cgte: &CgteSpec, cbn: &Cbn, q: &QueryInstance) -> Result<f64, EngineError> {
    let (x, y) = (cgte.treatment, cgte.outcome);
    let scm = || Scm::new(cbn.clone());
    match q.qtype {
        QueryType::MarginalProb => Ok(cbn.prob(Assignment::of(y, 1), None)?),
        QueryType::CondProb => cond_diff(cbn, cgte, Assignment::empty()),
        QueryType::Ate => match cgte.instrument {
            Some(z) => complier_effect(&scm(), cgte, z),
            None => interventional_ate(cbn, cgte),
        },
        QueryType::Att => {
            let scm = scm();
            Ok(scm.expectation(Assignment::of(x, 1), |u| {
                bit(u.solve(cbn, Assignment::of(x, 1)), y) - bit(u.solve(cbn, Assignment::of(x, 0)), y)
            })?)
        }
        QueryType::CounterfactualProb => {
            let xv = q.evidence_value.unwrap_or(0);
            Ok(scm().counterfactual_prob(Assignment::of(x, xv), Assignment::of(x, 1 - xv), Assignment::of(y, 1))?)
        }
        QueryType::Nde => {
            let scm = scm();
            if let (Some(z), true) = (cgte.instrument, cgte.mediators.is_empty()) {
                return complier_effect(&scm, cgte, z);
            }
            Ok(scm.expectation(Assignment::empty(), |u| {
                nested_outcome(u, cbn, cgte, 1, 0) - nested_outcome(u, cbn, cgte, 0, 0)
            })?)
        }
        QueryType::Nie => {
            let scm = scm();
            Ok(scm.expectation(Assignment::empty(), |u| {
                nested_outcome(u, cbn, cgte, 0, 1) - nested_outcome(u, cbn, cgte, 0, 0)
            })?)
        }
        QueryType::AdjustmentSet => {
            let names = q.candidate_set.clone().unwrap_or_default();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let s = cgte.dag.set(&refs)?;
            let ind = |b: bool| if b { 1.0 } else { 0.0 };
            Ok(ind(adjustment_works(cgte, s)?) - ind(adjustment_works(cgte, NodeSet::EMPTY)?))
        }
        QueryType::ColliderBias => {
            let c = cgte.colliders().iter().next().ok_or(EngineError::NoCollider(cgte.name))?;
            let cv = q.collider_value.unwrap_or(1);
            Ok(cond_diff(cbn, cgte, Assignment::of(c, cv))? - interventional_ate(cbn, cgte)?)
        }
        QueryType::ExplainingAway => {
            let c = cgte.colliders().iter().next().ok_or(EngineError::NoCollider(cgte.name))?;
            cond_diff(cbn, cgte, Assignment::of(c, 1))
        }
    }
}
