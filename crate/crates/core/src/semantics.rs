//! Outside options, stability and balance.
//!
//! The general definitions work on a solution `(M, z)`. The unit-capacity
//! versions work on `(M, x)` where `x` is the per-vertex payoff; on unit
//! instances both agree exactly.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{Allocation, CMatching, Instance, ModelError, Rational, Solution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("vertex {0:?} has capacity {1}; the unit-capacity formula needs capacity 1")]
    NotUnitCapacity(String, u32),
    #[error("allocation is not a solution on the matching: {0}")]
    InconsistentAllocation(String),
}

/// Best outside neighbor `v'` of a vertex and, when `v'` is saturated, the
/// partner `u'` of its weakest contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub neighbor: usize,
    pub weakest_partner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutsideOptionReport {
    pub vertex: usize,
    pub value: Rational,
    pub witness: Option<Witness>,
}

/// Smallest matched share of `v`, with the lexicographically least partner among ties.
pub fn weakest_contract(inst: &Instance, sol: &Solution, v: usize) -> Option<(Rational, usize)> {
    let mut best: Option<(Rational, usize)> = None;
    for (w, e) in sol.matching().partners(inst, v) {
        let share = sol.share(inst, v, e);
        if best.is_none_or(|(b, _)| share < b) {
            best = Some((share, w));
        }
    }
    best
}

/// What `u` could extract from the non-matching edge to `v`.
pub fn offer(inst: &Instance, sol: &Solution, v: usize, e: usize) -> (Rational, Option<usize>) {
    let m = sol.matching();
    if m.is_saturated(inst, v) {
        let (share, partner) = weakest_contract(inst, sol, v).expect("saturated vertex has a contract");
        (inst.weight(e) - share, Some(partner))
    } else {
        (inst.weight(e), None)
    }
}

/// `alpha_u(M, z)` with its witness; ties go to the lexicographically least neighbor.
pub fn outside_option(inst: &Instance, sol: &Solution, u: usize) -> OutsideOptionReport {
    let mut best: Option<(Rational, Witness)> = None;
    for (v, e) in sol.matching().outside(inst, u) {
        let (value, partner) = offer(inst, sol, v, e);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, Witness { neighbor: v, weakest_partner: partner }));
        }
    }
    match best {
        Some((value, witness)) if !value.is_negative() => {
            OutsideOptionReport { vertex: u, value, witness: Some(witness) }
        }
        _ => OutsideOptionReport { vertex: u, value: Rational::zero(), witness: None },
    }
}

pub fn outside_option_of(
    inst: &Instance,
    sol: &Solution,
    id: &str,
) -> Result<OutsideOptionReport, SemanticsError> {
    Ok(outside_option(inst, sol, inst.vertex(id)?))
}

pub fn outside_options(inst: &Instance, sol: &Solution) -> Vec<Rational> {
    (0..inst.vertex_count()).map(|u| outside_option(inst, sol, u).value).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityViolation {
    /// `z_uv < alpha_u` on a matched edge.
    ShareBelowOutsideOption { vertex: usize, partner: usize, share: Rational, outside: Rational },
    /// An unsaturated vertex with a positive outside option.
    UnsaturatedWithOutsideOption { vertex: usize, outside: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    pub violations: Vec<StabilityViolation>,
}

fn stability_with(inst: &Instance, sol: &Solution, alpha: &[Rational]) -> StabilityReport {
    let m = sol.matching();
    let mut violations = Vec::new();
    for u in 0..inst.vertex_count() {
        for (v, e) in m.partners(inst, u) {
            let share = sol.share(inst, u, e);
            if share < alpha[u] {
                violations.push(StabilityViolation::ShareBelowOutsideOption {
                    vertex: u,
                    partner: v,
                    share,
                    outside: alpha[u],
                });
            }
        }
        if !m.is_saturated(inst, u) && !alpha[u].is_zero() {
            violations.push(StabilityViolation::UnsaturatedWithOutsideOption { vertex: u, outside: alpha[u] });
        }
    }
    StabilityReport { stable: violations.is_empty(), violations }
}

pub fn is_stable(inst: &Instance, sol: &Solution) -> StabilityReport {
    stability_with(inst, sol, &outside_options(inst, sol))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBalance {
    pub edge: usize,
    pub u: usize,
    pub v: usize,
    pub z_uv: Rational,
    pub alpha_u: Rational,
    pub z_vu: Rational,
    pub alpha_v: Rational,
    /// `(z_uv - alpha_u) - (z_vu - alpha_v)`
    pub asymmetry: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub edges: Vec<EdgeBalance>,
    pub stable: bool,
    pub balanced: bool,
    pub stability_violations: Vec<StabilityViolation>,
    pub balance_violations: Vec<EdgeBalance>,
}

pub fn is_balanced(inst: &Instance, sol: &Solution) -> BalanceReport {
    let alpha = outside_options(inst, sol);
    let stability = stability_with(inst, sol, &alpha);
    let edges: Vec<EdgeBalance> = sol
        .matching()
        .edges()
        .iter()
        .map(|&e| {
            let edge = inst.edge(e);
            let (z_uv, z_vu) = sol.splits()[e];
            let (alpha_u, alpha_v) = (alpha[edge.u], alpha[edge.v]);
            EdgeBalance {
                edge: e,
                u: edge.u,
                v: edge.v,
                z_uv,
                alpha_u,
                z_vu,
                alpha_v,
                asymmetry: (z_uv - alpha_u) - (z_vu - alpha_v),
            }
        })
        .collect();
    let balance_violations: Vec<EdgeBalance> =
        edges.iter().filter(|b| !b.asymmetry.is_zero()).cloned().collect();
    BalanceReport {
        stable: stability.stable,
        balanced: stability.stable && balance_violations.is_empty(),
        edges,
        stability_violations: stability.violations,
        balance_violations,
    }
}

fn require_unit(inst: &Instance) -> Result<(), SemanticsError> {
    match (0..inst.vertex_count()).find(|&u| inst.capacity(u) != 1) {
        Some(u) => Err(SemanticsError::NotUnitCapacity(inst.id(u).to_string(), inst.capacity(u))),
        None => Ok(()),
    }
}

/// Checks that `(m, x)` is a unit-capacity solution: matched payoffs sum to
/// the edge weight, uncovered vertices get 0, nothing is negative.
pub fn check_unit_solution(inst: &Instance, m: &CMatching, x: &Allocation) -> Result<(), SemanticsError> {
    let bad = |msg: String| Err(SemanticsError::InconsistentAllocation(msg));
    if x.len() != inst.vertex_count() {
        return bad(format!("{} payoffs for {} vertices", x.len(), inst.vertex_count()));
    }
    for u in 0..inst.vertex_count() {
        if x.get(u).is_negative() {
            return bad(format!("negative payoff at {}", inst.id(u)));
        }
        if m.degree(u) == 0 && !x.get(u).is_zero() {
            return bad(format!("uncovered vertex {} has payoff {}", inst.id(u), x.get(u)));
        }
        if m.degree(u) > 1 {
            return bad(format!("vertex {} is covered twice", inst.id(u)));
        }
    }
    for &e in m.edges() {
        let edge = inst.edge(e);
        if x.get(edge.u) + x.get(edge.v) != edge.weight {
            return bad(format!(
                "payoffs on ({}, {}) do not sum to the weight",
                inst.id(edge.u),
                inst.id(edge.v)
            ));
        }
    }
    Ok(())
}

/// `max(0, max over non-matching neighbors v of w_uv - x_v)`, no input checks.
pub fn unit_outside_options(inst: &Instance, m: &CMatching, x: &Allocation) -> Vec<Rational> {
    (0..inst.vertex_count())
        .map(|u| {
            m.outside(inst, u)
                .map(|(v, e)| inst.weight(e) - x.get(v))
                .fold(Rational::zero(), |acc, val| acc.max(val))
        })
        .collect()
}

/// Unit-capacity outside option `alpha_u(M, x)`.
pub fn unit_outside_option(
    inst: &Instance,
    m: &CMatching,
    x: &Allocation,
    u: usize,
) -> Result<Rational, SemanticsError> {
    require_unit(inst)?;
    check_unit_solution(inst, m, x)?;
    Ok(m.outside(inst, u)
        .map(|(v, e)| inst.weight(e) - x.get(v))
        .fold(Rational::zero(), |acc, val| acc.max(val)))
}

/// `x_u >= alpha_u` for every vertex.
pub fn unit_is_stable(inst: &Instance, m: &CMatching, x: &Allocation) -> bool {
    let alpha = unit_outside_options(inst, m, x);
    (0..inst.vertex_count()).all(|u| x.get(u) >= alpha[u])
}

/// Stable, and `x_u - alpha_u = x_v - alpha_v` on every matched edge.
pub fn unit_is_balanced(inst: &Instance, m: &CMatching, x: &Allocation) -> bool {
    let alpha = unit_outside_options(inst, m, x);
    let stable = (0..inst.vertex_count()).all(|u| x.get(u) >= alpha[u]);
    stable
        && m.edges().iter().all(|&e| {
            let edge = inst.edge(e);
            x.get(edge.u) - alpha[edge.u] == x.get(edge.v) - alpha[edge.v]
        })
}
