//! Exact maximum-weight c-matchings by branch and bound over edge subsets,
//! the half-integral relaxation, and small structural checks.
//!
//! Edges are branched in instance order with "take" tried before "skip"
//! (and, for the relaxation, 1 before 1/2 before 0). The first optimum found
//! is therefore the least one in that order, and pruning only discards
//! subtrees that cannot strictly beat the incumbent, so the winner is
//! deterministic.

use num_traits::Zero;
use thiserror::Error;

use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{CMatching, Instance, Rational};

/// Edge limit for exhaustive integral search.
pub const EXACT_EDGE_LIMIT: usize = 25;
/// Edge limit for the {0, 1/2, 1} enumeration of the relaxation.
pub const HALF_INTEGRAL_EDGE_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("instance too large for exact mode: {edges} edges exceeds the limit of {limit}")]
    TooLarge { edges: usize, limit: usize },
}

fn guard(edges: usize, limit: usize) -> Result<(), SolverError> {
    if edges > limit {
        Err(SolverError::TooLarge { edges, limit })
    } else {
        Ok(())
    }
}

/// Branch-and-bound over per-edge levels `0..=levels`; level `h` uses `h`
/// capacity units at each endpoint and earns `w * h / levels`.
struct EdgeSearch {
    levels: u32,
    residual: Vec<u32>,
    edges: Vec<(usize, usize, Rational)>,
    // per vertex: incident edge positions, heaviest first
    by_vertex: Vec<Vec<usize>>,
    chosen: Vec<u32>,
    best: Option<(Rational, Vec<u32>)>,
    // counting mode: target optimum and number of hits so far
    count_target: Option<Rational>,
    hits: usize,
    hit_limit: usize,
}

impl EdgeSearch {
    fn new(caps: Vec<u32>, edges: Vec<(usize, usize, Rational)>, levels: u32) -> Self {
        let mut by_vertex = vec![Vec::new(); caps.len()];
        for (k, (u, v, _)) in edges.iter().enumerate() {
            by_vertex[*u].push(k);
            by_vertex[*v].push(k);
        }
        for list in &mut by_vertex {
            list.sort_by(|a, b| edges[*b].2.cmp(&edges[*a].2).then(a.cmp(b)));
        }
        EdgeSearch {
            levels,
            residual: caps.iter().map(|c| c * levels).collect(),
            chosen: vec![0; edges.len()],
            edges,
            by_vertex,
            best: None,
            count_target: None,
            hits: 0,
            hit_limit: usize::MAX,
        }
    }

    /// Upper bound on what edges `from..` can still add.
    fn bound(&self, from: usize) -> Rational {
        let mut total = Rational::zero();
        for (u, list) in self.by_vertex.iter().enumerate() {
            let mut room = self.residual[u];
            for &k in list {
                if room == 0 {
                    break;
                }
                if k < from {
                    continue;
                }
                let (a, b, w) = &self.edges[k];
                let other = if *a == u { *b } else { *a };
                if self.residual[other] == 0 {
                    continue;
                }
                let take = room.min(self.levels);
                total += *w * Rational::from_integer(take as i128);
                room -= take;
            }
        }
        total / Rational::from_integer(2 * self.levels as i128)
    }

    fn run(&mut self, k: usize, current: Rational) {
        if self.hits >= self.hit_limit {
            return;
        }
        let optimistic = current + self.bound(k);
        match (&self.count_target, &self.best) {
            (Some(target), _) if optimistic < *target => return,
            (None, Some((best, _))) if optimistic <= *best => return,
            _ => {}
        }
        if k == self.edges.len() {
            if let Some(target) = self.count_target {
                if current == target {
                    self.hits += 1;
                }
            } else if self.best.as_ref().is_none_or(|(b, _)| current > *b) {
                self.best = Some((current, self.chosen.clone()));
            }
            return;
        }
        let (u, v, w) = self.edges[k];
        for level in (0..=self.levels).rev() {
            if self.residual[u] < level || self.residual[v] < level {
                continue;
            }
            self.residual[u] -= level;
            self.residual[v] -= level;
            self.chosen[k] = level;
            let gain = w * Rational::new(level as i128, self.levels as i128);
            self.run(k + 1, current + gain);
            self.residual[u] += level;
            self.residual[v] += level;
            self.chosen[k] = 0;
        }
    }
}

fn instance_search(inst: &Instance, levels: u32) -> EdgeSearch {
    let caps = (0..inst.vertex_count()).map(|u| inst.capacity(u)).collect();
    let edges = inst.edges().iter().map(|e| (e.u, e.v, e.weight)).collect();
    EdgeSearch::new(caps, edges, levels)
}

/// Maximum-weight c-matching with an explicit edge limit.
pub fn max_weight_c_matching_limited(
    inst: &Instance,
    limit: usize,
) -> Result<(CMatching, Rational), SolverError> {
    guard(inst.edge_count(), limit)?;
    let mut search = instance_search(inst, 1);
    search.run(0, Rational::zero());
    let (weight, chosen) = search.best.expect("the empty matching is always feasible");
    let edges = (0..chosen.len()).filter(|&k| chosen[k] == 1);
    let matching = CMatching::new(inst, edges).expect("search respects capacities");
    Ok((matching, weight))
}

/// A maximum-weight c-matching; among optima the first in take-before-skip
/// edge order.
pub fn max_weight_c_matching(inst: &Instance) -> Result<(CMatching, Rational), SolverError> {
    max_weight_c_matching_limited(inst, EXACT_EDGE_LIMIT)
}

/// Weight of a maximum c-matching of the subgraph induced by `mask`.
pub fn induced_optimum(inst: &Instance, mask: u64, limit: usize) -> Result<Rational, SolverError> {
    let inside = |x: usize| mask >> x & 1 == 1;
    let edges: Vec<_> = inst
        .edges()
        .iter()
        .filter(|e| inside(e.u) && inside(e.v) && !e.weight.is_zero())
        .map(|e| (e.u, e.v, e.weight))
        .collect();
    guard(edges.len(), limit)?;
    if edges.is_empty() {
        return Ok(Rational::zero());
    }
    let caps = (0..inst.vertex_count()).map(|u| inst.capacity(u)).collect();
    let mut search = EdgeSearch::new(caps, edges, 1);
    search.run(0, Rational::zero());
    Ok(search.best.map(|(w, _)| w).unwrap_or_else(Rational::zero))
}

/// Number of edge subsets attaining the optimum, counted up to `cap`.
fn count_optima(inst: &Instance, optimum: Rational, cap: usize) -> usize {
    let mut search = instance_search(inst, 1);
    search.count_target = Some(optimum);
    search.hit_limit = cap;
    search.run(0, Rational::zero());
    search.hits
}

/// True iff exactly one edge subset is a maximum-weight c-matching.
pub fn is_unique_optimum(inst: &Instance) -> Result<bool, SolverError> {
    let (_, optimum) = max_weight_c_matching(inst)?;
    Ok(count_optima(inst, optimum, 2) == 1)
}

/// True iff the matched edges form a forest.
pub fn is_acyclic(inst: &Instance, m: &CMatching) -> bool {
    let mut parent: Vec<usize> = (0..inst.vertex_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &e in m.edges() {
        let (a, b) = (find(&mut parent, inst.edge(e).u), find(&mut parent, inst.edge(e).v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRelaxationResult {
    pub fractional_optimum: Rational,
    pub integral_optimum: Rational,
    pub has_integral_optimal: bool,
    /// Optimal fractional value per instance edge, each in {0, 1/2, 1}.
    pub witness: Vec<Rational>,
}

/// Compares the relaxation `sum_{e at u} x_e <= c_u, 0 <= x_e <= 1` (searched
/// over {0, 1/2, 1}) with the integral optimum.
pub fn lp_integrality_check(inst: &Instance) -> Result<LpRelaxationResult, SolverError> {
    guard(inst.edge_count(), HALF_INTEGRAL_EDGE_LIMIT)?;
    let (_, integral) = max_weight_c_matching(inst)?;
    let mut search = instance_search(inst, 2);
    search.run(0, Rational::zero());
    let (fractional, halves) = search.best.expect("zero assignment is feasible");
    Ok(LpRelaxationResult {
        has_integral_optimal: fractional == integral,
        fractional_optimum: fractional,
        integral_optimum: integral,
        witness: halves.iter().map(|&h| Rational::new(h as i128, 2)).collect(),
    })
}

/// Optimum of the same relaxation by exact simplex, with an optimal point.
pub fn relaxation_optimum_simplex(inst: &Instance) -> (Rational, Vec<Rational>) {
    let mut lp = LinearProgram::new(inst.edge_count());
    for (k, e) in inst.edges().iter().enumerate() {
        lp.set_objective(k, e.weight);
        lp.add(vec![(k, Rational::from_integer(1))], Relation::Le, Rational::from_integer(1));
    }
    for u in 0..inst.vertex_count() {
        let row: Vec<_> = inst.incident(u).iter().map(|&(_, e)| (e, Rational::from_integer(1))).collect();
        if !row.is_empty() {
            lp.add(row, Relation::Le, Rational::from_integer(inst.capacity(u) as i128));
        }
    }
    match lp.maximize() {
        LpOutcome::Optimal { value, point } => (value, point),
        other => unreachable!("matching relaxation is feasible and bounded: {other:?}"),
    }
}
