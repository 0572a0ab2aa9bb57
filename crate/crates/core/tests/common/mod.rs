//! Brute-force oracles written directly from the definitions, sharing no code
//! with the library beyond the data model.

#![allow(dead_code)]

use std::collections::HashMap;

use bargain_core::model::{Allocation, Instance, Rational, Solution};
use num_traits::Zero;

/// Maximum weight of a c-matching using only edges inside `mask`, by
/// include/exclude search over the edge list.
pub fn max_c_matching_weight(inst: &Instance, mask: u64) -> Rational {
    let edges: Vec<(usize, usize, Rational)> = inst
        .edges()
        .iter()
        .filter(|e| mask >> e.u & 1 == 1 && mask >> e.v & 1 == 1)
        .map(|e| (e.u, e.v, e.weight))
        .collect();
    let mut room: Vec<u32> = (0..inst.vertex_count()).map(|u| inst.capacity(u)).collect();
    fn go(k: usize, edges: &[(usize, usize, Rational)], room: &mut [u32]) -> Rational {
        if k == edges.len() {
            return Rational::zero();
        }
        let (u, v, w) = edges[k];
        let mut best = go(k + 1, edges, room);
        if room[u] > 0 && room[v] > 0 {
            room[u] -= 1;
            room[v] -= 1;
            best = best.max(w + go(k + 1, edges, room));
            room[u] += 1;
            room[v] += 1;
        }
        best
    }
    go(0, &edges, &mut room)
}

pub fn full_mask(n: usize) -> u64 {
    (1u64 << n) - 1
}

/// Maximum matching weight of a unit-capacity instance: the lowest free
/// vertex is either left out or matched to a free neighbour; memoised on the
/// set of decided vertices.
pub fn max_matching_weight(inst: &Instance) -> Rational {
    let n = inst.vertex_count();
    assert!(n <= 64);
    let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for e in inst.edges() {
        adj[e.u].push((e.v, e.weight));
        adj[e.v].push((e.u, e.weight));
    }
    fn go(done: u64, n: usize, adj: &[Vec<(usize, Rational)>], memo: &mut HashMap<u64, Rational>) -> Rational {
        let Some(u) = (0..n).find(|&u| done >> u & 1 == 0) else {
            return Rational::zero();
        };
        if let Some(v) = memo.get(&done) {
            return *v;
        }
        let mut best = go(done | 1 << u, n, adj, memo);
        for &(v, w) in &adj[u] {
            if done >> v & 1 == 0 {
                best = best.max(w + go(done | 1 << u | 1 << v, n, adj, memo));
            }
        }
        memo.insert(done, best);
        best
    }
    go(0, n, &adj, &mut HashMap::new())
}

fn matched_shares(inst: &Instance, sol: &Solution, u: usize) -> Vec<Rational> {
    sol.matching()
        .edges()
        .iter()
        .filter_map(|&e| {
            let edge = inst.edge(e);
            if edge.u == u {
                Some(sol.splits()[e].0)
            } else if edge.v == u {
                Some(sol.splits()[e].1)
            } else {
                None
            }
        })
        .collect()
}

/// `alpha_u = max(0, max over non-matching uv of w_uv - (v saturated ? min share of v : 0))`.
pub fn alpha(inst: &Instance, sol: &Solution, u: usize) -> Rational {
    let mut best = Rational::zero();
    for (k, e) in inst.edges().iter().enumerate() {
        if !(e.u == u || e.v == u) || sol.matching().contains(k) {
            continue;
        }
        let v = if e.u == u { e.v } else { e.u };
        let shares = matched_shares(inst, sol, v);
        let price = if shares.len() as u32 == inst.capacity(v) {
            shares.iter().copied().min().unwrap_or_else(Rational::zero)
        } else {
            Rational::zero()
        };
        best = best.max(e.weight - price);
    }
    best
}

pub fn stable(inst: &Instance, sol: &Solution) -> bool {
    (0..inst.vertex_count()).all(|u| {
        let a = alpha(inst, sol, u);
        let shares = matched_shares(inst, sol, u);
        let unsaturated = (shares.len() as u32) < inst.capacity(u);
        shares.iter().all(|z| *z >= a) && (!unsaturated || a.is_zero())
    })
}

pub fn balanced(inst: &Instance, sol: &Solution) -> bool {
    stable(inst, sol)
        && sol.matching().edges().iter().all(|&e| {
            let edge = inst.edge(e);
            let (zu, zv) = sol.splits()[e];
            zu - alpha(inst, sol, edge.u) == zv - alpha(inst, sol, edge.v)
        })
}

/// Coalition values by brute force: `nu[mask]`.
pub fn coalition_values(inst: &Instance) -> Vec<Rational> {
    (0..1u64 << inst.vertex_count()).map(|m| max_c_matching_weight(inst, m)).collect()
}

/// `s_uv(x) = max { nu(T) - x(T) : u in T, v not in T }`.
pub fn power(nu: &[Rational], x: &Allocation, u: usize, v: usize) -> Rational {
    (0..nu.len() as u64)
        .filter(|m| m >> u & 1 == 1 && m >> v & 1 == 0)
        .map(|m| nu[m as usize] - (0..x.len()).filter(|&i| m >> i & 1 == 1).map(|i| x.get(i)).sum::<Rational>())
        .max()
        .expect("the singleton of u qualifies")
}

pub fn in_core(nu: &[Rational], x: &Allocation) -> bool {
    let total: Rational = x.values().iter().copied().sum();
    total == nu[nu.len() - 1]
        && (0..nu.len() as u64).all(|m| {
            (0..x.len()).filter(|&i| m >> i & 1 == 1).map(|i| x.get(i)).sum::<Rational>() >= nu[m as usize]
        })
}

pub fn in_prekernel(nu: &[Rational], x: &Allocation) -> bool {
    let n = x.len();
    (0..n).all(|u| (0..n).all(|v| u == v || power(nu, x, u, v) == power(nu, x, v, u)))
}
