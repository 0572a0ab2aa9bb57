//! Random instances, matchings, splits and labellings for property suites.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{CMatching, Instance, Rational, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Family {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_capacity: u32,
    pub max_weight: i64,
    /// Edge probability in percent.
    pub density: u32,
}

impl Default for Family {
    fn default() -> Self {
        Family { min_vertices: 2, max_vertices: 8, max_capacity: 3, max_weight: 10, density: 45 }
    }
}

fn vertex_name(i: usize) -> String {
    format!("v{i}")
}

fn assemble(caps: &[u32], edges: &[(usize, usize, i64)]) -> Instance {
    let names: Vec<String> = (0..caps.len()).map(vertex_name).collect();
    Instance::new(
        names.iter().zip(caps).map(|(n, &c)| (n.as_str(), c as i64)),
        edges.iter().map(|&(a, b, w)| (names[a].as_str(), names[b].as_str(), Rational::from_integer(w as i128))),
    )
    .expect("generated instance is well formed")
}

pub fn random_instance<R: Rng>(rng: &mut R, family: &Family) -> Instance {
    let n = rng.gen_range(family.min_vertices..=family.max_vertices);
    let caps: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=family.max_capacity)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_range(0..100) < family.density {
                edges.push((a, b, rng.gen_range(1..=family.max_weight)));
            }
        }
    }
    assemble(&caps, &edges)
}

/// Random tree: vertex `i > 0` hangs off a uniformly chosen earlier vertex.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, max_capacity: u32, max_weight: i64) -> Instance {
    let caps: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_capacity)).collect();
    let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i, rng.gen_range(1..=max_weight))).collect();
    assemble(&caps, &edges)
}

/// Greedy c-matching over a shuffled edge order, each edge kept with probability 1/2.
pub fn random_c_matching<R: Rng>(rng: &mut R, inst: &Instance) -> CMatching {
    let mut order: Vec<usize> = (0..inst.edge_count()).collect();
    order.shuffle(rng);
    let mut room: Vec<u32> = (0..inst.vertex_count()).map(|u| inst.capacity(u)).collect();
    let mut chosen = Vec::new();
    for e in order {
        let edge = inst.edge(e);
        if room[edge.u] > 0 && room[edge.v] > 0 && rng.gen_bool(0.5) {
            room[edge.u] -= 1;
            room[edge.v] -= 1;
            chosen.push(e);
        }
    }
    CMatching::new(inst, chosen).expect("capacities respected")
}

/// Random split of every matched edge with denominators dividing `den`.
pub fn random_solution<R: Rng>(rng: &mut R, inst: &Instance, m: &CMatching, den: i128) -> Solution {
    let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
    for &e in m.edges() {
        let w = inst.weight(e);
        let share = w * Rational::new(rng.gen_range(0..=den), den);
        splits[e] = (share, w - share);
    }
    Solution::new(inst, m.clone(), splits).expect("shares lie in [0, w]")
}

/// A random ordering of each vertex's matched partners.
pub fn random_labels<R: Rng>(rng: &mut R, inst: &Instance, m: &CMatching) -> Vec<Vec<usize>> {
    (0..inst.vertex_count())
        .map(|u| {
            let mut partners: Vec<usize> = m.partners(inst, u).map(|(v, _)| v).collect();
            partners.shuffle(rng);
            partners
        })
        .collect()
}

/// Stable solutions on `m` as a polyhedron over the shares: variable `2k` is
/// the share of `edge.u` on the `k`-th matched edge, `2k + 1` that of `edge.v`.
/// `z_ab >= alpha_a` and `alpha_u = 0` for unsaturated `u` both unfold into
/// linear rows because the weakest contract enters through a minimum.
pub fn stable_polyhedron(inst: &Instance, m: &CMatching) -> LinearProgram {
    let k = m.len();
    let one = Rational::from_integer(1);
    let mut lp = LinearProgram::new(2 * k);
    // share variables held by each vertex
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); inst.vertex_count()];
    for (i, &e) in m.edges().iter().enumerate() {
        let edge = inst.edge(e);
        lp.add(vec![(2 * i, one), (2 * i + 1, one)], Relation::Eq, edge.weight);
        held[edge.u].push(2 * i);
        held[edge.v].push(2 * i + 1);
    }
    for u in 0..inst.vertex_count() {
        let saturated = m.is_saturated(inst, u);
        for (v, e) in m.outside(inst, u) {
            let w = inst.weight(e);
            let v_saturated = m.is_saturated(inst, v);
            if saturated {
                // every share of u covers w_uv minus v's weakest share
                for &a in &held[u] {
                    if v_saturated {
                        for &b in &held[v] {
                            lp.add(vec![(a, one), (b, one)], Relation::Ge, w);
                        }
                    } else {
                        lp.add(vec![(a, one)], Relation::Ge, w);
                    }
                }
            } else if v_saturated {
                // alpha_u = 0: every share of v is at least w_uv
                for &b in &held[v] {
                    lp.add(vec![(b, one)], Relation::Ge, w);
                }
            } else if w > Rational::zero() {
                // infeasible: two unsaturated endpoints of a positive edge
                lp.add(Vec::new(), Relation::Ge, w);
            }
        }
    }
    lp
}

fn to_solution(inst: &Instance, m: &CMatching, point: &[Rational]) -> Solution {
    let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
    for (i, &e) in m.edges().iter().enumerate() {
        splits[e] = (point[2 * i], point[2 * i + 1]);
    }
    Solution::new(inst, m.clone(), splits).expect("polyhedron rows keep shares valid")
}

/// A random stable solution on `m`: a convex combination of two vertices of
/// the stable polyhedron picked by random objectives. `None` if empty.
pub fn random_stable_solution<R: Rng>(rng: &mut R, inst: &Instance, m: &CMatching) -> Option<Solution> {
    let base = stable_polyhedron(inst, m);
    let vertex = |rng: &mut R| {
        let mut lp = base.clone();
        for j in 0..lp.vars() {
            lp.set_objective(j, Rational::from_integer(rng.gen_range(-5..=5)));
        }
        match lp.maximize() {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    };
    let a = vertex(rng)?;
    let b = vertex(rng)?;
    let t = Rational::new(rng.gen_range(0..=4), 4);
    let mixed: Vec<Rational> = a.iter().zip(&b).map(|(p, q)| *p * t + *q * (Rational::from_integer(1) - t)).collect();
    Some(to_solution(inst, m, &mixed))
}
