//! Capacitated bargaining instances, c-matchings, solutions and allocations.
//!
//! Vertices are stored sorted by id, so a vertex index doubles as its rank in
//! the lexicographic order used for every tie-break downstream. Edges are
//! normalized to `u < v` and sorted by `(u, v)`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational used for weights, splits and payoffs.
pub type Rational = Ratio<i128>;

/// Parses `"7"`, `"-2"` or `"35/3"`.
pub fn parse_rational(text: &str) -> Result<Rational, ModelError> {
    let trimmed = text.trim();
    let bad = || ModelError::BadRational(text.to_string());
    match trimmed.split_once('/') {
        Some((num, den)) => {
            let num: i128 = num.trim().parse().map_err(|_| bad())?;
            let den: i128 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
        None => trimmed.parse::<i128>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

pub fn to_float(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

/// Renders a rational as `"n"` or `"n/d"`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("edge ({u:?}, {v:?}) references unknown vertex {missing:?}")]
    DanglingEndpoint { u: String, v: String, missing: String },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("self-loop at vertex {0:?}")]
    SelfLoop(String),
    #[error("parallel edge between {0:?} and {1:?}")]
    ParallelEdge(String, String),
    #[error("edge ({0:?}, {1:?}) has negative weight {2}")]
    NegativeWeight(String, String, String),
    #[error("vertex {0:?} has capacity {1}; capacities must be at least 1")]
    BadCapacity(String, i64),
    #[error("no edge between {0:?} and {1:?} in the instance")]
    UnknownEdge(String, String),
    #[error("edge set exceeds capacity at {0:?}")]
    CapacityExceeded(Vec<String>),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("malformed rational {0:?}")]
    BadRational(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
}

impl Edge {
    /// The endpoint that is not `x`.
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// The game `(G, w, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    ids: Vec<String>,
    capacities: Vec<u32>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    // (neighbor, edge index), sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Instance {
    pub fn new<S, T>(
        vertices: impl IntoIterator<Item = (S, i64)>,
        edges: impl IntoIterator<Item = (T, T, Rational)>,
    ) -> Result<Self, ModelError>
    where
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut verts: Vec<(String, i64)> =
            vertices.into_iter().map(|(id, c)| (id.into(), c)).collect();
        verts.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in verts.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ModelError::DuplicateVertex(pair[0].0.clone()));
            }
        }
        for (id, cap) in &verts {
            if *cap < 1 || *cap > u32::MAX as i64 {
                return Err(ModelError::BadCapacity(id.clone(), *cap));
            }
        }
        let index: HashMap<String, usize> =
            verts.iter().enumerate().map(|(i, (id, _))| (id.clone(), i)).collect();

        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (a, b, weight) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |x: &str| {
                index.get(x).copied().ok_or_else(|| ModelError::DanglingEndpoint {
                    u: a.to_string(),
                    v: b.to_string(),
                    missing: x.to_string(),
                })
            };
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            if ia == ib {
                return Err(ModelError::SelfLoop(a.to_string()));
            }
            if weight.is_negative() {
                return Err(ModelError::NegativeWeight(
                    a.to_string(),
                    b.to_string(),
                    format_rational(&weight),
                ));
            }
            let (u, v) = (ia.min(ib), ia.max(ib));
            if !seen.insert((u, v)) {
                return Err(ModelError::ParallelEdge(a.to_string(), b.to_string()));
            }
            normalized.push(Edge { u, v, weight });
        }
        normalized.sort_by_key(|e| (e.u, e.v));

        let mut adjacency = vec![Vec::new(); verts.len()];
        for (k, e) in normalized.iter().enumerate() {
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        for list in &mut adjacency {
            list.sort();
        }

        Ok(Instance {
            capacities: verts.iter().map(|(_, c)| *c as u32).collect(),
            ids: verts.into_iter().map(|(id, _)| id).collect(),
            edges: normalized,
            index,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, u: usize) -> &str {
        &self.ids[u]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn capacity(&self, u: usize) -> u32 {
        self.capacities[u]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vertex(&self, id: &str) -> Result<usize, ModelError> {
        self.index_of(id).ok_or_else(|| ModelError::UnknownVertex(id.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn weight(&self, e: usize) -> Rational {
        self.edges[e].weight
    }

    /// `(neighbor, edge)` pairs incident to `u`, ordered by neighbor.
    pub fn incident(&self, u: usize) -> &[(usize, usize)] {
        &self.adjacency[u]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(n, _)| n).ok().map(|pos| list[pos].1)
    }

    pub fn edge_by_ids(&self, a: &str, b: &str) -> Result<usize, ModelError> {
        let unknown = || ModelError::UnknownEdge(a.to_string(), b.to_string());
        let (u, v) = (self.index_of(a).ok_or_else(unknown)?, self.index_of(b).ok_or_else(unknown)?);
        self.edge_between(u, v).ok_or_else(unknown)
    }

    pub fn is_unit_capacity(&self) -> bool {
        self.capacities.iter().all(|&c| c == 1)
    }

    /// Least common multiple of all weight denominators (1 for an edgeless instance).
    pub fn weight_denominator_lcm(&self) -> i128 {
        self.edges
            .iter()
            .fold(1i128, |acc, e| num_integer::lcm(acc, *e.weight.denom()))
    }

    /// Same graph and weights with capacities replaced.
    pub fn with_capacities(&self, capacity: impl Fn(&str) -> i64) -> Result<Instance, ModelError> {
        Instance::new(
            self.ids.iter().map(|id| (id.clone(), capacity(id))),
            self.edges
                .iter()
                .map(|e| (self.ids[e.u].as_str(), self.ids[e.v].as_str(), e.weight)),
        )
    }

    /// Same graph with one edge weight replaced.
    pub fn with_weight(&self, a: &str, b: &str, weight: Rational) -> Result<Instance, ModelError> {
        let target = self.edge_by_ids(a, b)?;
        Instance::new(
            self.ids
                .iter()
                .zip(&self.capacities)
                .map(|(id, &c)| (id.clone(), c as i64)),
            self.edges.iter().enumerate().map(|(k, e)| {
                let w = if k == target { weight } else { e.weight };
                (self.ids[e.u].as_str(), self.ids[e.v].as_str(), w)
            }),
        )
    }
}

/// Capacity-feasibility of an arbitrary edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityReport {
    pub feasible: bool,
    /// `(vertex id, degree, capacity)` for each over-full vertex.
    pub violations: Vec<(String, u32, u32)>,
}

/// Checks `|{v : uv in m}| <= c_u` for every vertex.
pub fn is_c_matching<S: AsRef<str>>(
    inst: &Instance,
    pairs: &[(S, S)],
) -> Result<CapacityReport, ModelError> {
    let mut degree = vec![0u32; inst.vertex_count()];
    let mut seen = HashSet::new();
    for (a, b) in pairs {
        let e = inst.edge_by_ids(a.as_ref(), b.as_ref())?;
        if seen.insert(e) {
            degree[inst.edge(e).u] += 1;
            degree[inst.edge(e).v] += 1;
        }
    }
    let violations: Vec<_> = (0..inst.vertex_count())
        .filter(|&u| degree[u] > inst.capacity(u))
        .map(|u| (inst.id(u).to_string(), degree[u], inst.capacity(u)))
        .collect();
    Ok(CapacityReport { feasible: violations.is_empty(), violations })
}

/// An edge subset respecting every vertex capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMatching {
    edges: Vec<usize>,
    member: Vec<bool>,
    degree: Vec<u32>,
}

impl CMatching {
    pub fn new(inst: &Instance, edges: impl IntoIterator<Item = usize>) -> Result<Self, ModelError> {
        let mut member = vec![false; inst.edge_count()];
        let mut degree = vec![0u32; inst.vertex_count()];
        for e in edges {
            if e >= inst.edge_count() {
                return Err(ModelError::InvalidSolution(format!("edge index {e} out of range")));
            }
            if !member[e] {
                member[e] = true;
                degree[inst.edge(e).u] += 1;
                degree[inst.edge(e).v] += 1;
            }
        }
        let over: Vec<String> = (0..inst.vertex_count())
            .filter(|&u| degree[u] > inst.capacity(u))
            .map(|u| inst.id(u).to_string())
            .collect();
        if !over.is_empty() {
            return Err(ModelError::CapacityExceeded(over));
        }
        let edges = (0..member.len()).filter(|&e| member[e]).collect();
        Ok(CMatching { edges, member, degree })
    }

    pub fn empty(inst: &Instance) -> Self {
        CMatching {
            edges: Vec::new(),
            member: vec![false; inst.edge_count()],
            degree: vec![0; inst.vertex_count()],
        }
    }

    pub fn from_pairs<S: AsRef<str>>(inst: &Instance, pairs: &[(S, S)]) -> Result<Self, ModelError> {
        let edges = pairs
            .iter()
            .map(|(a, b)| inst.edge_by_ids(a.as_ref(), b.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        CMatching::new(inst, edges)
    }

    /// Matched edge indices in increasing order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.member[e]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degree(&self, u: usize) -> u32 {
        self.degree[u]
    }

    pub fn is_saturated(&self, inst: &Instance, u: usize) -> bool {
        self.degree[u] == inst.capacity(u)
    }

    pub fn weight(&self, inst: &Instance) -> Rational {
        self.edges.iter().map(|&e| inst.weight(e)).sum()
    }

    /// Matched `(partner, edge)` pairs of `u`, ordered by partner.
    pub fn partners<'a>(
        &'a self,
        inst: &'a Instance,
        u: usize,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        inst.incident(u).iter().copied().filter(move |&(_, e)| self.member[e])
    }

    /// Non-matching `(neighbor, edge)` pairs of `u`, ordered by neighbor.
    pub fn outside<'a>(
        &'a self,
        inst: &'a Instance,
        u: usize,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        inst.incident(u).iter().copied().filter(move |&(_, e)| !self.member[e])
    }

    pub fn pairs<'a>(&'a self, inst: &'a Instance) -> Vec<(&'a str, &'a str)> {
        self.edges
            .iter()
            .map(|&e| (inst.id(inst.edge(e).u), inst.id(inst.edge(e).v)))
            .collect()
    }
}

/// A c-matching with a split `(z_uv, z_vu)` of every instance edge, where `u`
/// is the smaller endpoint index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    matching: CMatching,
    splits: Vec<(Rational, Rational)>,
}

impl Solution {
    pub fn new(
        inst: &Instance,
        matching: CMatching,
        splits: Vec<(Rational, Rational)>,
    ) -> Result<Self, ModelError> {
        if splits.len() != inst.edge_count() {
            return Err(ModelError::InvalidSolution(format!(
                "expected {} edge splits, got {}",
                inst.edge_count(),
                splits.len()
            )));
        }
        for (k, (a, b)) in splits.iter().enumerate() {
            let e = inst.edge(k);
            let name = || format!("({}, {})", inst.id(e.u), inst.id(e.v));
            if a.is_negative() || b.is_negative() {
                return Err(ModelError::InvalidSolution(format!("negative split on {}", name())));
            }
            if matching.contains(k) {
                if *a + *b != e.weight {
                    return Err(ModelError::InvalidSolution(format!(
                        "splits on {} sum to {} but the weight is {}",
                        name(),
                        format_rational(&(*a + *b)),
                        format_rational(&e.weight)
                    )));
                }
            } else if !a.is_zero() || !b.is_zero() {
                return Err(ModelError::InvalidSolution(format!(
                    "unmatched edge {} carries a nonzero split",
                    name()
                )));
            }
        }
        Ok(Solution { matching, splits })
    }

    /// Builds a solution from `(u, v, z_uv, z_vu)` entries; every matched edge needs one.
    pub fn from_split_list<S: AsRef<str>>(
        inst: &Instance,
        matching: CMatching,
        entries: &[(S, S, Rational, Rational)],
    ) -> Result<Self, ModelError> {
        let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
        let mut given = vec![false; inst.edge_count()];
        for (a, b, z_ab, z_ba) in entries {
            let e = inst.edge_by_ids(a.as_ref(), b.as_ref())?;
            let forward = inst.edge(e).u == inst.vertex(a.as_ref())?;
            splits[e] = if forward { (*z_ab, *z_ba) } else { (*z_ba, *z_ab) };
            given[e] = true;
        }
        if let Some(&e) = matching.edges().iter().find(|&&e| !given[e]) {
            let edge = inst.edge(e);
            return Err(ModelError::InvalidSolution(format!(
                "matched edge ({}, {}) has no split",
                inst.id(edge.u),
                inst.id(edge.v)
            )));
        }
        Solution::new(inst, matching, splits)
    }

    /// The all-zero solution on the empty matching.
    pub fn empty(inst: &Instance) -> Self {
        Solution {
            matching: CMatching::empty(inst),
            splits: vec![(Rational::zero(), Rational::zero()); inst.edge_count()],
        }
    }

    pub fn matching(&self) -> &CMatching {
        &self.matching
    }

    pub fn splits(&self) -> &[(Rational, Rational)] {
        &self.splits
    }

    /// `z_{from, other}` on edge `e`.
    pub fn share(&self, inst: &Instance, from: usize, e: usize) -> Rational {
        if inst.edge(e).u == from {
            self.splits[e].0
        } else {
            self.splits[e].1
        }
    }

    /// `z_ab` by vertex index; zero when `ab` is not an edge.
    pub fn z(&self, inst: &Instance, a: usize, b: usize) -> Rational {
        inst.edge_between(a, b).map(|e| self.share(inst, a, e)).unwrap_or_else(Rational::zero)
    }

    /// `z_ab` by vertex id.
    pub fn z_by_ids(&self, inst: &Instance, a: &str, b: &str) -> Result<Rational, ModelError> {
        let e = inst.edge_by_ids(a, b)?;
        Ok(self.share(inst, inst.vertex(a)?, e))
    }
}

/// Per-vertex payoff vector, indexed like the instance's vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation(Vec<Rational>);

impl Allocation {
    pub fn new(values: Vec<Rational>) -> Result<Self, ModelError> {
        if let Some(pos) = values.iter().position(|x| x.is_negative()) {
            return Err(ModelError::InvalidAllocation(format!("negative payoff at position {pos}")));
        }
        Ok(Allocation(values))
    }

    pub fn zeros(n: usize) -> Self {
        Allocation(vec![Rational::zero(); n])
    }

    pub fn uniform(n: usize, value: Rational) -> Self {
        Allocation(vec![value; n])
    }

    pub fn get(&self, u: usize) -> Rational {
        self.0[u]
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    /// `x(S)` for the vertex set encoded as a bitmask.
    pub fn sum_mask(&self, mask: u64) -> Rational {
        let mut total = Rational::zero();
        let mut rest = mask;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            total += self.0[u];
            rest &= rest - 1;
        }
        total
    }
}

/// `x_u = sum of z_uv over u's matched edges`.
pub fn allocation_of(inst: &Instance, sol: &Solution) -> Allocation {
    let mut values = vec![Rational::zero(); inst.vertex_count()];
    for &e in sol.matching().edges() {
        let edge = inst.edge(e);
        let (zu, zv) = sol.splits()[e];
        values[edge.u] += zu;
        values[edge.v] += zv;
    }
    Allocation(values)
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vertices, {} edges", self.vertex_count(), self.edge_count())
    }
}
