//! The matching game: coalition values, powers, core and prekernel tests,
//! gadget detection, and the balanced-iff-prekernel harness for acyclic
//! matchings without bad vertices.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cmatching::{induced_optimum, is_acyclic, SolverError, EXACT_EDGE_LIMIT};
use crate::model::{allocation_of, Allocation, CMatching, Instance, Rational, Solution};
use crate::semantics::{is_balanced, is_stable, offer, outside_options, weakest_contract};

/// Coalition enumeration is capped at this many players.
pub const MAX_PLAYERS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoopError {
    #[error("{players} players exceed the coalition enumeration limit of {limit}; reduce the instance or split it into components")]
    TooManyPlayers { players: usize, limit: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("allocation has {got} entries for {want} players")]
    WrongLength { got: usize, want: usize },
    #[error("allocation is not in the core: {0}")]
    NotInCore(String),
    #[error("solution is not stable")]
    NotStable,
    #[error("allocation differs from the solution's allocation")]
    AllocationMismatch,
}

fn guard(inst: &Instance) -> Result<(), CoopError> {
    if inst.vertex_count() > MAX_PLAYERS {
        return Err(CoopError::TooManyPlayers { players: inst.vertex_count(), limit: MAX_PLAYERS });
    }
    Ok(())
}

fn check_len(inst: &Instance, x: &Allocation) -> Result<(), CoopError> {
    if x.len() != inst.vertex_count() {
        return Err(CoopError::WrongLength { got: x.len(), want: inst.vertex_count() });
    }
    Ok(())
}

pub fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

pub fn mask_of(members: &[usize]) -> u64 {
    members.iter().fold(0, |m, &i| m | 1 << i)
}

/// Lexicographic order of the sorted member lists.
pub fn lex_cmp(a: u64, b: u64) -> Ordering {
    mask_members(a).cmp(&mask_members(b))
}

/// `nu(S)` for a single coalition.
pub fn coalition_value(inst: &Instance, members: &[usize]) -> Result<Rational, CoopError> {
    Ok(induced_optimum(inst, mask_of(members), EXACT_EDGE_LIMIT)?)
}

/// `nu(S)` for every coalition, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct CoalitionValueTable {
    players: usize,
    values: Vec<Rational>,
}

impl CoalitionValueTable {
    pub fn build(inst: &Instance) -> Result<Self, CoopError> {
        guard(inst)?;
        let n = inst.vertex_count();
        let values = (0..1u64 << n)
            .map(|mask| induced_optimum(inst, mask, EXACT_EDGE_LIMIT))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CoalitionValueTable { players: n, values })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn value(&self, mask: u64) -> Rational {
        self.values[mask as usize]
    }

    pub fn grand(&self) -> Rational {
        self.values[self.values.len() - 1]
    }

    /// `nu(S) - x(S)` per coalition.
    fn excesses(&self, x: &Allocation) -> Vec<Rational> {
        let mut sums = vec![Rational::zero(); self.values.len()];
        for mask in 1..self.values.len() {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + x.get(low);
        }
        self.values.iter().zip(&sums).map(|(v, s)| *v - *s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Power {
    pub value: Rational,
    /// Lexicographically least maximizer.
    pub witness: u64,
}

fn best_over(excess: &[Rational], u: usize, v: usize) -> Power {
    let mut best: Option<Power> = None;
    for (mask, e) in excess.iter().enumerate() {
        let mask = mask as u64;
        if mask >> u & 1 == 0 || mask >> v & 1 == 1 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => *e > b.value || (*e == b.value && lex_cmp(mask, b.witness) == Ordering::Less),
        };
        if better {
            best = Some(Power { value: *e, witness: mask });
        }
    }
    best.expect("{u} alone is a candidate")
}

/// `s_uv(x)` with its witness coalition.
pub fn power(table: &CoalitionValueTable, x: &Allocation, u: usize, v: usize) -> Power {
    assert_ne!(u, v, "power needs two distinct players");
    best_over(&table.excesses(x), u, v)
}

#[derive(Debug, Clone)]
pub struct PowerMatrix {
    players: usize,
    entries: Vec<Option<Power>>,
}

impl PowerMatrix {
    pub fn compute(table: &CoalitionValueTable, x: &Allocation) -> Self {
        let n = table.players();
        let excess = table.excesses(x);
        let mut entries = vec![None; n * n];
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    entries[u * n + v] = Some(best_over(&excess, u, v));
                }
            }
        }
        PowerMatrix { players: n, entries }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn get(&self, u: usize, v: usize) -> &Power {
        self.entries[u * self.players + v].as_ref().expect("distinct players")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreReport {
    pub in_core: bool,
    pub grand_value: Rational,
    pub total: Rational,
    /// Coalition of maximum excess when that excess is positive (least mask
    /// in lexicographic order among ties).
    pub violation: Option<(u64, Rational)>,
}

pub fn in_core(table: &CoalitionValueTable, x: &Allocation) -> CoreReport {
    let excess = table.excesses(x);
    let mut worst: Option<(u64, Rational)> = None;
    for (mask, e) in excess.iter().enumerate() {
        let mask = mask as u64;
        if !e.is_positive() {
            continue;
        }
        let better = match &worst {
            None => true,
            Some((m, w)) => e > w || (e == w && lex_cmp(mask, *m) == Ordering::Less),
        };
        if better {
            worst = Some((mask, *e));
        }
    }
    let total = x.total();
    CoreReport { in_core: worst.is_none() && total == table.grand(), grand_value: table.grand(), total, violation: worst }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrekernelReport {
    pub in_prekernel: bool,
    /// First pair `(u, v)`, `u < v`, with `s_uv != s_vu`.
    pub violation: Option<(usize, usize, Rational, Rational)>,
}

pub fn in_prekernel(powers: &PowerMatrix) -> PrekernelReport {
    let n = powers.players();
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = (powers.get(u, v).value, powers.get(v, u).value);
            if a != b {
                return PrekernelReport { in_prekernel: false, violation: Some((u, v, a, b)) };
            }
        }
    }
    PrekernelReport { in_prekernel: true, violation: None }
}

/// Convenience wrappers that build the table themselves.
pub fn core_check(inst: &Instance, x: &Allocation) -> Result<CoreReport, CoopError> {
    check_len(inst, x)?;
    Ok(in_core(&CoalitionValueTable::build(inst)?, x))
}

pub fn prekernel_check(inst: &Instance, x: &Allocation) -> Result<PrekernelReport, CoopError> {
    check_len(inst, x)?;
    let table = CoalitionValueTable::build(inst)?;
    Ok(in_prekernel(&PowerMatrix::compute(&table, x)))
}

/// Vertex path from `from` to `to` using matched edges only, never entering `avoid`.
pub fn matching_path(
    inst: &Instance,
    m: &CMatching,
    from: usize,
    to: usize,
    avoid: Option<usize>,
) -> Option<Vec<usize>> {
    if Some(from) == avoid || Some(to) == avoid {
        return None;
    }
    let n = inst.vertex_count();
    let mut prev = vec![usize::MAX; n];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(a) = queue.pop_front() {
        if a == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = prev[c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for (b, _) in m.partners(inst, a) {
            if prev[b] == usize::MAX && Some(b) != avoid {
                prev[b] = a;
                queue.push_back(b);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetEntry {
    pub u: usize,
    /// Matched neighbor of `u`.
    pub v: usize,
    /// Best outside option of `u`.
    pub v_prime: usize,
    /// Weakest contract of `v_prime` when it is saturated.
    pub u_prime: Option<usize>,
    /// `v - v'` path in M.
    pub type1: Option<Vec<usize>>,
    /// `u - u'` path in M avoiding `v'`.
    pub type2: Option<Vec<usize>>,
}

impl GadgetEntry {
    pub fn is_gadget(&self) -> bool {
        self.type1.is_some() || self.type2.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetReport {
    pub entries: Vec<GadgetEntry>,
    pub bad: Vec<usize>,
    /// Vertices whose verdict depends on how ties in `v'` or `u'` are broken.
    pub tie_sensitive: Vec<usize>,
}

fn gadget_entries(
    inst: &Instance,
    sol: &Solution,
    u: usize,
    v_prime: usize,
    u_prime: Option<usize>,
) -> Vec<GadgetEntry> {
    let m = sol.matching();
    m.partners(inst, u)
        .map(|(v, _)| GadgetEntry {
            u,
            v,
            v_prime,
            u_prime,
            type1: matching_path(inst, m, v, v_prime, None),
            type2: u_prime.and_then(|up| matching_path(inst, m, u, up, Some(v_prime))),
        })
        .collect()
}

/// All `(v', u')` resolutions attaining `alpha_u`.
fn resolutions(inst: &Instance, sol: &Solution, u: usize, alpha: Rational) -> Vec<(usize, Option<usize>)> {
    let m = sol.matching();
    let mut out = Vec::new();
    for (vp, e) in m.outside(inst, u) {
        let (value, _) = offer(inst, sol, vp, e);
        if value != alpha {
            continue;
        }
        if m.is_saturated(inst, vp) {
            let (weakest, _) = weakest_contract(inst, sol, vp).expect("saturated");
            for (up, f) in m.partners(inst, vp) {
                if sol.share(inst, vp, f) == weakest {
                    out.push((vp, Some(up)));
                }
            }
        } else {
            out.push((vp, None));
        }
    }
    out
}

/// Gadgets around every vertex with a positive outside option.
pub fn detect_bad_vertices(inst: &Instance, sol: &Solution) -> GadgetReport {
    let alpha = outside_options(inst, sol);
    let mut entries = Vec::new();
    let mut bad = Vec::new();
    let mut tie_sensitive = Vec::new();
    for u in 0..inst.vertex_count() {
        if !alpha[u].is_positive() {
            continue;
        }
        let options = resolutions(inst, sol, u, alpha[u]);
        let verdicts: Vec<bool> = options
            .iter()
            .map(|&(vp, up)| gadget_entries(inst, sol, u, vp, up).iter().any(GadgetEntry::is_gadget))
            .collect();
        // options[0] is the lexicographically least v' and u'
        let (vp, up) = options[0];
        let chosen = gadget_entries(inst, sol, u, vp, up);
        if chosen.iter().any(GadgetEntry::is_gadget) {
            bad.push(u);
        }
        if verdicts.iter().any(|&b| b != verdicts[0]) {
            tie_sensitive.push(u);
        }
        entries.extend(chosen);
    }
    GadgetReport { entries, bad, tie_sensitive }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma2Check {
    pub u: usize,
    pub v: usize,
    pub power: Rational,
    /// `-z_uv + alpha_u`
    pub bound: Rational,
}

impl Lemma2Check {
    pub fn holds(&self) -> bool {
        self.power <= self.bound
    }

    pub fn tight(&self) -> bool {
        self.power == self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Verdict {
    pub acyclic: bool,
    pub bad_vertices: Vec<usize>,
    pub balanced: bool,
    pub prekernel: PrekernelReport,
    pub power_bounds: Vec<Lemma2Check>,
}

impl Theorem1Verdict {
    pub fn conditions_met(&self) -> bool {
        self.acyclic && self.bad_vertices.is_empty()
    }

    pub fn sides_agree(&self) -> bool {
        self.balanced == self.prekernel.in_prekernel
    }

    pub fn power_bounds_hold(&self) -> bool {
        self.power_bounds.iter().all(Lemma2Check::holds)
    }

    /// False only when the conditions hold and a predicted relation fails.
    pub fn confirmed(&self) -> bool {
        !self.conditions_met() || (self.sides_agree() && self.power_bounds_hold())
    }
}

/// Evaluates both sides of the balanced-iff-prekernel statement for a stable
/// solution whose allocation lies in the core.
pub fn theorem1_harness(
    inst: &Instance,
    table: &CoalitionValueTable,
    x: &Allocation,
    sol: &Solution,
) -> Result<Theorem1Verdict, CoopError> {
    guard(inst)?;
    check_len(inst, x)?;
    if &allocation_of(inst, sol) != x {
        return Err(CoopError::AllocationMismatch);
    }
    if !is_stable(inst, sol).stable {
        return Err(CoopError::NotStable);
    }
    let core = in_core(table, x);
    if !core.in_core {
        let why = match core.violation {
            Some((mask, e)) => format!("coalition {:?} has excess {e}", mask_members(mask)),
            None => format!("x(N) = {} but nu(N) = {}", core.total, core.grand_value),
        };
        return Err(CoopError::NotInCore(why));
    }
    let powers = PowerMatrix::compute(table, x);
    let alpha = outside_options(inst, sol);
    let mut power_bounds = Vec::new();
    for &e in sol.matching().edges() {
        let edge = inst.edge(e);
        for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
            power_bounds.push(Lemma2Check {
                u: a,
                v: b,
                power: powers.get(a, b).value,
                bound: alpha[a] - sol.z(inst, a, b),
            });
        }
    }
    Ok(Theorem1Verdict {
        acyclic: is_acyclic(inst, sol.matching()),
        bad_vertices: detect_bad_vertices(inst, sol).bad,
        balanced: is_balanced(inst, sol).balanced,
        prekernel: in_prekernel(&powers),
        power_bounds,
    })
}

/// Both sides of `w(M_S) - x(S) = -sum_{ab in M, a in S, b not in S} z_ab`.
pub fn cut_identity(inst: &Instance, sol: &Solution, mask: u64) -> (Rational, Rational) {
    let inside = |a: usize| mask >> a & 1 == 1;
    let x = allocation_of(inst, sol);
    let mut lhs = -x.sum_mask(mask);
    let mut rhs = Rational::zero();
    for &e in sol.matching().edges() {
        let edge = inst.edge(e);
        match (inside(edge.u), inside(edge.v)) {
            (true, true) => lhs += edge.weight,
            (true, false) => rhs -= sol.z(inst, edge.u, edge.v),
            (false, true) => rhs -= sol.z(inst, edge.v, edge.u),
            (false, false) => {}
        }
    }
    (lhs, rhs)
}
