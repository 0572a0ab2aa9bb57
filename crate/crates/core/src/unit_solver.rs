//! Balanced solutions of unit-capacity games on a fixed maximum-weight matching.
//!
//! The solver first looks for any stable payoff vector on the matching with an
//! exact LP. If there is none, the matching is either not maximum or the
//! matching relaxation has a fractional gap; the two are told apart by an
//! exhaustive search for the integral optimum and the gap is returned as the
//! certificate.
//!
//! Otherwise a balanced point is located in one of two ways:
//!
//! * numeric-then-exact: damped synchronous edge rebalancing from the stable
//!   point, then rational reconstruction with bounded denominators. If the
//!   snapped point does not verify, the outside-option witnesses that are
//!   tight at the numeric limit select one witness pattern, which is solved
//!   exactly;
//! * exact enumeration: depth-first search over witness patterns (which
//!   neighbor, if any, attains each vertex's outside option). Each pattern
//!   turns balance into linear constraints; an exact LP decides feasibility
//!   and any feasible point of a complete pattern is balanced.
//!
//! Whatever route produced a point, it is only reported after
//! [`exact_verify`] finds every residual exactly zero.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cmatching::{max_weight_c_matching_limited, relaxation_optimum_simplex, SolverError};
use crate::lp::{LinearProgram, Relation};
use crate::model::{to_float, Allocation, CMatching, Instance, Rational};
use crate::semantics::{check_unit_solution, unit_outside_options, SemanticsError};

/// Witness-pattern enumeration handles at most this many matched edges.
pub const EXACT_MATCHED_EDGE_LIMIT: usize = 12;
/// Edge limit for the exhaustive search that separates "not maximum" from
/// "relaxation gap" on unit instances.
pub const UNIT_OPTIMUM_EDGE_LIMIT: usize = 96;
/// Largest exponent `k` tried for the denominator bound `3 * 2^k * lcm`.
pub const MAX_SNAP_EXPONENT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    NumericThenExact,
    ExactEnumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::NumericThenExact,
            tolerance: 1e-9,
            max_iterations: 100_000,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn exact() -> Self {
        SolverConfig { mode: SolverMode::ExactEnumeration, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), UnitSolverError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(UnitSolverError::InvalidConfig(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(UnitSolverError::InvalidConfig("max-iterations must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(UnitSolverError::InvalidConfig(format!("damping {} must lie in (0, 1]", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitSolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    TooLarge(#[from] SolverError),
    #[error("matching weight {matching} is below the optimum {optimum}; a balanced solution must sit on a maximum-weight matching")]
    NotMaximum { matching: Rational, optimum: Rational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// `alpha_u - x_u`, clipped at 0.
    Stability,
    /// `(x_u - alpha_u) - (x_v - alpha_v)` on a matched edge.
    Balance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionResidual {
    pub kind: ConditionKind,
    pub vertex: usize,
    pub partner: Option<usize>,
    pub residual: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationTranscript {
    pub conditions: Vec<ConditionResidual>,
    pub balanced: bool,
}

impl VerificationTranscript {
    pub fn nonzero(&self) -> impl Iterator<Item = &ConditionResidual> {
        self.conditions.iter().filter(|c| !c.residual.is_zero())
    }
}

/// Exact evaluation of every stability and balance condition of `(m, x)`.
pub fn exact_verify(
    inst: &Instance,
    m: &CMatching,
    x: &Allocation,
) -> Result<VerificationTranscript, UnitSolverError> {
    require_unit(inst)?;
    check_unit_solution(inst, m, x)?;
    let alpha = unit_outside_options(inst, m, x);
    let mut conditions = Vec::new();
    for u in 0..inst.vertex_count() {
        conditions.push(ConditionResidual {
            kind: ConditionKind::Stability,
            vertex: u,
            partner: None,
            residual: (alpha[u] - x.get(u)).max(Rational::zero()),
        });
    }
    for &e in m.edges() {
        let edge = inst.edge(e);
        conditions.push(ConditionResidual {
            kind: ConditionKind::Balance,
            vertex: edge.u,
            partner: Some(edge.v),
            residual: (x.get(edge.u) - alpha[edge.u]) - (x.get(edge.v) - alpha[edge.v]),
        });
    }
    let balanced = conditions.iter().all(|c| c.residual.is_zero());
    Ok(VerificationTranscript { conditions, balanced })
}

fn require_unit(inst: &Instance) -> Result<(), UnitSolverError> {
    match (0..inst.vertex_count()).find(|&u| inst.capacity(u) != 1) {
        Some(u) => Err(SemanticsError::NotUnitCapacity(inst.id(u).to_string(), inst.capacity(u)).into()),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpGapCertificate {
    pub fractional_optimum: Rational,
    pub integral_optimum: Rational,
    /// Optimal relaxation value per edge.
    pub fractional_witness: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeStatus {
    BalancedFound,
    NoneExists,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Numeric limit rounded with this denominator bound.
    Snapped { denominator_bound: i128 },
    /// Witness pattern read off the numeric limit.
    ActivePattern,
    /// Full witness-pattern enumeration.
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Verified { transcript: VerificationTranscript, route: Route },
    LpGap(LpGapCertificate),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedOutcome {
    pub status: OutcomeStatus,
    pub allocation: Option<Allocation>,
    pub certificate: Certificate,
    /// Rebalancing sweeps performed (0 in exact mode).
    pub iterations: usize,
}

/// Whether the unit instance admits a stable solution, decided by the
/// integrality of the matching relaxation.
pub fn stable_exists_unit(inst: &Instance) -> Result<(bool, crate::cmatching::LpRelaxationResult), UnitSolverError> {
    require_unit(inst)?;
    let lp = crate::cmatching::lp_integrality_check(inst)?;
    Ok((lp.has_integral_optimal, lp))
}

/// `a . t + constant` over the per-matched-edge variables.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Affine {
    terms: Vec<(usize, Rational)>,
    constant: Rational,
}

impl Affine {
    fn constant(c: Rational) -> Self {
        Affine { terms: Vec::new(), constant: c }
    }

    fn combine(&self, other: &Affine, sign: Rational) -> Affine {
        let mut terms = self.terms.clone();
        for (j, a) in &other.terms {
            match terms.iter_mut().find(|(k, _)| k == j) {
                Some((_, b)) => *b += *a * sign,
                None => terms.push((*j, *a * sign)),
            }
        }
        terms.retain(|(_, a)| !a.is_zero());
        terms.sort_by_key(|(j, _)| *j);
        Affine { terms, constant: self.constant + other.constant * sign }
    }

    fn plus(&self, other: &Affine) -> Affine {
        self.combine(other, Rational::from_integer(1))
    }

    fn minus(&self, other: &Affine) -> Affine {
        self.combine(other, Rational::from_integer(-1))
    }

    fn eval(&self, t: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| *a * t[*j]).sum::<Rational>() + self.constant
    }
}

/// `expr rel 0`
#[derive(Debug, Clone)]
struct Row {
    expr: Affine,
    relation: Relation,
}

/// Payoffs on a matching as affine functions of one variable per matched
/// edge: the smaller endpoint receives `t_k`, the other `w - t_k`.
struct Frame<'a> {
    inst: &'a Instance,
    m: &'a CMatching,
    var_of: Vec<Option<usize>>,
}

impl<'a> Frame<'a> {
    fn new(inst: &'a Instance, m: &'a CMatching) -> Self {
        let mut var_of = vec![None; inst.vertex_count()];
        for (k, &e) in m.edges().iter().enumerate() {
            var_of[inst.edge(e).u] = Some(k);
            var_of[inst.edge(e).v] = Some(k);
        }
        Frame { inst, m, var_of }
    }

    fn vars(&self) -> usize {
        self.m.len()
    }

    fn payoff(&self, u: usize) -> Affine {
        match self.var_of[u] {
            None => Affine::constant(Rational::zero()),
            Some(k) => {
                let edge = self.inst.edge(self.m.edges()[k]);
                if edge.u == u {
                    Affine { terms: vec![(k, Rational::from_integer(1))], constant: Rational::zero() }
                } else {
                    Affine { terms: vec![(k, Rational::from_integer(-1))], constant: edge.weight }
                }
            }
        }
    }

    /// `w_uv - x_v`
    fn offer(&self, v: usize, e: usize) -> Affine {
        Affine::constant(self.inst.weight(e)).minus(&self.payoff(v))
    }

    fn allocation(&self, t: &[Rational]) -> Allocation {
        Allocation::new((0..self.inst.vertex_count()).map(|u| self.payoff(u).eval(t)).collect())
            .expect("bounded variables give nonnegative payoffs")
    }

    fn bound_rows(&self) -> Vec<Row> {
        self.m
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &e)| Row {
                expr: Affine { terms: vec![(k, Rational::from_integer(1))], constant: -self.inst.weight(e) },
                relation: Relation::Le,
            })
            .collect()
    }

    /// Returns a point satisfying all rows, or `None`.
    fn solve(&self, rows: &[Row]) -> Option<Vec<Rational>> {
        let mut lp = LinearProgram::new(self.vars());
        for row in rows {
            if row.expr.terms.is_empty() {
                let c = row.expr.constant;
                let ok = match row.relation {
                    Relation::Le => !c.is_positive(),
                    Relation::Ge => !c.is_negative(),
                    Relation::Eq => c.is_zero(),
                };
                if !ok {
                    return None;
                }
                continue;
            }
            lp.add(row.expr.terms.clone(), row.relation, -row.expr.constant);
        }
        lp.feasible_point()
    }
}

/// Any stable payoff vector on `m`, found by exact LP feasibility.
pub fn find_stable_unit(inst: &Instance, m: &CMatching) -> Result<Option<Allocation>, UnitSolverError> {
    require_unit(inst)?;
    let frame = Frame::new(inst, m);
    let mut rows = frame.bound_rows();
    for (k, e) in inst.edges().iter().enumerate() {
        if !m.contains(k) {
            // x_u + x_v >= w_uv
            let expr = frame.payoff(e.u).plus(&frame.payoff(e.v)).minus(&Affine::constant(e.weight));
            rows.push(Row { expr, relation: Relation::Ge });
        }
    }
    Ok(frame.solve(&rows).map(|t| frame.allocation(&t)))
}

enum Existence {
    Stable(Allocation),
    Gap(LpGapCertificate),
}

fn decide_existence(inst: &Instance, m: &CMatching, known: Option<Rational>) -> Result<Existence, UnitSolverError> {
    let weight = m.weight(inst);
    if let Some(optimum) = known {
        if weight != optimum {
            return Err(UnitSolverError::NotMaximum { matching: weight, optimum });
        }
    }
    if let Some(x) = find_stable_unit(inst, m)? {
        // A stable payoff vector is a dual solution of value w(m): m is maximum.
        return Ok(Existence::Stable(x));
    }
    let optimum = match known {
        Some(optimum) => optimum,
        None => max_weight_c_matching_limited(inst, UNIT_OPTIMUM_EDGE_LIMIT)?.1,
    };
    if weight < optimum {
        return Err(UnitSolverError::NotMaximum { matching: weight, optimum });
    }
    let (fractional, witness) = relaxation_optimum_simplex(inst);
    Ok(Existence::Gap(LpGapCertificate {
        fractional_optimum: fractional,
        integral_optimum: optimum,
        fractional_witness: witness,
    }))
}

/// One synchronous rebalancing sweep in exact arithmetic: every matched edge
/// moves its split toward the even division of the surplus over the two
/// outside options by the damping factor.
pub fn rebalance_step(inst: &Instance, m: &CMatching, x: &Allocation, damping: Rational) -> Allocation {
    let alpha = unit_outside_options(inst, m, x);
    let mut next = x.values().to_vec();
    let two = Rational::from_integer(2);
    for &e in m.edges() {
        let edge = inst.edge(e);
        let w = edge.weight;
        let target = (alpha[edge.u] + (w - alpha[edge.u] - alpha[edge.v]) / two)
            .max(Rational::zero())
            .min(w);
        let moved = x.get(edge.u) + (target - x.get(edge.u)) * damping;
        next[edge.u] = moved;
        next[edge.v] = w - moved;
    }
    Allocation::new(next).expect("clipped split stays nonnegative")
}

struct Numeric {
    x: Vec<f64>,
    alpha: Vec<f64>,
    converged: bool,
    iterations: usize,
}

fn float_outside_options(inst: &Instance, m: &CMatching, weights: &[f64], x: &[f64]) -> Vec<f64> {
    (0..inst.vertex_count())
        .map(|u| m.outside(inst, u).map(|(v, e)| weights[e] - x[v]).fold(0.0, f64::max))
        .collect()
}

fn iterate(inst: &Instance, m: &CMatching, start: &Allocation, cfg: &SolverConfig) -> Numeric {
    let weights: Vec<f64> = inst.edges().iter().map(|e| to_float(&e.weight)).collect();
    let mut x: Vec<f64> = start.values().iter().map(to_float).collect();
    let mut iterations = 0;
    loop {
        let alpha = float_outside_options(inst, m, &weights, &x);
        let mut residual: f64 = 0.0;
        for u in 0..inst.vertex_count() {
            residual = residual.max(alpha[u] - x[u]);
        }
        for &e in m.edges() {
            let edge = inst.edge(e);
            residual = residual.max(((x[edge.u] - alpha[edge.u]) - (x[edge.v] - alpha[edge.v])).abs());
        }
        if residual < cfg.tolerance || iterations >= cfg.max_iterations {
            return Numeric { converged: residual < cfg.tolerance, x, alpha, iterations };
        }
        let mut next = x.clone();
        for &e in m.edges() {
            let edge = inst.edge(e);
            let w = weights[e];
            let target = (alpha[edge.u] + (w - alpha[edge.u] - alpha[edge.v]) / 2.0).clamp(0.0, w);
            let moved = x[edge.u] + cfg.damping * (target - x[edge.u]);
            next[edge.u] = moved;
            next[edge.v] = w - moved;
        }
        x = next;
        iterations += 1;
    }
}

/// Closest rational to `value` with denominator at most `max_den`.
pub fn best_rational(value: f64, max_den: i128) -> Rational {
    let floor = value.floor();
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, floor as i128, 1i128);
    let mut rest = value - floor;
    while rest > 1e-12 {
        let inv = 1.0 / rest;
        let a = inv.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            // best semiconvergent within the bound
            let t = (max_den - q0) / q1;
            if t > 0 {
                let (ps, qs) = (t * p1 + p0, t * q1 + q0);
                let semi = Rational::new(ps, qs);
                let conv = Rational::new(p1, q1);
                let dist = |r: &Rational| (to_float(r) - value).abs();
                return if dist(&semi) < dist(&conv) { semi } else { conv };
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        rest = inv - a as f64;
    }
    Rational::new(p1, q1)
}

fn snap(inst: &Instance, m: &CMatching, x: &[f64]) -> Option<(Allocation, VerificationTranscript, i128)> {
    let lcm = inst.weight_denominator_lcm();
    for k in 0..=MAX_SNAP_EXPONENT {
        let bound = 3 * (1i128 << k) * lcm;
        let mut values = vec![Rational::zero(); inst.vertex_count()];
        for &e in m.edges() {
            let edge = inst.edge(e);
            let t = best_rational(x[edge.u], bound).max(Rational::zero()).min(edge.weight);
            values[edge.u] = t;
            values[edge.v] = edge.weight - t;
        }
        let alloc = Allocation::new(values).ok()?;
        if let Ok(transcript) = exact_verify(inst, m, &alloc) {
            if transcript.balanced {
                return Some((alloc, transcript, bound));
            }
        }
    }
    None
}

/// Candidate witnesses of vertex `u`: `None` (outside option 0) then each
/// non-matching neighbor whose offer is not a duplicate of an earlier one.
fn witness_candidates(frame: &Frame, u: usize) -> Vec<Option<(usize, usize)>> {
    let mut out: Vec<Option<(usize, usize)>> = vec![None];
    let mut seen: Vec<Affine> = Vec::new();
    for (v, e) in frame.m.outside(frame.inst, u) {
        let offer = frame.offer(v, e);
        if !seen.contains(&offer) {
            seen.push(offer);
            out.push(Some((v, e)));
        }
    }
    out
}

struct PatternSearch<'a, 'b> {
    frame: &'b Frame<'a>,
    order: Vec<usize>,
    candidates: Vec<Vec<Option<(usize, usize)>>>,
    // chosen outside-option expression per assigned vertex
    chosen: Vec<Option<Affine>>,
    nodes: usize,
}

impl<'a, 'b> PatternSearch<'a, 'b> {
    fn new(frame: &'b Frame<'a>, restrict: Option<&dyn Fn(usize, &Option<(usize, usize)>) -> bool>) -> Self {
        let inst = frame.inst;
        // Endpoints of each matched edge are assigned back to back so that
        // balance rows appear as early as possible.
        let mut order = Vec::new();
        for &e in frame.m.edges() {
            order.push(inst.edge(e).u);
            order.push(inst.edge(e).v);
        }
        let candidates = (0..inst.vertex_count())
            .map(|u| {
                let all = witness_candidates(frame, u);
                match restrict {
                    Some(keep) => all.into_iter().filter(|c| keep(u, c)).collect(),
                    None => all,
                }
            })
            .collect();
        PatternSearch { frame, order, candidates, chosen: vec![None; inst.vertex_count()], nodes: 0 }
    }

    fn root_rows(&self) -> Vec<Row> {
        let frame = self.frame;
        let mut rows = frame.bound_rows();
        // uncovered vertices need outside option 0
        for u in 0..frame.inst.vertex_count() {
            if frame.m.degree(u) == 0 {
                for (v, e) in frame.m.outside(frame.inst, u) {
                    rows.push(Row { expr: frame.offer(v, e), relation: Relation::Le });
                }
            }
        }
        rows
    }

    fn rows_for_choice(&self, u: usize, choice: &Option<(usize, usize)>) -> (Affine, Vec<Row>) {
        let frame = self.frame;
        let level = match choice {
            None => Affine::constant(Rational::zero()),
            Some((v, e)) => frame.offer(*v, *e),
        };
        let mut rows = Vec::new();
        if choice.is_some() {
            rows.push(Row { expr: level.clone(), relation: Relation::Ge });
        }
        for (v, e) in frame.m.outside(frame.inst, u) {
            if Some((v, e)) != *choice {
                rows.push(Row { expr: frame.offer(v, e).minus(&level), relation: Relation::Le });
            }
        }
        (level, rows)
    }

    fn search(&mut self, depth: usize, rows: &mut Vec<Row>) -> Option<Vec<Rational>> {
        self.nodes += 1;
        let point = self.frame.solve(rows)?;
        if depth == self.order.len() {
            return Some(point);
        }
        let u = self.order[depth];
        let partner_assigned = depth % 2 == 1;
        for choice in self.candidates[u].clone() {
            let mark = rows.len();
            let (level, extra) = self.rows_for_choice(u, &choice);
            rows.extend(extra);
            if partner_assigned {
                let p = self.order[depth - 1];
                let p_level = self.chosen[p].clone().expect("partner assigned");
                let surplus_u = self.frame.payoff(u).minus(&level);
                let surplus_p = self.frame.payoff(p).minus(&p_level);
                rows.push(Row { expr: surplus_u.minus(&surplus_p), relation: Relation::Eq });
                rows.push(Row { expr: surplus_u, relation: Relation::Ge });
            }
            self.chosen[u] = Some(level);
            if let Some(found) = self.search(depth + 1, rows) {
                return Some(found);
            }
            self.chosen[u] = None;
            rows.truncate(mark);
        }
        None
    }

    fn run(&mut self) -> Option<Vec<Rational>> {
        let mut rows = self.root_rows();
        self.search(0, &mut rows)
    }
}

fn verified(inst: &Instance, m: &CMatching, x: Allocation, route: Route, iterations: usize) -> Option<BalancedOutcome> {
    let transcript = exact_verify(inst, m, &x).ok()?;
    transcript.balanced.then_some(BalancedOutcome {
        status: OutcomeStatus::BalancedFound,
        allocation: Some(x),
        certificate: Certificate::Verified { transcript, route },
        iterations,
    })
}

fn inconclusive(reason: String, iterations: usize) -> BalancedOutcome {
    BalancedOutcome {
        status: OutcomeStatus::Inconclusive,
        allocation: None,
        certificate: Certificate::Inconclusive(reason),
        iterations,
    }
}

/// Computes a balanced solution on the maximum-weight matching `m`, or
/// certifies that none exists.
pub fn solve_balanced_unit(
    inst: &Instance,
    m: &CMatching,
    cfg: &SolverConfig,
) -> Result<BalancedOutcome, UnitSolverError> {
    solve_with_known_optimum(inst, m, cfg, None)
}

/// As [`solve_balanced_unit`], with the maximum matching weight supplied by
/// the caller instead of searched for.
pub fn solve_balanced_unit_at_optimum(
    inst: &Instance,
    m: &CMatching,
    cfg: &SolverConfig,
    optimum: Rational,
) -> Result<BalancedOutcome, UnitSolverError> {
    solve_with_known_optimum(inst, m, cfg, Some(optimum))
}

fn solve_with_known_optimum(
    inst: &Instance,
    m: &CMatching,
    cfg: &SolverConfig,
    known: Option<Rational>,
) -> Result<BalancedOutcome, UnitSolverError> {
    cfg.validate()?;
    require_unit(inst)?;
    if cfg.mode == SolverMode::ExactEnumeration && m.len() > EXACT_MATCHED_EDGE_LIMIT {
        return Err(SolverError::TooLarge { edges: m.len(), limit: EXACT_MATCHED_EDGE_LIMIT }.into());
    }
    let start = match decide_existence(inst, m, known)? {
        Existence::Stable(x) => x,
        Existence::Gap(cert) => {
            return Ok(BalancedOutcome {
                status: OutcomeStatus::NoneExists,
                allocation: None,
                certificate: Certificate::LpGap(cert),
                iterations: 0,
            })
        }
    };
    let frame = Frame::new(inst, m);

    let mut iterations = 0;
    if cfg.mode == SolverMode::NumericThenExact {
        let numeric = iterate(inst, m, &start, cfg);
        iterations = numeric.iterations;
        if numeric.converged {
            if let Some((x, transcript, bound)) = snap(inst, m, &numeric.x) {
                return Ok(BalancedOutcome {
                    status: OutcomeStatus::BalancedFound,
                    allocation: Some(x),
                    certificate: Certificate::Verified {
                        transcript,
                        route: Route::Snapped { denominator_bound: bound },
                    },
                    iterations,
                });
            }
            let eps = (cfg.tolerance * 1e3).max(1e-7);
            let weights: Vec<f64> = inst.edges().iter().map(|e| to_float(&e.weight)).collect();
            let tight = |u: usize, c: &Option<(usize, usize)>| {
                let value = match c {
                    None => 0.0,
                    Some((v, e)) => weights[*e] - numeric.x[*v],
                };
                (value - numeric.alpha[u]).abs() <= eps
            };
            let mut search = PatternSearch::new(&frame, Some(&tight));
            if let Some(t) = search.run() {
                if let Some(out) = verified(inst, m, frame.allocation(&t), Route::ActivePattern, iterations) {
                    return Ok(out);
                }
            }
        }
        if m.len() > EXACT_MATCHED_EDGE_LIMIT {
            let why = if numeric.converged {
                "numeric limit could not be made exact"
            } else {
                "rebalancing did not converge"
            };
            return Ok(inconclusive(
                format!("{why} and {} matched edges exceed the enumeration limit of {EXACT_MATCHED_EDGE_LIMIT}", m.len()),
                iterations,
            ));
        }
    }

    let mut search = PatternSearch::new(&frame, None);
    match search.run() {
        Some(t) => Ok(verified(inst, m, frame.allocation(&t), Route::Enumeration, iterations).unwrap_or_else(|| {
            inconclusive("enumerated point failed exact verification".into(), iterations)
        })),
        None => Ok(inconclusive(
            format!("no witness pattern admits a balanced point ({} search nodes)", search.nodes),
            iterations,
        )),
    }
}
