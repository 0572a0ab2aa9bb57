//! Pinned fixtures with self-certifying transcripts: the six-vertex
//! capacity-2 game whose core-and-prekernel point has no balanced solution,
//! and the copy construction on a small capacity-4 star.

use std::fmt;

use num_traits::Zero;

use crate::cmatching::{is_unique_optimum, max_weight_c_matching};
use crate::coop::{in_core, in_prekernel, mask_members, mask_of, CoalitionValueTable, PowerMatrix};
use crate::io::{load_instance, load_solution};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{allocation_of, format_rational, Allocation, CMatching, Instance, Rational, Solution};
use crate::reduction::build_auxiliary;
use crate::semantics::{is_balanced, is_stable, outside_options};

pub const LEMMA1_INSTANCE: &str = include_str!("../data/lemma1_instance.json");
pub const LEMMA1_EVEN_SPLIT: &str = include_str!("../data/lemma1_even_split.json");
pub const LEMMA1_BALANCED: &str = include_str!("../data/lemma1_balanced.json");
pub const EXAMPLE1_INSTANCE: &str = include_str!("../data/example1_instance.json");
pub const EXAMPLE1_SOLUTION: &str = include_str!("../data/example1_solution.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

impl Check {
    pub fn value(name: &str, expected: Rational, actual: Rational) -> Self {
        Check {
            name: name.into(),
            expected: format_rational(&expected),
            actual: format_rational(&actual),
            passed: expected == actual,
        }
    }

    pub fn flag(name: &str, expected: bool, actual: bool) -> Self {
        Check { name: name.into(), expected: expected.to_string(), actual: actual.to_string(), passed: expected == actual }
    }

    pub fn text(name: &str, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        Check { name: name.into(), passed: expected == actual, expected, actual }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certification {
    pub label: String,
    pub checks: Vec<Check>,
}

impl Certification {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub title: String,
    pub fixture_error: Option<String>,
    pub items: Vec<Certification>,
}

impl Transcript {
    pub fn passed(&self) -> bool {
        self.fixture_error.is_none() && self.items.iter().all(Certification::passed)
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.title, verdict(self.passed()))?;
        if let Some(err) = &self.fixture_error {
            writeln!(f, "fixture mismatch: {err}")?;
        }
        for (i, item) in self.items.iter().enumerate() {
            writeln!(f, "[{}] {}. {}", verdict(item.passed()), i + 1, item.label)?;
            for c in &item.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                writeln!(f, "    {mark} {}: expected {}, got {}", c.name, c.expected, c.actual)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Lemma1Fixture {
    pub instance: Instance,
    pub even_split: Solution,
    pub balanced: Solution,
    pub uniform: Allocation,
}

pub fn lemma1_instance() -> Instance {
    load_instance(LEMMA1_INSTANCE).expect("bundled fixture parses")
}

pub fn lemma1_fixture() -> Lemma1Fixture {
    let instance = lemma1_instance();
    let even_split = load_solution(&instance, LEMMA1_EVEN_SPLIT).expect("bundled fixture parses");
    let balanced = load_solution(&instance, LEMMA1_BALANCED).expect("bundled fixture parses");
    let uniform = Allocation::uniform(6, Rational::from_integer(20));
    Lemma1Fixture { instance, even_split, balanced, uniform }
}

const LEMMA1_EDGES: [(&str, &str); 7] =
    [("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("E", "F"), ("A", "F"), ("B", "E")];
const OUTER_CYCLE: [(&str, &str); 6] = [("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("E", "F"), ("A", "F")];

fn lemma1_shape(inst: &Instance) -> Result<(), String> {
    let ids: Vec<&str> = inst.ids().iter().map(String::as_str).collect();
    if ids != ["A", "B", "C", "D", "E", "F"] {
        return Err(format!("vertices {ids:?}, expected A..F"));
    }
    if let Some(u) = (0..6).find(|&u| inst.capacity(u) != 2) {
        return Err(format!("capacity of {} is {}, expected 2", inst.id(u), inst.capacity(u)));
    }
    if inst.edge_count() != LEMMA1_EDGES.len() {
        return Err(format!("{} edges, expected {}", inst.edge_count(), LEMMA1_EDGES.len()));
    }
    for (a, b) in LEMMA1_EDGES {
        inst.edge_by_ids(a, b).map_err(|_| format!("edge {a}{b} missing"))?;
    }
    Ok(())
}

fn q(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Certifies every quantity of the pinned six-vertex fixture on the bundled instance.
pub fn lemma1_verify() -> Transcript {
    lemma1_verify_with(&lemma1_instance())
}

/// The same certifications with `inst` in place of the bundled instance.
pub fn lemma1_verify_with(inst: &Instance) -> Transcript {
    let title = "lemma1".to_string();
    let mismatch = |e: String| Transcript { title: title.clone(), fixture_error: Some(e), items: Vec::new() };
    if let Err(e) = lemma1_shape(inst) {
        return mismatch(e);
    }
    let (even, balanced) = match (load_solution(inst, LEMMA1_EVEN_SPLIT), load_solution(inst, LEMMA1_BALANCED)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return mismatch(format!("bundled solutions do not fit: {e}")),
    };
    let table = match CoalitionValueTable::build(inst) {
        Ok(t) => t,
        Err(e) => return mismatch(e.to_string()),
    };
    let v = |id: &str| inst.index_of(id).expect("shape checked");
    let set = |ids: &[&str]| mask_of(&ids.iter().map(|id| v(id)).collect::<Vec<_>>());
    let cycle = CMatching::from_pairs(inst, &OUTER_CYCLE).expect("shape checked");
    let uniform = Allocation::uniform(6, q(20));

    let mut items = Vec::new();

    // 1
    let (best, optimum) = max_weight_c_matching(inst).expect("seven edges");
    items.push(Certification {
        label: "outer cycle is the unique maximum c-matching, weight 120".into(),
        checks: vec![
            Check::value("optimum weight", q(120), optimum),
            Check::value("outer cycle weight", q(120), cycle.weight(inst)),
            Check::flag("optimum is unique", true, is_unique_optimum(inst).expect("seven edges")),
            Check::flag("optimum is the outer cycle", true, best == cycle),
        ],
    });

    // 2
    let powers = PowerMatrix::compute(&table, &uniform);
    let s = |a: &str, b: &str| powers.get(v(a), v(b)).value;
    items.push(Certification {
        label: "x = 20 lies in the core and the prekernel".into(),
        checks: vec![
            Check::value("nu({A,F})", q(30), table.value(set(&["A", "F"]))),
            Check::value("nu({C,D})", q(30), table.value(set(&["C", "D"]))),
            Check::value("nu({B,C,D,E})", q(70), table.value(set(&["B", "C", "D", "E"]))),
            Check::value("nu({A,B,E,F})", q(70), table.value(set(&["A", "B", "E", "F"]))),
            Check::flag("x in core", true, in_core(&table, &uniform).in_core),
            Check::flag("x in prekernel", true, in_prekernel(&powers).in_prekernel),
            Check::value("s_AB", q(-10), s("A", "B")),
            Check::value("s_BA", q(-10), s("B", "A")),
            Check::value("s_CD", q(-20), s("C", "D")),
            Check::value("s_DC", q(-20), s("D", "C")),
        ],
    });

    // 3 and 4
    let forced = forced_solutions(inst, &cycle, &uniform, &[("C", "D"), ("A", "F")]);
    let mut checks3 = Vec::new();
    let mut checks4 = Vec::new();
    let zero_alpha = ["A", "C", "D", "F"].iter().all(|id| cycle.outside(inst, v(id)).next().is_none());
    checks4.push(Check::flag("A, C, D, F have no edge outside the cycle (alpha = 0)", true, zero_alpha));
    checks4.push(Check::text(
        "matchings carrying x = 20",
        "outer cycle only",
        if optimum == uniform.total() && is_unique_optimum(inst).unwrap_or(false) {
            "outer cycle only"
        } else {
            "not determined"
        },
    ));
    match forced {
        Some(z) => {
            let report = is_balanced(inst, &z);
            let alpha = outside_options(inst, &z);
            let bc = report
                .edges
                .iter()
                .find(|eb| eb.edge == inst.edge_by_ids("B", "C").expect("shape"))
                .expect("BC is matched");
            let (b_side, c_side) = if bc.u == v("B") {
                (bc.z_uv - bc.alpha_u, bc.z_vu - bc.alpha_v)
            } else {
                (bc.z_vu - bc.alpha_v, bc.z_uv - bc.alpha_u)
            };
            checks3.extend([
                Check::flag("forced z equals the even-split fixture", true, z == even),
                Check::value("z_CB", q(5), z.z(inst, v("C"), v("B"))),
                Check::value("z_BC", q(15), z.z(inst, v("B"), v("C"))),
                Check::value("alpha_B", q(5), alpha[v("B")]),
                Check::flag("stable", true, is_stable(inst, &z).stable),
                Check::value("z_BC - alpha_B", q(10), b_side),
                Check::value("z_CB - alpha_C", q(5), c_side),
                Check::flag("balanced", false, report.balanced),
            ]);
            checks4.push(Check::text("solutions balancing CD and FA with x = 20", "exactly one", "exactly one"));
            checks4.push(Check::flag("that solution is balanced", false, report.balanced));
        }
        None => {
            checks3.push(Check::text("solutions balancing CD and FA with x = 20", "exactly one", "none or several"));
            checks4.push(Check::text("solutions balancing CD and FA with x = 20", "exactly one", "none or several"));
        }
    }
    items.push(Certification {
        label: "the z forced by x = 20 and even splits on CD, FA fails balance at BC (10 vs 5)".into(),
        checks: checks3,
    });
    items.push(Certification { label: "no balanced solution has allocation x = 20".into(), checks: checks4 });

    // 5
    let alpha = outside_options(inst, &balanced);
    items.push(Certification {
        label: "balanced fixture passes the balance test with alpha_B = alpha_E = 10/3".into(),
        checks: vec![
            Check::value("alpha_B", Rational::new(10, 3), alpha[v("B")]),
            Check::value("alpha_E", Rational::new(10, 3), alpha[v("E")]),
            Check::value("alpha_C", q(0), alpha[v("C")]),
            Check::flag("stable", true, is_stable(inst, &balanced).stable),
            Check::flag("balanced", true, is_balanced(inst, &balanced).balanced),
        ],
    });

    // 6
    let x = allocation_of(inst, &balanced);
    let powers = PowerMatrix::compute(&table, &x);
    let prekernel = in_prekernel(&powers);
    let first_violation = match prekernel.violation {
        None => "none".to_string(),
        Some((a, b, sab, sba)) => format!(
            "s_{0}{1} = {2} (T = {3}), s_{1}{0} = {4} (T = {5})",
            inst.id(a),
            inst.id(b),
            format_rational(&sab),
            coalition_name(inst, powers.get(a, b).witness),
            format_rational(&sba),
            coalition_name(inst, powers.get(b, a).witness),
        ),
    };
    items.push(Certification {
        label: "the balanced fixture's allocation lies in the core and the prekernel".into(),
        checks: vec![
            Check::value("x_A", Rational::new(55, 3), x.get(v("A"))),
            Check::value("x_C", Rational::new(70, 3), x.get(v("C"))),
            Check::flag("x in core", true, in_core(&table, &x).in_core),
            Check::flag("x in prekernel", true, prekernel.in_prekernel),
            Check::text("first asymmetric pair", "none", first_violation),
        ],
    });

    Transcript { title, fixture_error: None, items }
}

fn coalition_name(inst: &Instance, mask: u64) -> String {
    let ids: Vec<&str> = mask_members(mask).into_iter().map(|u| inst.id(u)).collect();
    format!("{{{}}}", ids.join(","))
}

/// The solution on `m` with allocation `x` and equal splits on `even`, when
/// exactly one exists. Decided by minimizing and maximizing every share.
fn forced_solutions(inst: &Instance, m: &CMatching, x: &Allocation, even: &[(&str, &str)]) -> Option<Solution> {
    // variable 2k: share of edge.u on the k-th matched edge, 2k + 1: share of edge.v
    let k = m.len();
    let mut lp = LinearProgram::new(2 * k);
    let one = q(1);
    let mut at_vertex: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); inst.vertex_count()];
    for (i, &e) in m.edges().iter().enumerate() {
        let edge = inst.edge(e);
        lp.add(vec![(2 * i, one), (2 * i + 1, one)], Relation::Eq, edge.weight);
        at_vertex[edge.u].push((2 * i, one));
        at_vertex[edge.v].push((2 * i + 1, one));
    }
    for (u, row) in at_vertex.into_iter().enumerate() {
        if row.is_empty() {
            if !x.get(u).is_zero() {
                return None;
            }
        } else {
            lp.add(row, Relation::Eq, x.get(u));
        }
    }
    for (a, b) in even {
        let e = inst.edge_by_ids(a, b).ok()?;
        let i = m.edges().iter().position(|&f| f == e)?;
        lp.add(vec![(2 * i, one), (2 * i + 1, -one)], Relation::Eq, Rational::zero());
    }
    let mut values = Vec::with_capacity(2 * k);
    for j in 0..2 * k {
        let mut hi = lp.clone();
        hi.set_objective(j, one);
        let mut lo = lp.clone();
        lo.set_objective(j, -one);
        match (hi.maximize(), lo.maximize()) {
            (LpOutcome::Optimal { value: max, .. }, LpOutcome::Optimal { value: neg_min, .. }) if max == -neg_min => {
                values.push(max)
            }
            _ => return None,
        }
    }
    let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
    for (i, &e) in m.edges().iter().enumerate() {
        splits[e] = (values[2 * i], values[2 * i + 1]);
    }
    Solution::new(inst, m.clone(), splits).ok()
}

pub fn example1_instance() -> Instance {
    load_instance(EXAMPLE1_INSTANCE).expect("bundled fixture parses")
}

/// Copies expected per vertex id in the pinned star.
fn expected_copies(id: &str) -> usize {
    match id {
        "u" => 4,
        "x" | "y" => 2,
        _ => 1,
    }
}

/// Certifies the copy construction on the bundled star.
pub fn example1_verify() -> Transcript {
    example1_verify_with(&example1_instance())
}

pub fn example1_verify_with(inst: &Instance) -> Transcript {
    let title = "example1".to_string();
    let m = match load_solution(inst, EXAMPLE1_SOLUTION) {
        Ok(sol) => sol.matching().clone(),
        Err(e) => return Transcript { title, fixture_error: Some(e.to_string()), items: Vec::new() },
    };
    let bundle = match build_auxiliary(inst, &m) {
        Ok(b) => b,
        Err(e) => return Transcript { title, fixture_error: Some(e.to_string()), items: Vec::new() },
    };
    let aux = bundle.aux();
    let mut items = Vec::new();

    let mut counts: Vec<Check> = (0..inst.vertex_count())
        .map(|u| {
            let id = inst.id(u);
            Check::text(&format!("copies of {id}"), expected_copies(id), bundle.copies(u).len())
        })
        .collect();
    counts.push(Check::text("aux vertices", 12, aux.vertex_count()));
    items.push(Certification { label: "4 copies of u, 2 of x and y, 1 of every other vertex".into(), checks: counts });

    let mut mapped = Vec::new();
    let mut checks = vec![Check::text("matched edges", 4, m.len()), Check::text("aux matched edges", 4, bundle.aux_matching().len())];
    for &e in m.edges() {
        let edge = inst.edge(e);
        let name = format!("{}{}", inst.id(edge.u), inst.id(edge.v));
        let target = bundle.aux_edge(e);
        let ok = target.is_some_and(|t| aux.weight(t) == edge.weight && bundle.aux_matching().contains(t) && !mapped.contains(&t));
        checks.push(Check::flag(&format!("{name} maps to its own aux matched edge"), true, ok));
        mapped.extend(target);
    }
    items.push(Certification { label: "each matched edge corresponds to a unique aux matched edge".into(), checks });

    let mut checks = Vec::new();
    for other in ["v", "w"] {
        let (Some(u), Some(o)) = (inst.index_of("u"), inst.index_of(other)) else {
            checks.push(Check::text(&format!("vertices u and {other}"), "present", "missing"));
            continue;
        };
        let joined = bundle
            .copies(u)
            .iter()
            .flat_map(|&a| bundle.copies(o).iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| aux.edge_between(a, b).is_some_and(|t| !bundle.aux_matching().contains(t)))
            .count();
        checks.push(Check::text(&format!("u copies joined to {other} copies"), 4, joined));
    }
    checks.push(Check::text("aux edges", 12, aux.edge_count()));
    checks.push(Check::text("construction invariants", "hold", bundle.check_invariants().err().unwrap_or_else(|| "hold".into())));
    items.push(Certification { label: "every copy of u is joined to every copy of v and of w".into(), checks });

    Transcript { title, fixture_error: None, items }
}
