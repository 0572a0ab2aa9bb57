//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails or exceeds its time budget.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use bargain_core::cmatching::{lp_integrality_check, max_weight_c_matching};
use bargain_core::coop::{theorem1_harness, CoalitionValueTable};
use bargain_core::model::{allocation_of, Allocation, CMatching, Instance, Rational, Solution};
use bargain_core::pipeline::{find_stable, solve, SolveStatus};
use bargain_core::random::{
    random_c_matching, random_instance, random_labels, random_solution, random_stable_solution, random_tree, Family,
};
use bargain_core::reduction::{build_auxiliary, build_auxiliary_with_labels, AuxiliaryBundle};
use bargain_core::repro::{example1_verify, lemma1_fixture, lemma1_verify};
use bargain_core::unit_solver::{
    exact_verify, solve_balanced_unit, solve_balanced_unit_at_optimum, Certificate, OutcomeStatus, SolverConfig,
    EXACT_MATCHED_EDGE_LIMIT,
};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn q(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bargain(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_bargain"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

/// The aux-side unit solution `(M', x)` as a general solution.
fn aux_solution(bundle: &AuxiliaryBundle, x: &Allocation) -> Solution {
    let aux = bundle.aux();
    let mut splits = vec![(Rational::zero(), Rational::zero()); aux.edge_count()];
    for &e in bundle.aux_matching().edges() {
        let edge = aux.edge(e);
        splits[e] = (x.get(edge.u), x.get(edge.v));
    }
    Solution::new(aux, bundle.aux_matching().clone(), splits).expect("unit solution")
}

fn lemma1() -> Verdict {
    let transcript = lemma1_verify();
    let cli_code = bargain(&["repro", "lemma1"]);

    // independent enumeration of the claims
    let fx = lemma1_fixture();
    let inst = &fx.instance;
    let nu = common::coalition_values(inst);
    let id = |s: &str| inst.vertex(s).unwrap();
    let uniform_ok = common::in_core(&nu, &fx.uniform)
        && common::in_prekernel(&nu, &fx.uniform)
        && common::power(&nu, &fx.uniform, id("A"), id("B")) == q(-10)
        && common::power(&nu, &fx.uniform, id("C"), id("D")) == q(-20);
    let even_ok = common::stable(inst, &fx.even_split) && !common::balanced(inst, &fx.even_split);
    let balanced_ok = common::balanced(inst, &fx.balanced);
    let x = allocation_of(inst, &fx.balanced);
    let core = common::in_core(&nu, &x);
    let prekernel = common::in_prekernel(&nu, &x);
    let s_cd = common::power(&nu, &x, id("C"), id("D"));
    let s_dc = common::power(&nu, &x, id("D"), id("C"));
    let oracle = format!(
        "oracle: uniform {}, even split {}, balanced fixture {}, its allocation core {core} prekernel {prekernel} (s_CD = {s_cd}, s_DC = {s_dc})",
        if uniform_ok { "ok" } else { "MISMATCH" },
        if even_ok { "ok" } else { "MISMATCH" },
        if balanced_ok { "ok" } else { "MISMATCH" },
    );
    let failing: Vec<String> = transcript
        .items
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.passed())
        .map(|(i, c)| {
            let checks: Vec<String> = c
                .checks
                .iter()
                .filter(|k| !k.passed)
                .map(|k| format!("{} expected {} got {}", k.name, k.expected, k.actual))
                .collect();
            format!("item {} ({}): {}", i + 1, c.label, checks.join("; "))
        })
        .collect();
    let summary = format!(
        "{}/{} items certified, repro exit {cli_code}; {oracle}",
        transcript.items.len() - failing.len(),
        transcript.items.len()
    );
    if transcript.passed() && cli_code == 0 && uniform_ok && even_ok && balanced_ok {
        Ok(summary)
    } else {
        Err(format!("{summary}; failing: {}", failing.join(" | ")))
    }
}

fn reduction_preservation() -> Verdict {
    let mut rng = rng(2);
    let family = Family::default();
    let (mut pairs, mut stable, mut balanced, mut uncovered) = (0usize, 0usize, 0usize, 0usize);
    let cfg = SolverConfig::default();
    for round in 0..500 {
        let inst = random_instance(&mut rng, &family);
        let m = if round % 3 == 0 { max_weight_c_matching(&inst).unwrap().0 } else { random_c_matching(&mut rng, &inst) };
        let mut cases = vec![random_solution(&mut rng, &inst, &m, 6)];
        cases.extend(random_stable_solution(&mut rng, &inst, &m));
        if round % 5 == 0 {
            if let SolveStatus::Balanced { solution, .. } = solve(&inst, &cfg).map_err(|e| e.to_string())?.status {
                cases.push(solution);
            }
        }
        for z in cases {
            let labels = random_labels(&mut rng, &inst, z.matching());
            let bundle = build_auxiliary_with_labels(&inst, z.matching(), labels).map_err(|e| e.to_string())?;
            let fail = |what: &str| Err(format!("instance {round}: {what}"));
            let x = bundle.phi_inverse(&z).map_err(|e| e.to_string())?;
            let back = bundle.phi(&x).map_err(|e| e.to_string())?;
            if back != z || bundle.phi_inverse(&back).map_err(|e| e.to_string())? != x {
                return fail("phi round trip");
            }
            let aux = bundle.aux();
            let zx = aux_solution(&bundle, &x);
            for u in 0..inst.vertex_count() {
                let a = common::alpha(&inst, &z, u);
                for i in 1..=inst.capacity(u) as usize {
                    let b = common::alpha(aux, &zx, bundle.copy(u, i));
                    if a != b {
                        if i <= z.matching().degree(u) as usize {
                            return fail("outside option differs on a covered copy");
                        }
                        uncovered += 1;
                    }
                }
            }
            let (s, s_aux) = (common::stable(&inst, &z), common::stable(aux, &zx));
            let (b, b_aux) = (common::balanced(&inst, &z), common::balanced(aux, &zx));
            if s != s_aux || b != b_aux {
                return fail("stability or balance not preserved");
            }
            let report = bundle.verify_preservation(&z, &x).map_err(|e| e.to_string())?;
            if !report.holds() || report.stable_original != s || report.balanced_original != b {
                return fail("library preservation report disagrees with the oracle");
            }
            pairs += 1;
            stable += s as usize;
            balanced += b as usize;
        }
    }
    if balanced == 0 || stable == balanced {
        return Err(format!("degenerate sample: {stable} stable, {balanced} balanced"));
    }
    Ok(format!(
        "500 instances, {pairs} (solution, labelling) pairs, {stable} stable, {balanced} balanced; uncovered-copy outside-option differences: {uncovered}"
    ))
}

fn maximality() -> Verdict {
    let mut rng = rng(3);
    let family = Family::default();
    let (mut maximum, mut not_maximum) = (0, 0);
    let mut violations: Vec<String> = Vec::new();
    for round in 0..500 {
        let inst = random_instance(&mut rng, &family);
        let optimum = common::max_c_matching_weight(&inst, common::full_mask(inst.vertex_count()));
        let library = max_weight_c_matching(&inst).map_err(|e| e.to_string())?;
        if library.1 != optimum {
            return Err(format!("instance {round}: library optimum {} vs brute force {optimum}", library.1));
        }
        let stable_exists = lp_integrality_check(&inst).map(|r| r.has_integral_optimal).ok();
        for m in [library.0, random_c_matching(&mut rng, &inst)] {
            let labels = random_labels(&mut rng, &inst, &m);
            let bundle = build_auxiliary_with_labels(&inst, &m, labels).map_err(|e| e.to_string())?;
            let aux_weight = bundle.aux_matching().weight(bundle.aux());
            let aux_optimum = common::max_matching_weight(bundle.aux());
            if aux_weight != m.weight(&inst) {
                return Err(format!("instance {round}: aux matching weight changed"));
            }
            let is_max = m.weight(&inst) == optimum;
            let aux_max = aux_weight == aux_optimum;
            if aux_max && !is_max {
                return Err(format!("instance {round}: aux matching maximum but the c-matching is not"));
            }
            if is_max != aux_max {
                if stable_exists != Some(false) {
                    return Err(format!("instance {round}: maximality lost although a stable solution may exist"));
                }
                violations.push(format!("instance {round} (optimum {optimum}, aux optimum {aux_optimum})"));
            }
            if is_max {
                maximum += 1;
            } else {
                not_maximum += 1;
            }
        }
    }
    if not_maximum == 0 {
        return Err("no non-maximum matchings sampled".into());
    }
    let summary = format!(
        "500 instances, {maximum} maximum and {not_maximum} non-maximum matchings; aux maximum implies maximum in every case"
    );
    if violations.is_empty() {
        Ok(summary)
    } else {
        Err(format!(
            "{summary}; {} maximum c-matchings whose aux matching is not maximum, all on instances without a stable solution: {}",
            violations.len(),
            violations.join(", ")
        ))
    }
}

fn existence() -> Verdict {
    let mut rng = rng(4);
    // odd cycles without a stable point are common only at low capacity
    let families = [Family::default(), Family { max_capacity: 1, ..Family::default() }];
    let cfg = SolverConfig::default();
    let verdicts = |inst: &Instance| -> Result<(bool, bool, bool), String> {
        let run = solve(inst, &cfg).map_err(|e| e.to_string())?;
        let a = match &run.status {
            SolveStatus::Balanced { solution, .. } => {
                if !common::balanced(inst, solution) {
                    return Err("pipeline output fails the balance oracle".into());
                }
                true
            }
            SolveStatus::NoneExists(_) => false,
            SolveStatus::Inconclusive(why) => return Err(format!("inconclusive: {why}")),
        };
        let stable = find_stable(inst).map_err(|e| e.to_string())?;
        if let Some(s) = &stable {
            if !common::stable(inst, s) {
                return Err("stable phase output fails the stability oracle".into());
            }
        }
        let c = lp_integrality_check(inst).map_err(|e| e.to_string())?.has_integral_optimal;
        Ok((a, stable.is_some(), c))
    };
    let triangle = Instance::new([("a", 1), ("b", 1), ("c", 1)], [("a", "b", q(1)), ("b", "c", q(1)), ("a", "c", q(1))])
        .unwrap();
    let edge = Instance::new([("u", 1), ("v", 1)], [("u", "v", q(10))]).unwrap();
    if verdicts(&triangle)? != (false, false, false) {
        return Err("triangle anchor".into());
    }
    if verdicts(&edge)? != (true, true, true) {
        return Err("single-edge anchor".into());
    }
    let (mut tested, mut positive, mut skipped) = (0, 0, 0);
    while tested < 200 {
        let inst = random_instance(&mut rng, &families[tested % 2]);
        if lp_integrality_check(&inst).is_err() {
            skipped += 1;
            continue;
        }
        let (a, b, c) = verdicts(&inst).map_err(|e| format!("instance {tested}: {e}"))?;
        if a != b || b != c {
            return Err(format!("instance {tested}: balanced {a}, stable {b}, integral {c}"));
        }
        tested += 1;
        positive += a as usize;
    }
    if positive == 0 || positive == tested {
        return Err(format!("degenerate sample: {positive} of {tested} positive"));
    }
    Ok(format!(
        "anchors ok; {tested} instances agree ({positive} positive, {} negative); {skipped} over the enumeration guard",
        tested - positive
    ))
}

fn balanced_vs_prekernel() -> Verdict {
    let mut rng = rng(5);
    let family = Family::default();
    let cfg = SolverConfig::default();
    let (mut qualifying, mut solutions, mut balanced, mut bound_checks, mut attempts) = (0, 0, 0, 0, 0);
    while qualifying < 200 {
        attempts += 1;
        if attempts > 5000 {
            return Err(format!("only {qualifying} qualifying instances in 5000 attempts"));
        }
        let inst = if attempts % 2 == 0 {
            random_instance(&mut rng, &family)
        } else {
            let n = rng.gen_range(2..=8);
            random_tree(&mut rng, n, 3, 10)
        };
        let SolveStatus::Balanced { solution, .. } = solve(&inst, &cfg).map_err(|e| e.to_string())?.status else {
            continue;
        };
        let mut cases = vec![solution.clone()];
        for _ in 0..3 {
            cases.extend(random_stable_solution(&mut rng, &inst, solution.matching()));
        }
        let table = CoalitionValueTable::build(&inst).map_err(|e| e.to_string())?;
        let nu = common::coalition_values(&inst);
        let mut counted = false;
        for sol in &cases {
            let x = allocation_of(&inst, sol);
            let verdict = theorem1_harness(&inst, &table, &x, sol).map_err(|e| format!("attempt {attempts}: {e}"))?;
            for &e in sol.matching().edges() {
                let edge = inst.edge(e);
                for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
                    let bound = common::alpha(&inst, sol, a) - sol.z(&inst, a, b);
                    if common::power(&nu, &x, a, b) > bound {
                        return Err(format!("attempt {attempts}: power bound fails at {}{}", inst.id(a), inst.id(b)));
                    }
                    bound_checks += 1;
                }
            }
            if !verdict.power_bounds_hold() {
                return Err(format!("attempt {attempts}: library power bound check fails"));
            }
            if !verdict.conditions_met() {
                continue;
            }
            let is_balanced = common::balanced(&inst, sol);
            let cooperative = common::in_core(&nu, &x) && common::in_prekernel(&nu, &x);
            if is_balanced != cooperative || verdict.balanced != is_balanced || !verdict.sides_agree() {
                return Err(format!(
                    "attempt {attempts}: balanced {is_balanced} but core and prekernel {cooperative} on {:?}",
                    inst.ids()
                ));
            }
            counted = true;
            solutions += 1;
            balanced += is_balanced as usize;
        }
        qualifying += counted as usize;
    }
    if balanced == solutions {
        return Err("no unbalanced stable solutions sampled".into());
    }
    Ok(format!(
        "{qualifying} qualifying instances, {solutions} stable solutions ({balanced} balanced) agree; {bound_checks} power bounds hold"
    ))
}

fn unit_certification() -> Verdict {
    let mut rng = rng(6);
    let unit_family = Family { max_vertices: 12, max_capacity: 1, ..Family::default() };
    let family = Family::default();
    let numeric = SolverConfig::default();
    let exact = SolverConfig::exact();
    let (mut instances, mut found, mut skipped) = (0, 0, 0);
    for round in 0..300 {
        // alternately a plain unit instance and the aux instance of a capacitated one
        let (inst, m, optimum) = if round % 2 == 0 {
            let inst = random_instance(&mut rng, &unit_family);
            let Ok((m, optimum)) = max_weight_c_matching(&inst) else {
                skipped += 1;
                continue;
            };
            (inst, m, optimum)
        } else {
            let original = random_instance(&mut rng, &family);
            let (m, optimum) = max_weight_c_matching(&original).map_err(|e| e.to_string())?;
            let bundle = build_auxiliary(&original, &m).map_err(|e| e.to_string())?;
            (bundle.aux().clone(), bundle.aux_matching().clone(), optimum)
        };
        if m.len() > EXACT_MATCHED_EDGE_LIMIT {
            skipped += 1;
            continue;
        }
        let run = |cfg: &SolverConfig, round: usize| {
            if round % 4 == 0 {
                solve_balanced_unit(&inst, &m, cfg)
            } else {
                solve_balanced_unit_at_optimum(&inst, &m, cfg, optimum)
            }
        };
        let a = run(&numeric, round).map_err(|e| format!("instance {round}: {e}"))?;
        let b = run(&exact, round).map_err(|e| format!("instance {round}: {e}"))?;
        if a.status != b.status {
            return Err(format!("instance {round}: numeric {:?} vs exact {:?}", a.status, b.status));
        }
        for outcome in [&a, &b] {
            if outcome.status != OutcomeStatus::BalancedFound {
                continue;
            }
            let x = outcome.allocation.as_ref().expect("allocation");
            let transcript = exact_verify(&inst, &m, x).map_err(|e| e.to_string())?;
            let carried = matches!(&outcome.certificate, Certificate::Verified { transcript: t, .. } if *t == transcript);
            if transcript.nonzero().next().is_some() || !transcript.balanced || !carried {
                return Err(format!("instance {round}: residuals not all zero"));
            }
            let sol = unit_solution(&inst, &m, x);
            if !common::balanced(&inst, &sol) {
                return Err(format!("instance {round}: verified allocation fails the balance oracle"));
            }
            found += 1;
        }
        instances += 1;
    }
    if found == 0 {
        return Err("no balanced outcomes sampled".into());
    }
    Ok(format!(
        "{instances} unit instances, modes agree on status, {found} balanced outcomes verified with zero residuals; {skipped} over the exact-search guards"
    ))
}

fn unit_solution(inst: &Instance, m: &CMatching, x: &Allocation) -> Solution {
    let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
    for &e in m.edges() {
        let edge = inst.edge(e);
        splits[e] = (x.get(edge.u), x.get(edge.v));
    }
    Solution::new(inst, m.clone(), splits).expect("unit solution")
}

fn example1() -> Verdict {
    let transcript = example1_verify();
    let code = bargain(&["repro", "example1"]);
    let checks: usize = transcript.items.iter().map(|c| c.checks.len()).sum();
    if transcript.passed() && code == 0 {
        Ok(format!("{checks} construction counts certified"))
    } else {
        Err(format!("repro exit {code}\n{transcript}"))
    }
}

fn main() {
    let criteria: [(&str, u64, fn() -> Verdict); 7] = [
        ("six-vertex fixture reproduction", 5, lemma1),
        ("reduction preservation", 60, reduction_preservation),
        ("maximality correspondence", 60, maximality),
        ("existence equivalence", 120, existence),
        ("balanced iff core and prekernel", 120, balanced_vs_prekernel),
        ("unit solver certification", 60, unit_certification),
        ("construction counts", 1, example1),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let ok = verdict.is_ok() && in_time;
        failed += !ok as usize;
        let detail = match &verdict {
            Ok(d) | Err(d) => d,
        };
        let timing = if in_time { String::new() } else { " OVER BUDGET".to_string() };
        println!(
            "criterion {} {}: {} [{:.2?} / {}s{timing}] {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            elapsed,
            budget
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

