mod common;

use bargain_core::cmatching::{lp_integrality_check, max_weight_c_matching, relaxation_optimum_simplex};
use bargain_core::coop::{core_check, cut_identity, detect_bad_vertices, CoalitionValueTable, PowerMatrix};
use bargain_core::io::{load_instance, load_solution, write_instance, write_solution};
use bargain_core::model::{allocation_of, Allocation, CMatching, Instance, Rational, Solution};
use bargain_core::random::{random_c_matching, random_labels, random_solution, random_stable_solution};
use bargain_core::reduction::build_auxiliary_with_labels;
use bargain_core::semantics::{outside_options, unit_is_balanced, unit_outside_options};
use bargain_core::unit_solver::rebalance_step;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn build(caps: &[u32], slots: &[Option<i64>]) -> Instance {
    let n = caps.len();
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut edges = Vec::new();
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            if let Some(w) = slots[k] {
                edges.push((names[a].as_str(), names[b].as_str(), Rational::from_integer(w as i128)));
            }
            k += 1;
        }
    }
    Instance::new(names.iter().map(String::as_str).zip(caps.iter().map(|&c| c as i64)), edges).unwrap()
}

fn instances(max_n: usize, max_cap: u32) -> impl Strategy<Value = Instance> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(1..=max_cap, n),
            prop::collection::vec(prop::option::weighted(0.45, 1..=10i64), n * (n - 1) / 2),
        )
            .prop_map(|(caps, slots)| build(&caps, &slots))
    })
}

fn seeded() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

fn unit_solution(inst: &Instance, m: &CMatching, x: &Allocation) -> Solution {
    let mut splits = vec![(Rational::zero(), Rational::zero()); inst.edge_count()];
    for &e in m.edges() {
        let edge = inst.edge(e);
        splits[e] = (x.get(edge.u), x.get(edge.v));
    }
    Solution::new(inst, m.clone(), splits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phi_round_trips_under_any_labelling(inst in instances(7, 3), mut rng in seeded()) {
        let m = random_c_matching(&mut rng, &inst);
        let z = random_solution(&mut rng, &inst, &m, 12);
        let bundle = build_auxiliary_with_labels(&inst, &m, random_labels(&mut rng, &inst, &m)).unwrap();
        bundle.check_invariants().unwrap();
        let x = bundle.phi_inverse(&z).unwrap();
        prop_assert_eq!(bundle.phi(&x).unwrap(), z.clone());
        prop_assert_eq!(bundle.phi_inverse(&bundle.phi(&x).unwrap()).unwrap(), x.clone());
        let report = bundle.verify_preservation(&z, &x).unwrap();
        prop_assert!(report.holds(), "{:?}", report);
    }

    #[test]
    fn unit_outside_option_matches_general(inst in instances(8, 1), mut rng in seeded()) {
        let m = random_c_matching(&mut rng, &inst);
        let sol = random_solution(&mut rng, &inst, &m, 4);
        let x = allocation_of(&inst, &sol);
        let general = outside_options(&inst, &sol);
        prop_assert_eq!(&unit_outside_options(&inst, &m, &x), &general);
        for (u, a) in general.iter().enumerate() {
            prop_assert_eq!(*a, common::alpha(&inst, &sol, u));
        }
    }

    #[test]
    fn cut_identity_holds_for_every_coalition(inst in instances(6, 3), mut rng in seeded()) {
        let m = random_c_matching(&mut rng, &inst);
        let sol = random_solution(&mut rng, &inst, &m, 6);
        for mask in 0..1u64 << inst.vertex_count() {
            let (lhs, rhs) = cut_identity(&inst, &sol, mask);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn power_witnesses_attain_the_maximum(inst in instances(6, 3), mut rng in seeded()) {
        let m = random_c_matching(&mut rng, &inst);
        let x = allocation_of(&inst, &random_solution(&mut rng, &inst, &m, 6));
        let table = CoalitionValueTable::build(&inst).unwrap();
        let nu = common::coalition_values(&inst);
        prop_assert_eq!(table.grand(), nu[nu.len() - 1]);
        let powers = PowerMatrix::compute(&table, &x);
        let n = inst.vertex_count();
        for u in 0..n {
            for v in (0..n).filter(|&v| v != u) {
                let p = powers.get(u, v);
                prop_assert!(p.witness >> u & 1 == 1 && p.witness >> v & 1 == 0);
                prop_assert_eq!(p.value, nu[p.witness as usize] - x.sum_mask(p.witness));
                prop_assert_eq!(p.value, common::power(&nu, &x, u, v));
            }
        }
    }

    #[test]
    fn rebalance_fixed_points_are_balanced(inst in instances(7, 1), mut rng in seeded()) {
        let (m, _) = max_weight_c_matching(&inst).unwrap();
        if let Some(sol) = random_stable_solution(&mut rng, &inst, &m) {
            let x = allocation_of(&inst, &sol);
            let fixed = rebalance_step(&inst, &m, &x, Rational::from_integer(1)) == x;
            prop_assert_eq!(fixed, unit_is_balanced(&inst, &m, &x));
            prop_assert_eq!(fixed, common::balanced(&inst, &unit_solution(&inst, &m, &x)));
        }
    }

    #[test]
    fn stable_solutions_lie_in_the_core(inst in instances(7, 3), mut rng in seeded()) {
        let (m, optimum) = max_weight_c_matching(&inst).unwrap();
        if let Some(sol) = random_stable_solution(&mut rng, &inst, &m) {
            prop_assert!(common::stable(&inst, &sol));
            let x = allocation_of(&inst, &sol);
            prop_assert!(core_check(&inst, &x).unwrap().in_core);
            let nu = common::coalition_values(&inst);
            prop_assert!(common::in_core(&nu, &x));
            prop_assert_eq!(m.weight(&inst), nu[nu.len() - 1]);
            prop_assert_eq!(optimum, nu[nu.len() - 1]);
        }
    }

    #[test]
    fn unit_capacity_games_have_no_bad_vertices(inst in instances(8, 1), mut rng in seeded()) {
        let m = random_c_matching(&mut rng, &inst);
        let sol = random_solution(&mut rng, &inst, &m, 4);
        prop_assert!(detect_bad_vertices(&inst, &sol).bad.is_empty());
    }

    #[test]
    fn optimum_matches_brute_force_and_ignores_labels(inst in instances(8, 3), mut rng in seeded()) {
        let (m, optimum) = max_weight_c_matching(&inst).unwrap();
        prop_assert_eq!(m.weight(&inst), optimum);
        prop_assert_eq!(optimum, common::max_c_matching_weight(&inst, common::full_mask(inst.vertex_count())));
        // the same game with its vertices listed in a shuffled order
        let mut order: Vec<usize> = (0..inst.vertex_count()).collect();
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
        let renamed = Instance::new(
            order.iter().map(|&u| (inst.id(u), inst.capacity(u) as i64)),
            inst.edges().iter().map(|e| (inst.id(e.u), inst.id(e.v), e.weight)),
        ).unwrap();
        prop_assert_eq!(max_weight_c_matching(&renamed).unwrap().1, optimum);
    }

    #[test]
    fn half_integral_search_matches_simplex(inst in instances(7, 3)) {
        if let Ok(lp) = lp_integrality_check(&inst) {
            let (value, _) = relaxation_optimum_simplex(&inst);
            prop_assert_eq!(lp.fractional_optimum, value);
            prop_assert!(lp.fractional_optimum >= lp.integral_optimum);
            prop_assert_eq!(lp.has_integral_optimal, lp.fractional_optimum == lp.integral_optimum);
        }
    }

    #[test]
    fn documents_round_trip(inst in instances(6, 3), mut rng in seeded()) {
        let back = load_instance(&write_instance(&inst)).unwrap();
        prop_assert_eq!(&back, &inst);
        let m = random_c_matching(&mut rng, &inst);
        let sol = random_solution(&mut rng, &inst, &m, 7);
        prop_assert_eq!(load_solution(&inst, &write_solution(&inst, &sol)).unwrap(), sol);
    }
}
