use innovation_search::{
    backward_induction, best_assignment, compare_with_continuous, evaluate_assignment, evaluate_recursive,
    structure_check, Assignment, CostModel, DiscreteInstance, ModelParams, SolverConfig, DEFAULT_BUDGET,
};
use proptest::prelude::*;

fn reference() -> ModelParams {
    ModelParams::new(0.5, 2.0, 0.9, CostModel::reciprocal(0.0, 1.0).unwrap()).unwrap()
}

/// Strictly increasing positive slot costs.
fn slot_costs(max_slots: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..0.6f64, 1..=max_slots).prop_map(|steps| {
        let mut total = 0.0;
        steps
            .into_iter()
            .map(|s| {
                total += s;
                total
            })
            .collect()
    })
}

fn instance(max_slots: usize, max_horizon: usize) -> impl Strategy<Value = DiscreteInstance> {
    (slot_costs(max_slots), 0.05..0.95f64, 0.2..6.0f64, 0.1..0.99f64, 1..=max_horizon)
        .prop_map(|(costs, p, v, delta, t)| DiscreteInstance::new(costs, p, v, delta, t).unwrap())
}

fn schedule_for(inst: &DiscreteInstance) -> impl Strategy<Value = Assignment> {
    let t = inst.horizon() as u32;
    prop::collection::vec(prop::option::of(1..=t), inst.slots()).prop_map(Assignment::new)
}

fn with_schedule(max_slots: usize, max_horizon: usize) -> impl Strategy<Value = (DiscreteInstance, Assignment)> {
    instance(max_slots, max_horizon).prop_flat_map(|inst| {
        let s = schedule_for(&inst);
        (Just(inst), s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluators_agree((inst, a) in with_schedule(8, 5)) {
        let unrolled = evaluate_assignment(&inst, &a).unwrap();
        let recursive = evaluate_recursive(&inst, &a).unwrap();
        prop_assert!((unrolled - recursive).abs() < 1e-12, "{unrolled} vs {recursive}");
    }

    #[test]
    fn swapping_into_decreasing_order_never_helps((inst, a) in with_schedule(7, 4)) {
        let base = evaluate_assignment(&inst, &a).unwrap();
        let s = a.schedule();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                // slot i cheaper than slot j: searching it strictly later breaks the order
                if let (Some(ti), Some(tj)) = (s[i], s[j]) {
                    if ti < tj {
                        let mut swapped = s.to_vec();
                        swapped.swap(i, j);
                        let v = evaluate_assignment(&inst, &Assignment::new(swapped)).unwrap();
                        prop_assert!(v <= base + 1e-12, "swap {i},{j}: {v} > {base}");
                    }
                }
            }
        }
    }

    #[test]
    fn maximizers_have_prefix_structure(inst in instance(6, 3)) {
        let best = best_assignment(&inst, DEFAULT_BUDGET).unwrap();
        let report = structure_check(&best.assignment);
        prop_assert!(report.all(), "{} fails {:?}", best.assignment, report);
        prop_assert!(best.value >= 0.0);
        prop_assert_eq!(best.evaluated as f64, inst.schedule_count());
    }
}

#[test]
fn structure_examples() {
    let a = |s: &[Option<u32>]| structure_check(&Assignment::new(s.to_vec()));
    assert!(a(&[Some(1), Some(1), Some(2), None]).all());
    assert!(!a(&[Some(1), None, Some(2), None]).no_gaps);
    assert!(!a(&[Some(2), Some(1), None, None]).increasing_order);
    assert!(!a(&[Some(2), Some(2), None, None]).no_breaks);
}

#[test]
fn four_slot_two_period_fixture() {
    let inst = DiscreteInstance::from_model(&reference(), 4, 2).unwrap();
    let best = best_assignment(&inst, DEFAULT_BUDGET).unwrap();
    assert_eq!(best.assignment.to_string(), "[1,2,never,never]");
    assert!((best.value - 0.3148891549130396).abs() < 1e-12);
    assert_eq!(best.near_ties, 1);
    assert_eq!(best.evaluated, 81);
}

#[test]
fn prohibitive_costs_give_empty_schedule() {
    let inst = DiscreteInstance::new(vec![1.5, 2.0, 2.5], 0.5, 2.0, 0.9, 3).unwrap();
    let best = best_assignment(&inst, DEFAULT_BUDGET).unwrap();
    assert_eq!(best.assignment, Assignment::empty(3));
    assert_eq!(best.value, 0.0);
}

#[test]
fn perturbed_costs_have_unique_maximizer() {
    for seed in 0..20u64 {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut total = 0.0;
        let costs: Vec<f64> = (0..5)
            .map(|_| {
                total += 0.02 + 0.3 * next();
                total
            })
            .collect();
        let inst = DiscreteInstance::new(costs, 0.2 + 0.6 * next(), 1.0 + 3.0 * next(), 0.5 + 0.4 * next(), 3).unwrap();
        assert_eq!(best_assignment(&inst, DEFAULT_BUDGET).unwrap().near_ties, 1, "seed {seed}");
    }
}

#[test]
fn no_search_instance_matches_exactly() {
    let params = ModelParams::new(0.1, 1.0, 0.9, CostModel::reciprocal(0.2, 1.0).unwrap()).unwrap();
    let inst = DiscreteInstance::from_model(&params, 4, 2).unwrap();
    let c = compare_with_continuous(&inst, None, DEFAULT_BUDGET).unwrap();
    assert_eq!(c.discrete.value, 0.0);
    assert_eq!(c.continuous_value, 0.0);
    assert_eq!(c.value_gap, 0.0);
}

#[test]
fn discrete_frontier_within_one_cell_at_sixteen_slots() {
    let params = reference();
    let truncated = backward_induction(&params, 2, &SolverConfig::default()).unwrap();
    let inst = DiscreteInstance::from_model(&params, 16, 2).unwrap();
    let c = compare_with_continuous(&inst, Some(&truncated), 50_000_000).unwrap();
    assert!(c.frontier_deviation <= 1.0 / 16.0, "deviation {}", c.frontier_deviation);
    assert!(c.structure.all());
}

#[test]
fn budget_is_enforced() {
    let inst = DiscreteInstance::from_model(&reference(), 16, 2).unwrap();
    assert!(best_assignment(&inst, DEFAULT_BUDGET).is_err());
}
