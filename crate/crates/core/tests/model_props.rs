mod common;

use pbatch_core::bounds::pr_bound;
use pbatch_core::model::{
    evaluate_schedule, path_cost, paths_to_schedule, schedule_to_paths, Instance,
};
use pbatch_core::oracle::{exact_optimum, exact_optimum_all_orders};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((1u64..=40, 1u64..=10), 1..=max_n),
        1..=max_m,
    )
        .prop_map(|(jobs, m)| Instance::new(&jobs, 10, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn path_cost_is_total_completion_time(inst in instance(12, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sched = common::random_schedule(&mut rng, &inst);
        let paths = schedule_to_paths(&sched, &inst).unwrap();
        prop_assert_eq!(path_cost(&paths, &inst).unwrap(), evaluate_schedule(&sched, &inst).unwrap());
        for p in &paths {
            let nodes = p.nodes();
            prop_assert_eq!(*nodes.last().unwrap(), inst.n() + 1);
        }
    }

    #[test]
    fn single_machine_paths_round_trip(inst in instance(10, 1), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sched = common::random_schedule(&mut rng, &inst);
        let paths = schedule_to_paths(&sched, &inst).unwrap();
        prop_assert_eq!(paths_to_schedule(&paths, &inst).unwrap(), sched);
    }

    #[test]
    fn pr_bound_scales_linearly(inst in instance(10, 3), lambda in 1u64..=7) {
        let scaled: Vec<(u64, u64)> = inst
            .jobs()
            .iter()
            .map(|j| (j.processing_time * lambda, j.size))
            .collect();
        let scaled = Instance::new(&scaled, inst.capacity(), inst.machines()).unwrap();
        let a = pr_bound(&inst).value * lambda as f64;
        let b = pr_bound(&scaled).value;
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{} vs {}", a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pr_bound_never_exceeds_the_optimum(inst in instance(7, 2)) {
        let opt = exact_optimum(&inst).unwrap().optimum;
        prop_assert!(pr_bound(&inst).value <= opt as f64 + 1e-9);
    }

    #[test]
    fn oracle_schedule_attains_its_value(inst in instance(7, 2)) {
        let res = exact_optimum(&inst).unwrap();
        res.schedule.validate(&inst).unwrap();
        prop_assert_eq!(evaluate_schedule(&res.schedule, &inst).unwrap(), res.optimum);
    }

    #[test]
    fn extra_machine_never_hurts(inst in instance(6, 1)) {
        let one = exact_optimum(&inst).unwrap().optimum;
        let two = exact_optimum(&inst.with_machines(2).unwrap()).unwrap().optimum;
        prop_assert!(two <= one);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn smith_sequencing_matches_all_orders(inst in instance(5, 2)) {
        prop_assert_eq!(
            exact_optimum(&inst).unwrap().optimum,
            exact_optimum_all_orders(&inst).unwrap()
        );
    }
}

#[test]
fn unit_sizes_with_unit_capacity_make_pr_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rand::Rng::gen_range(&mut rng, 1..=6);
        let jobs: Vec<(u64, u64)> = (0..n)
            .map(|_| (rand::Rng::gen_range(&mut rng, 1..=20), 1))
            .collect();
        let inst = Instance::new(&jobs, 1, 1).unwrap();
        let opt = exact_optimum(&inst).unwrap().optimum;
        assert_eq!(pr_bound(&inst).value, opt as f64);
    }
}
