use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use proptest::prelude::*;

use nsw_core::binary::{reclaim_wasted, solve_binary};
use nsw_core::error::SolveError;
use nsw_core::gen::{random_concave_profile, SplitMix64};
use nsw_core::identical::{solve_identical, solve_identical_with};
use nsw_core::io::{parse_allocation, allocation_to_json, parse_instance, GeneratorInfo, InstanceDocument, UtilityMode};
use nsw_core::model::{Allocation, ConcaveProfile, Instance};
use nsw_core::oracle::{brute_force, DEFAULT_BUDGET};
use nsw_core::welfare::{check_ef, check_efx, nsw, nsw_concave};

fn matrix(n: usize, m: usize, max: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0..=max, m), n)
}

fn instance(max_n: usize, max_m: usize, max_value: u64) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m)
        .prop_flat_map(move |(n, m)| matrix(n, m, max_value))
        .prop_map(|rows| Instance::new(rows).unwrap())
}

fn with_allocation(inst: impl Strategy<Value = Instance>) -> impl Strategy<Value = (Instance, Allocation)> {
    inst.prop_flat_map(|inst| {
        let (n, m) = (inst.num_agents(), inst.num_goods());
        (Just(inst), prop::collection::vec(0..n, m))
    })
    .prop_map(|(inst, owner)| {
        let alloc = Allocation::from_owner(inst.num_agents(), owner).unwrap();
        (inst, alloc)
    })
}

fn identical_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, prop::collection::vec(0..=20u64, 1..=max_m))
        .prop_map(|(n, row)| Instance::new(vec![row; n]).unwrap())
}

/// Product of bundle values as a plain integer.
fn product(inst: &Instance, alloc: &Allocation) -> u128 {
    (0..inst.num_agents())
        .map(|i| alloc.bundle(i).iter().map(|&j| u128::from(inst.value(i, j))).sum::<u128>())
        .product()
}

fn document() -> impl Strategy<Value = InstanceDocument> {
    (instance(4, 6, 1_000), 0..3u8, any::<u64>(), prop::option::of(any::<u64>())).prop_map(
        |(instance, kind, seed, generator)| {
            let (n, m) = (instance.num_agents(), instance.num_goods());
            let mut rng = SplitMix64::new(seed);
            let utility = match kind {
                0 => UtilityMode::Additive,
                1 => UtilityMode::Caps((0..n).map(|_| rng.range_inclusive(1, 5)).collect()),
                _ => UtilityMode::Concave(random_concave_profile(&mut rng, n, m)),
            };
            let generator = generator.map(|seed| GeneratorInfo {
                algorithm: "splitmix64".into(),
                family: "random-binary".into(),
                seed,
                density: Some(rng.next_f64()),
                max_value: None,
            });
            InstanceDocument {
                instance,
                utility,
                generator,
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn document_round_trip(doc in document()) {
        let text = doc.to_json();
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn allocation_round_trip((inst, alloc) in with_allocation(instance(4, 6, 3))) {
        let text = allocation_to_json(&alloc);
        let back = parse_allocation(&text, inst.num_agents(), inst.num_goods()).unwrap();
        prop_assert_eq!(back, alloc);
    }

    #[test]
    fn classification_matches_entries(inst in instance(3, 4, 2)) {
        let class = inst.classify();
        let rows = inst.values();
        prop_assert_eq!(class.is_binary, rows.iter().flatten().all(|&v| v <= 1));
        prop_assert_eq!(class.is_identical, rows.iter().all(|r| r == &rows[0]));
    }

    #[test]
    fn envy_free_implies_efx((inst, alloc) in with_allocation(instance(3, 5, 4))) {
        if check_ef(&inst, &alloc).passed() {
            prop_assert!(check_efx(&inst, &alloc).passed());
        }
        if let Some(w) = check_efx(&inst, &alloc).witness() {
            prop_assert!(!check_ef(&inst, &alloc).passed());
            prop_assert!(w.dropped_good.is_some());
        }
    }

    #[test]
    fn positive_values_compare_like_products(
        (inst, a) in with_allocation(instance(3, 5, 6)),
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let owner = (0..inst.num_goods()).map(|_| rng.index(0, inst.num_agents() - 1)).collect();
        let b = Allocation::from_owner(inst.num_agents(), owner).unwrap();
        let (va, vb) = (nsw(&inst, &a), nsw(&inst, &b));
        prop_assert_eq!(va.compare(&vb).unwrap(), vb.compare(&va).unwrap().reverse());
        prop_assert_eq!(va.compare(&va).unwrap(), Ordering::Equal);
        if va.is_positive() && vb.is_positive() {
            prop_assert_eq!(va.cmp(&vb), product(&inst, &a).cmp(&product(&inst, &b)));
        }
        if va.is_positive() != vb.is_positive() {
            prop_assert_eq!(va.cmp(&vb), va.is_positive().cmp(&vb.is_positive()));
        }
    }

    #[test]
    fn compare_is_transitive(
        (inst, a) in with_allocation(instance(3, 4, 3)),
        seeds in (any::<u64>(), any::<u64>()),
    ) {
        let draw = |seed| {
            let mut rng = SplitMix64::new(seed);
            let owner = (0..inst.num_goods()).map(|_| rng.index(0, inst.num_agents() - 1)).collect();
            nsw(&inst, &Allocation::from_owner(inst.num_agents(), owner).unwrap())
        };
        let mut vals = [nsw(&inst, &a), draw(seeds.0), draw(seeds.1)];
        vals.sort();
        prop_assert!(vals[0] <= vals[2]);
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn linear_profile_is_additive((inst, alloc) in with_allocation(instance(3, 5, 1))) {
        let linear = ConcaveProfile::linear(inst.num_agents(), inst.num_goods());
        prop_assert_eq!(nsw_concave(&inst, &linear, &alloc).unwrap(), nsw(&inst, &alloc));
    }

    #[test]
    fn raising_a_value_never_lowers_welfare(
        (inst, alloc) in with_allocation(instance(3, 5, 5)),
        pick in any::<(usize, usize)>(),
        bump in 1..5u64,
    ) {
        let (i, j) = (pick.0 % inst.num_agents(), pick.1 % inst.num_goods());
        let mut rows = inst.values().to_vec();
        rows[i][j] += bump;
        let raised = Instance::new(rows).unwrap();
        prop_assert!(nsw(&raised, &alloc) >= nsw(&inst, &alloc));
    }

    #[test]
    fn oracle_ignores_labels(
        inst in instance(3, 5, 4),
        seed in any::<u64>(),
    ) {
        let (n, m) = (inst.num_agents(), inst.num_goods());
        let mut rng = SplitMix64::new(seed);
        let mut agents: Vec<usize> = (0..n).collect();
        let mut goods: Vec<usize> = (0..m).collect();
        for k in (1..n).rev() { agents.swap(k, rng.index(0, k)); }
        for k in (1..m).rev() { goods.swap(k, rng.index(0, k)); }
        let rows = agents
            .iter()
            .map(|&i| goods.iter().map(|&j| inst.value(i, j)).collect())
            .collect();
        let relabeled = Instance::new(rows).unwrap();
        let a = brute_force(&inst, None, DEFAULT_BUDGET).unwrap().value;
        let b = brute_force(&relabeled, None, DEFAULT_BUDGET).unwrap().value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn binary_solver_reaches_optimum_from_any_start(
        (inst, start) in with_allocation(instance(4, 6, 1)),
    ) {
        let best = brute_force(&inst, None, DEFAULT_BUDGET).unwrap().value;
        match solve_binary(&inst, Some(&start), None) {
            Ok(out) => {
                prop_assert_eq!(&out.value, &best);
                prop_assert_eq!(&nsw(&inst, &out.allocation), &best);
                let mut prev = nsw(&inst, &reclaim_wasted(&inst, &start));
                for step in &out.trace {
                    prop_assert!(step.value > prev);
                    prev = step.value.clone();
                }
            }
            Err(SolveError::Infeasible { .. }) => prop_assert!(!best.is_positive()),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn binary_solver_wastes_only_dead_goods(
        (inst, start) in with_allocation(instance(4, 6, 1)),
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let tables = random_concave_profile(&mut rng, inst.num_agents(), inst.num_goods());
        for profile in [None, Some(&tables)] {
            if let Ok(out) = solve_binary(&inst, Some(&start), profile) {
                for j in out.allocation.wasted_goods(&inst) {
                    prop_assert!(!inst.is_desired_by_anyone(j));
                }
            }
        }
    }

    #[test]
    fn concave_solver_matches_oracle(
        inst in instance(3, 5, 1),
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let profile = random_concave_profile(&mut rng, inst.num_agents(), inst.num_goods());
        let best = brute_force(&inst, Some(&profile), DEFAULT_BUDGET).unwrap().value;
        match solve_binary(&inst, None, Some(&profile)) {
            Ok(out) => prop_assert_eq!(out.value, best),
            Err(SolveError::Infeasible { .. }) => prop_assert!(!best.is_positive()),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn identical_greedy_is_deterministic_and_efx(inst in identical_instance(6, 12)) {
        let a = solve_identical(&inst).unwrap();
        prop_assert_eq!(&a, &solve_identical(&inst).unwrap());
        prop_assert!(check_efx(&inst, &a).passed());
        let mut placed = Vec::new();
        let b = solve_identical_with(&inst, |j, i| placed.push((j, i))).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(placed.iter().all(|&(j, i)| a.owner_of(j) == i));
    }

    #[test]
    fn identical_greedy_meets_proven_bound(inst in identical_instance(4, 8)) {
        let greedy = nsw(&inst, &solve_identical(&inst).unwrap());
        let best = brute_force(&inst, None, DEFAULT_BUDGET).unwrap().value;
        prop_assert_eq!(greedy.zero_count(), best.zero_count());
        if best.is_positive() {
            let r = BigRational::new(BigInt::from(9420), BigInt::from(10000));
            let bound = best.positive_product() * Pow::pow(r, inst.num_agents() as u32);
            prop_assert!(greedy.positive_product() >= &bound);
        }
    }
}
