use dpgraph::extend::is_compatible_pairwise;
use dpgraph::generate::random::{
    clustered_query, compatible_instance, compatible_partial, connected_graph,
};
use dpgraph::oracle::{
    enumerate_strongest_bounds_from, fixed_point_extension, DEFAULT_ENUMERATION_CAP,
};
use dpgraph::propagate::strongest_bounds_from_naive;
use dpgraph::{
    extend_mechanism, is_compatible, strongest_bounds_from, strongest_bounds_multi, verify_dp,
    ExtendOptions, Label, Probability, Schedule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn heap_matches_path_enumeration(seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=8);
        let extra = rng.gen_range(0..=8);
        let g = connected_graph(&mut rng, n, extra, (0.0, 2.0));
        let alpha = Probability::new(alpha).unwrap();
        for s in 0..n {
            let fast = strongest_bounds_from(&g, s, alpha).unwrap();
            let slow = enumerate_strongest_bounds_from(&g, s, alpha, DEFAULT_ENUMERATION_CAP).unwrap();
            for (b, w) in fast.bounds.iter().zip(&slow) {
                prop_assert!((b.get() - w.bound.get()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn naive_schedule_is_bit_exact(seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=40);
        let extra = rng.gen_range(0..=2 * n);
        let g = connected_graph(&mut rng, n, extra, (0.0, 2.0));
        let alpha = Probability::new(alpha).unwrap();
        let s = rng.gen_range(0..n);
        let heap = strongest_bounds_from(&g, s, alpha).unwrap();
        let naive = strongest_bounds_from_naive(&g, s, alpha).unwrap();
        prop_assert_eq!(heap, naive);
    }

    #[test]
    fn multi_source_is_pointwise_min(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=30);
        let extra = rng.gen_range(0..=n);
        let g = connected_graph(&mut rng, n, extra, (0.0, 2.0));
        let k = rng.gen_range(1..=n.min(5));
        let seeds: Vec<(usize, Probability)> = (0..k)
            .map(|_| (rng.gen_range(0..n), Probability::new(rng.gen_range(0.0..=1.0)).unwrap()))
            .collect();
        let multi = strongest_bounds_multi(&g, &seeds).unwrap();
        for v in 0..n {
            let best = seeds
                .iter()
                .map(|&(s, a)| strongest_bounds_from(&g, s, a).unwrap().bounds[v].get())
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(multi.bounds[v].get(), best);
        }
    }

    #[test]
    fn extension_is_private_and_matches_fixed_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=30);
        let extra = rng.gen_range(0..=n);
        let inst = compatible_instance(&mut rng, n, extra, (0.0, 2.0));
        let partial = inst.partial.clone().unwrap();
        let ext = extend_mechanism(&inst.graph, &inst.query, &partial, &ExtendOptions::default()).unwrap();
        prop_assert!(verify_dp(&inst.graph, &ext.mechanism, 1e-9).is_ok());
        let reference = fixed_point_extension(&inst.graph, &inst.query, &partial, 1e-9).unwrap();
        for v in 0..n {
            let d = ext.mechanism.get(v).get() - reference.mechanism.get(v).get();
            prop_assert!(d.abs() <= 1e-9, "vertex {} off by {}", v, d);
        }
    }

    #[test]
    fn schedules_agree_on_extension(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=30);
        let extra = rng.gen_range(0..=n);
        let inst = compatible_instance(&mut rng, n, extra, (0.0, 2.0));
        let partial = inst.partial.clone().unwrap();
        let heap = extend_mechanism(&inst.graph, &inst.query, &partial, &ExtendOptions::default()).unwrap();
        let naive = extend_mechanism(
            &inst.graph,
            &inst.query,
            &partial,
            &ExtendOptions { schedule: Schedule::Naive, ..ExtendOptions::default() },
        )
        .unwrap();
        prop_assert_eq!(heap.mechanism, naive.mechanism);
    }

    #[test]
    fn fast_compatibility_agrees_with_pairwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=20);
        let extra = rng.gen_range(0..=n);
        let g = connected_graph(&mut rng, n, extra, (0.0, 2.0));
        let q = clustered_query(&mut rng, &g, 3);
        let mut partial = compatible_partial(&mut rng, &g, &q, 0.3);
        // nudge a few seeds so roughly half the cases are incompatible
        for v in 0..n {
            if partial.get(v).is_some() && rng.gen_bool(0.2) {
                partial.set(v, Probability::new(rng.gen_range(0.0..=1.0)).unwrap());
            }
        }
        let fast = is_compatible(&g, &partial, 1e-9);
        let slow = is_compatible_pairwise(&g, &partial, 1e-9, Schedule::Heap);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn raising_a_seed_only_raises_ones(seed in any::<u64>(), bump in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=20);
        let extra = rng.gen_range(0..=n);
        let g = connected_graph(&mut rng, n, extra, (0.0, 2.0));
        let q = dpgraph::QueryAssignment::constant(&g, Label::One);
        let s = rng.gen_range(0..n);
        let x = rng.gen_range(0.0..=0.5);
        let mut partial = dpgraph::PartialMechanism::empty(&g);
        partial.set(s, Probability::new(x).unwrap());
        let low = extend_mechanism(&g, &q, &partial, &ExtendOptions::default()).unwrap();
        partial.set(s, Probability::new(x + bump).unwrap());
        let high = extend_mechanism(&g, &q, &partial, &ExtendOptions::default()).unwrap();
        for v in 0..n {
            prop_assert!(high.mechanism.get(v) >= low.mechanism.get(v));
        }
    }
}

#[test]
fn full_domain_is_returned_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.gen_range(1..=15);
        let g = connected_graph(&mut rng, n, n, (0.0, 2.0));
        let q = clustered_query(&mut rng, &g, 2);
        let partial = compatible_partial(&mut rng, &g, &q, 1.0);
        assert_eq!(partial.len(), n);
        let ext = extend_mechanism(&g, &q, &partial, &ExtendOptions::default()).unwrap();
        for v in 0..n {
            assert_eq!(Some(ext.mechanism.get(v)), partial.get(v));
        }
    }
}
