use bpb_core::objectives::{mask_to_ids, InstanceSpec, Modular, SetFunctionOracle};
use bpb_core::offline::{
    alpha_bp, alpha_ratios, alpha_ws, approximate_greedy, binomial, brute_force_opt, check_robust_bound,
    distorted_greedy, greedy, lemma_sweep, BoundKind, DistortedObjective, OfflineError, SlackPolicy, SlackSchedule,
    SweepConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn best_of_size(h: &SetFunctionOracle, k: usize) -> f64 {
    (0..1u64 << h.n())
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| h.value(&mask_to_ids(m)).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn brute_force_matches_enumeration(seed in 0u64..500, n in 2usize..=8, k in 0usize..=4) {
        let k = k.min(n);
        let inst = InstanceSpec::new("bp", n, seed).generate().unwrap();
        let h = inst.oracle();
        let (set, value) = brute_force_opt(h, k).unwrap();
        prop_assert_eq!(set.len(), k);
        prop_assert!((value - best_of_size(h, k)).abs() < 1e-9);
        prop_assert!((h.value(&set).unwrap() - value).abs() < 1e-12);
        let mut g = greedy(h, k).unwrap();
        g.sort_unstable();
        prop_assert!(h.value(&g).unwrap() <= value + 1e-9);
    }

    #[test]
    fn approximate_greedy_bound_holds(seed in 0u64..500, n in 3usize..=7, k in 1usize..=3, scale in 0.0f64..1.0) {
        let inst = InstanceSpec::new("bp", n, seed).generate().unwrap();
        let bp = inst.as_bp().unwrap();
        let h = inst.oracle();
        let opt = best_of_size(h, k);
        let c = bp.curvatures().unwrap();
        let alpha = alpha_bp(c.kappa_f, c.kappa_g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for policy in [SlackPolicy::WorstFeasible, SlackPolicy::RandomFeasible] {
            let schedule = SlackSchedule::random(k, scale * opt / k as f64, policy, &mut rng);
            let out = approximate_greedy(h, k, &schedule, &mut rng).unwrap();
            // Realized slack never exceeds the allowed slack.
            for (r, s) in out.realized.iter().zip(&schedule.slacks) {
                prop_assert!(*r <= s + 1e-12);
            }
            prop_assert!(out.value + out.slack_sum() >= alpha * opt - 1e-9);
            let d = distorted_greedy(bp, k, &schedule, &mut rng).unwrap();
            let a = alpha_ratios(c.kappa_f, c.kappa_g, 1.0, 0.0).unwrap().alpha_dist;
            prop_assert!(d.value + d.slack_sum() >= a * opt - 1e-9);
        }
    }

    #[test]
    fn distorted_surrogate_telescopes(seed in 0u64..500, n in 2usize..=7) {
        let inst = InstanceSpec::new("bp", n, seed).generate().unwrap();
        let bp = inst.as_bp().unwrap();
        let k = n.min(3);
        let pi = DistortedObjective::new(bp, k).unwrap();
        prop_assert_eq!(pi.coefficient(k - 1), 1.0);
        for m in 0..1u64 << n {
            let s = mask_to_ids(m);
            prop_assert!((pi.final_value(&s) - bp.value(&s).unwrap()).abs() < 1e-9);
        }
        // Every item's modular lower bound is its last marginal in f.
        let all: Vec<usize> = (0..n).collect();
        for v in 0..n {
            let rest: Vec<usize> = all.iter().copied().filter(|&w| w != v).collect();
            let last = bp.submodular_part().marginal_gain(v, &rest).unwrap();
            prop_assert!((pi.l1()[v] - last).abs() < 1e-12);
        }
    }
}

#[test]
fn ratio_limits_and_ordering() {
    assert_eq!(alpha_bp(0.0, 0.3), 0.7);
    assert!((alpha_bp(1e-12, 0.3) - 0.7).abs() < 1e-9);
    assert!((alpha_bp(1.0, 0.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    assert_eq!(alpha_ws(0.4, 0.0), 0.4);
    assert!((alpha_ws(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    assert!(matches!(alpha_ratios(1.1, 0.0, 1.0, 0.0), Err(OfflineError::OutOfRange { name: "kappa_f", .. })));
    for i in 0..=100 {
        for j in 0..=100 {
            let (kf, kg) = (i as f64 / 100.0, j as f64 / 100.0);
            let r = alpha_ratios(kf, kg, 1.0, 0.0).unwrap();
            assert!(r.alpha_dist >= r.alpha_bp - 1e-12, "kf {kf} kg {kg}");
            assert!(r.alpha_dist_weak <= r.alpha_dist + 1e-12);
        }
    }
}

#[test]
fn greedy_prefers_lowest_id_on_ties() {
    let h = SetFunctionOracle::new("m", Modular::new(vec![1.0, 2.0, 2.0, 0.5]));
    assert_eq!(greedy(&h, 3).unwrap(), vec![1, 2, 0]);
}

#[test]
fn search_cap_and_sizes() {
    assert_eq!(binomial(30, 7), 2_035_800);
    assert_eq!(binomial(5, 7), 0);
    assert_eq!(binomial(5, 5), 1);
    let h = SetFunctionOracle::new("m", Modular::new(vec![1.0; 30]));
    assert!(matches!(brute_force_opt(&h, 7), Err(OfflineError::SearchSpaceTooLarge { count: 2_035_800, .. })));
    assert!(brute_force_opt(&h, 6).is_ok());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bad = SlackSchedule::constant(2, -1.0, SlackPolicy::WorstFeasible);
    assert!(matches!(approximate_greedy(&h, 2, &bad, &mut rng), Err(OfflineError::NegativeSlack { .. })));
    assert!(matches!(approximate_greedy(&h, 3, &bad, &mut rng), Err(OfflineError::SlackLength { .. })));
}

#[test]
fn robust_bound_rows() {
    let inst = InstanceSpec::new("bp", 6, 2).generate().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows = check_robust_bound(4, &inst, 3, 5, SlackPolicy::WorstFeasible, BoundKind::Bp, 0.5, &mut rng).unwrap();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r.instance_id, 4);
        assert!(!r.violated);
        assert!((r.margin - (r.h_alg + r.slack_sum - r.alpha * r.h_opt)).abs() < 1e-12);
    }
}

#[test]
fn small_sweeps_are_clean() {
    for which in [BoundKind::Bp, BoundKind::Ws, BoundKind::Dist] {
        let cfg = SweepConfig { which, instances: 12, n_max: 6, ..SweepConfig::default() };
        let s = lemma_sweep(&cfg).unwrap();
        assert_eq!(s.violations, 0, "{which:?}");
        assert!(s.min_margin >= -1e-9);
        assert!(s.rows.iter().all(|r| r.which == which));
    }
}
