use std::sync::Arc;

use bpb_core::bandit::{
    aggregate, distorted_signal, distortion, run, run_trials, Algorithm, Arrival, BanditError, BaselineKind,
    BaselineMode, Context, ContextObjective, Environment, FeedbackMode, Noise, RegretKind, RunConfig, Scenario,
};
use bpb_core::kernels::{KernelSpec, Operand};
use bpb_core::nystrom::{BetaSchedule, NystromParams};
use bpb_core::objectives::{
    make_sum_dispersion, mask_to_ids, BPObjective, GroundSet, Instance, InstanceSpec, Modular, SetFunctionOracle,
};
use bpb_core::offline::DistortedObjective;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bp_objective(n: usize, seed: u64) -> (GroundSet, BPObjective) {
    match InstanceSpec::new("bp", n, seed).generate().unwrap() {
        Instance::Bp { ground, objective } => (ground, objective),
        Instance::Single { .. } => unreachable!(),
    }
}

fn contexts(m: usize, horizon: Option<usize>, objective: impl Fn(usize) -> usize) -> Vec<Context> {
    (0..m)
        .map(|q| Context { features: Arc::from(vec![q as f64, 1.0]), objective: objective(q), horizon })
        .collect()
}

/// `m` contexts over one random BP objective, round-robin arrivals.
fn bp_scenario(n: usize, m: usize, t_q: usize, noise: Noise, seed: u64) -> Scenario {
    let (ground, bp) = bp_objective(n, seed);
    let obj = ContextObjective::bp("bp", bp).unwrap();
    Scenario::new(ground, vec![obj], contexts(m, Some(t_q), |_| 0), Arrival::RoundRobin, noise, m * t_q, BaselineMode::Auto)
        .unwrap()
}

fn rbf_config() -> RunConfig {
    RunConfig {
        kernel: KernelSpec::Sum {
            children: vec![
                KernelSpec::Rbf { operand: Operand::Whole, bandwidth: 0.5 },
                KernelSpec::Jaccard {},
            ],
            weights: None,
        },
        nystrom: NystromParams::new(0.5, 0.5, 1.0),
        beta: BetaSchedule::Constant { value: 1.0 },
    }
}

#[test]
fn distortion_endpoints() {
    assert_eq!(distortion(2, 0), 0.5);
    for t_q in 1..8 {
        assert_eq!(distortion(t_q, t_q - 1), 1.0);
    }
    assert!((distortion(4, 0) - 0.75f64.powi(3)).abs() < 1e-15);
}

#[test]
fn noiseless_separate_feedback_splits_the_gain() {
    let sc = bp_scenario(8, 2, 4, Noise::None, 3);
    let mut env = Environment::new(&sc, FeedbackMode::Separate, 1).unwrap();
    for _ in 0..8 {
        let u = env.next_context().unwrap();
        let v = env.candidates(u)[0];
        let r = env.step(u, v).unwrap();
        assert!((r.y_f.unwrap() + r.y_g.unwrap() - r.true_gain).abs() < 1e-12);
        assert_eq!(r.y, r.y_f.unwrap() + r.y_g.unwrap());
    }
}

#[test]
fn separate_aggregation_matches_distorted_greedy_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for probe in 0..100 {
        let (ground, bp) = bp_objective(rng.random_range(3..9), probe);
        let n = ground.n();
        let t_q = rng.random_range(1..=n);
        let pi = DistortedObjective::new(&bp, t_q).unwrap();
        let obj = ContextObjective::bp("bp", bp).unwrap();
        let sc = Scenario::new(ground, vec![obj], contexts(1, Some(t_q), |_| 0), Arrival::RoundRobin, Noise::None, t_q, BaselineMode::Auto)
            .unwrap();
        let mut env = Environment::new(&sc, FeedbackMode::Separate, probe).unwrap();
        let steps = rng.random_range(1..=t_q);
        for _ in 0..steps {
            let set = env.selected_sorted(0).to_vec();
            let cands = env.candidates(0);
            let v = cands[rng.random_range(0..cands.len())];
            let r = env.step(0, v).unwrap();
            let l1 = sc.objectives()[0].l1().unwrap()[v];
            let signal = distorted_signal(&r, t_q, Some(l1)).unwrap();
            let expected = pi.gain(set.len(), v, &set);
            assert!((signal - expected).abs() <= 1e-12, "probe {probe}: {signal} vs {expected}");
        }
    }
}

#[test]
fn gaussian_noise_has_zero_mean_and_requested_scale() {
    let sigma = 0.3;
    let sc = bp_scenario(6, 1, 1, Noise::Gaussian { sigma }, 2);
    let eps: Vec<f64> = (0..4000)
        .map(|seed| {
            let mut env = Environment::new(&sc, FeedbackMode::Monolithic, seed).unwrap();
            let r = env.step(0, 2).unwrap();
            r.y - r.true_gain
        })
        .collect();
    let n = eps.len() as f64;
    let mean = eps.iter().sum::<f64>() / n;
    let sd = (eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 4.0 * sigma / n.sqrt(), "mean {mean}");
    assert!((sd - sigma).abs() < 0.05 * sigma, "sd {sd}");
}

#[test]
fn environment_rejects_repeats_and_exhaustion() {
    let sc = bp_scenario(5, 1, 2, Noise::None, 1);
    let mut env = Environment::new(&sc, FeedbackMode::Monolithic, 0).unwrap();
    env.step(0, 3).unwrap();
    assert_eq!(env.step(0, 3), Err(BanditError::AlreadySelected { context: 0, item: 3 }));
    env.step(0, 1).unwrap();
    assert_eq!(env.step(0, 0), Err(BanditError::PoolExhausted { context: 0 }));
    assert_eq!(env.selected(0), &[3, 1]);
}

#[test]
fn optimal_sets_of_a_modular_objective_have_zero_regret() {
    let n = 7;
    let weights: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.37).collect();
    let zero = || SetFunctionOracle::new("zero", Modular::new(vec![0.0; n]));
    let bp = BPObjective::new(weights, zero(), zero(), 1.0, 1.0).unwrap();
    let obj = ContextObjective::bp("modular", bp).unwrap();
    assert_eq!(obj.alpha(RegretKind::Bp), Some(1.0));
    let ground = GroundSet::new((0..n).map(|i| vec![i as f64]).collect()).unwrap();
    let sc = Scenario::new(ground, vec![obj], contexts(2, Some(3), |_| 0), Arrival::RoundRobin, Noise::None, 6, BaselineMode::Exact)
        .unwrap();
    let trace = run(&sc, Algorithm::OfflineGreedy, &rbf_config(), 0).unwrap();
    assert!(trace.final_regret(RegretKind::Bp).abs() < 1e-12);
    assert!(sc.regret(&trace.final_sets, RegretKind::Bp).unwrap().abs() < 1e-12);
}

#[test]
fn fully_curved_supermodular_part_contributes_negative_reward() {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { ((i * 7 + j * 7) % 5) as f64 / 4.0 + 0.1 }).collect())
        .collect();
    let g = make_sum_dispersion(&b).unwrap();
    let f = SetFunctionOracle::new("m", Modular::new((0..n).map(|_| rng.random::<f64>()).collect()));
    let bp = BPObjective::new(vec![0.1; n], f, g, 1.0, 1.0).unwrap();
    let obj = ContextObjective::bp("disp", bp).unwrap();
    assert_eq!(obj.constants.curvature.unwrap().kappa_g, 1.0);
    assert_eq!(obj.alpha(RegretKind::Bp), Some(0.0));
    let ground = GroundSet::new((0..n).map(|i| vec![i as f64]).collect()).unwrap();
    let sc = Scenario::new(ground, vec![obj], contexts(1, Some(3), |_| 0), Arrival::RoundRobin, Noise::None, 3, BaselineMode::Auto)
        .unwrap();
    let trace = run(&sc, Algorithm::MnnUcb, &rbf_config(), 4).unwrap();
    assert!((trace.final_regret(RegretKind::Bp) + trace.final_reward()).abs() < 1e-12);
    assert!(trace.final_regret(RegretKind::Bp) <= 0.0);
}

#[test]
fn exact_baseline_matches_enumeration() {
    let sc = bp_scenario(8, 2, 3, Noise::None, 11);
    let h = sc.objectives()[0].total();
    for k in 0..=3 {
        let brute = (0u64..1 << 8)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| h.value_direct(&mask_to_ids(m)))
            .fold(f64::NEG_INFINITY, f64::max);
        let (value, kind) = sc.baseline(0, k).unwrap();
        assert_eq!(kind, BaselineKind::Exact);
        assert!((value - brute).abs() < 1e-12);
    }
}

#[test]
fn large_exact_baselines_are_refused_and_auto_falls_back() {
    let (ground, bp) = bp_objective(30, 1);
    let build = |mode| {
        let obj = ContextObjective::bp("bp", bp.clone()).unwrap();
        Scenario::new(ground.clone(), vec![obj], contexts(1, Some(10), |_| 0), Arrival::RoundRobin, Noise::None, 10, mode)
    };
    assert!(matches!(build(BaselineMode::Exact), Err(BanditError::InfeasibleBaseline { k: 7, .. })));
    let sc = build(BaselineMode::Auto).unwrap();
    assert_eq!(sc.baseline(0, 4).unwrap().1, BaselineKind::Exact);
    assert_eq!(sc.baseline(0, 10).unwrap().1, BaselineKind::GreedySurrogate);
    assert_eq!(sc.baseline_kinds(), vec![BaselineKind::GreedySurrogate]);
}

#[test]
fn streamed_regret_matches_recomputation() {
    let sc = bp_scenario(8, 3, 3, Noise::Gaussian { sigma: 0.05 }, 6);
    for alg in [Algorithm::MnnUcb, Algorithm::MnnUcbSeparate, Algorithm::SmUcbAblation, Algorithm::OfflineDistorted] {
        let trace = run(&sc, alg, &rbf_config(), 9).unwrap();
        for kind in [RegretKind::Bp, RegretKind::Bp2, RegretKind::Bp3, RegretKind::Ws] {
            let recomputed = sc.regret(&trace.final_sets, kind).unwrap();
            assert!((recomputed - trace.final_regret(kind)).abs() < 1e-9, "{alg:?} {kind:?}");
        }
        let reward: f64 = trace.rows.iter().map(|r| r.true_gain).sum();
        assert!((reward - trace.final_reward()).abs() < 1e-9);
    }
}

#[test]
fn no_item_is_picked_twice_per_context() {
    let sc = bp_scenario(6, 3, 6, Noise::Gaussian { sigma: 0.1 }, 8);
    let trace = run(&sc, Algorithm::MnnUcb, &rbf_config(), 2).unwrap();
    for set in &trace.final_sets {
        let mut s = set.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 6);
    }
}

#[test]
fn trace_arrivals_are_reproduced() {
    let (ground, bp) = bp_objective(6, 2);
    let obj = ContextObjective::bp("bp", bp).unwrap();
    let order = vec![2, 0, 0, 1, 2, 1, 0, 2, 1];
    let sc = Scenario::new(
        ground,
        vec![obj],
        contexts(3, Some(3), |_| 0),
        Arrival::Trace { contexts: order.clone() },
        Noise::None,
        9,
        BaselineMode::Auto,
    )
    .unwrap();
    let trace = run(&sc, Algorithm::MnnUcb, &rbf_config(), 0).unwrap();
    assert_eq!(trace.rows.iter().map(|r| r.context).collect::<Vec<_>>(), order);
}

#[test]
fn iid_arrivals_do_not_depend_on_the_algorithm() {
    let (ground, bp) = bp_objective(6, 2);
    let obj = ContextObjective::bp("bp", bp).unwrap();
    let sc = Scenario::new(ground, vec![obj], contexts(3, Some(4), |_| 0), Arrival::IidUniform, Noise::None, 10, BaselineMode::Auto)
        .unwrap();
    let a = run(&sc, Algorithm::MnnUcb, &rbf_config(), 5).unwrap();
    let b = run(&sc, Algorithm::OfflineGreedy, &rbf_config(), 5).unwrap();
    let ctx = |t: &bpb_core::bandit::RegretTrace| t.rows.iter().map(|r| r.context).collect::<Vec<_>>();
    assert_eq!(ctx(&a), ctx(&b));
}

#[test]
fn full_inclusion_sketch_selects_like_the_exact_posterior() {
    let sc = bp_scenario(8, 3, 4, Noise::Gaussian { sigma: 0.05 }, 12);
    let mut cfg = rbf_config();
    cfg.nystrom = NystromParams::new(0.5, 0.5, f64::INFINITY);
    for seed in 0..3 {
        let sketch = run(&sc, Algorithm::MnnUcb, &cfg, seed).unwrap();
        let exact = run(&sc, Algorithm::MnnUcbExact, &cfg, seed).unwrap();
        let items = |t: &bpb_core::bandit::RegretTrace| t.rows.iter().map(|r| r.item).collect::<Vec<_>>();
        assert_eq!(items(&sketch), items(&exact), "seed {seed}");
    }
}

#[test]
fn first_action_is_uniform_over_the_pool() {
    let sc = bp_scenario(5, 1, 1, Noise::None, 4);
    let mut counts = [0usize; 5];
    for seed in 0..500 {
        let trace = run(&sc, Algorithm::MnnUcb, &rbf_config(), seed).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert!(trace.rows[0].beta.is_nan());
        counts[trace.rows[0].item] += 1;
    }
    for c in counts {
        assert!((60..=140).contains(&c), "{counts:?}");
    }
}

#[test]
fn zero_beta_exploits_the_posterior_mean_on_a_modular_instance() {
    let n = 6;
    let weights: Vec<f64> = vec![0.2, 0.9, 0.4, 0.1, 0.7, 0.3];
    let zero = || SetFunctionOracle::new("zero", Modular::new(vec![0.0; n]));
    let bp = BPObjective::new(weights, zero(), zero(), 1.0, 1.0).unwrap();
    let obj = ContextObjective::bp("modular", bp).unwrap();
    let one_hot: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let ground = GroundSet::new(one_hot).unwrap();
    // Many one-pick contexts over the same user: each round asks for the best item.
    let m = 40;
    let sc = Scenario::new(ground, vec![obj], contexts(m, Some(1), |_| 0).into_iter().map(|mut c| {
        c.features = Arc::from(vec![1.0]);
        c
    }).collect(), Arrival::RoundRobin, Noise::None, m, BaselineMode::Auto)
    .unwrap();
    let cfg = RunConfig {
        kernel: KernelSpec::Linear { operand: Operand::Item },
        nystrom: NystromParams::new(0.01, 0.5, f64::INFINITY),
        beta: BetaSchedule::Constant { value: 0.0 },
    };
    let a = run(&sc, Algorithm::MnnUcb, &cfg, 1).unwrap();
    let b = run(&sc, Algorithm::MnnUcb, &cfg, 1).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    // Unseen items have mean 0, so the first observed (positive) item keeps
    // the highest estimate and is chosen every round.
    assert!(a.rows[1..].iter().all(|r| r.item == a.rows[0].item && r.beta == 0.0));
}

#[test]
fn configuration_errors_are_reported() {
    let (ground, _) = bp_objective(6, 1);
    let h = InstanceSpec::new("facility_location", 6, 1).generate().unwrap().oracle().clone();
    let obj = ContextObjective::single("fl", h).unwrap();
    let sc = Scenario::new(ground.clone(), vec![obj.clone()], contexts(2, Some(3), |_| 0), Arrival::RoundRobin, Noise::None, 6, BaselineMode::Auto)
        .unwrap();
    assert!(matches!(run(&sc, Algorithm::MnnUcbSeparate, &rbf_config(), 0), Err(BanditError::MissingSeparateFeedback { .. })));
    assert!(matches!(run(&sc, Algorithm::SmUcbAblation, &rbf_config(), 0), Err(BanditError::MissingSeparateFeedback { .. })));
    assert!(sc.supports(RegretKind::Ws) && !sc.supports(RegretKind::Bp));
    assert!(run(&sc, Algorithm::MnnUcb, &rbf_config(), 0).unwrap().final_regret(RegretKind::Bp).is_nan());

    let sc = Scenario::new(ground.clone(), vec![obj.clone()], contexts(2, None, |_| 0), Arrival::RoundRobin, Noise::None, 6, BaselineMode::Auto)
        .unwrap();
    assert!(matches!(run(&sc, Algorithm::OfflineDistorted, &rbf_config(), 0), Err(BanditError::MissingHorizon { context: 0 })));

    let mismatched = Scenario::new(ground.clone(), vec![obj.clone()], contexts(2, Some(3), |_| 0), Arrival::RoundRobin, Noise::None, 5, BaselineMode::Auto);
    assert!(matches!(mismatched, Err(BanditError::InvalidScenario(_))));
    let bad_trace = Scenario::new(ground, vec![obj], contexts(2, Some(1), |_| 0), Arrival::Trace { contexts: vec![0, 0] }, Noise::None, 2, BaselineMode::Auto);
    assert!(matches!(bad_trace, Err(BanditError::InvalidScenario(_))));
}

#[test]
fn trials_aggregate_across_seeds() {
    let sc = bp_scenario(7, 2, 3, Noise::Gaussian { sigma: 0.05 }, 1);
    let cfg = rbf_config();
    assert_eq!(run_trials(&sc, &[Algorithm::MnnUcb], &cfg, &[]).unwrap_err(), BanditError::NoSeeds);

    let one = run_trials(&sc, &[Algorithm::MnnUcb], &cfg, &[3]).unwrap();
    let rows = aggregate(one.get(Algorithm::MnnUcb), RegretKind::Bp);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.std_cum_regret == 0.0 && r.std_cum_reward == 0.0 && r.seed_count == 1));

    let twice = run_trials(&sc, &[Algorithm::MnnUcb], &cfg, &[4, 4]).unwrap();
    let t = twice.get(Algorithm::MnnUcb);
    // Debug output compares the NaN beta of the first round as well.
    assert_eq!(format!("{:?}", t[0].rows), format!("{:?}", t[1].rows));

    let many = run_trials(&sc, &[Algorithm::MnnUcb, Algorithm::OfflineGreedy], &cfg, &[0, 1, 2, 3]).unwrap();
    let rows = aggregate(many.get(Algorithm::MnnUcb), RegretKind::Bp);
    assert_eq!(rows.len(), sc.horizon());
    assert!(rows.iter().any(|r| r.std_cum_reward > 0.0));
    let last = rows.last().unwrap();
    let mean = many.get(Algorithm::MnnUcb).iter().map(|t| t.final_regret(RegretKind::Bp)).sum::<f64>() / 4.0;
    assert!((last.mean_cum_regret - mean).abs() < 1e-12);
    assert_eq!(last.algorithm, "mnn_ucb");
    assert_eq!(last.regret_kind, "bp");
}
