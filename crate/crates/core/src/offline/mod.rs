//! Offline solvers: exhaustive search, greedy with injected slack, distorted
//! greedy, approximation ratios and the runtime bound checkers built on them.

mod bounds;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::objectives::{
    insert_sorted, modular_lower_bound, BPObjective, ObjectiveError, SetFunctionOracle,
};

pub use bounds::{
    check_robust_bound, lemma_sweep, BoundKind, BoundRow, SweepConfig, SweepSummary,
};

/// Upper limit on the number of size-`k` subsets `brute_force_opt` visits.
pub const SEARCH_CAP: u128 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OfflineError {
    #[error("C({n}, {k}) = {count} subsets exceeds the search cap of {cap}")]
    SearchSpaceTooLarge { n: usize, k: usize, count: u128, cap: u128 },
    #[error("cardinality {k} exceeds ground set size {n}")]
    CardinalityTooLarge { k: usize, n: usize },
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("slack schedule has {got} entries, expected {k}")]
    SlackLength { got: usize, k: usize },
    #[error("slack r_{index} = {value} is negative")]
    NegativeSlack { index: usize, value: f64 },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

pub type Result<T> = std::result::Result<T, OfflineError>;

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Maximizer of `h` over sets of size exactly `k`, with the lexicographically
/// smallest id sequence among ties.
pub fn brute_force_opt(h: &SetFunctionOracle, k: usize) -> Result<(Vec<usize>, f64)> {
    let n = h.n();
    if k > n {
        return Err(OfflineError::CardinalityTooLarge { k, n });
    }
    let count = binomial(n, k);
    if count > SEARCH_CAP {
        return Err(OfflineError::SearchSpaceTooLarge { n, k, count, cap: SEARCH_CAP });
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (idx.clone(), h.value_direct(&idx));
    while next_combination(&mut idx, n) {
        let value = h.value_direct(&idx);
        if value > best.1 {
            best = (idx.clone(), value);
        }
    }
    Ok(best)
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackPolicy {
    /// The lowest-gain item still within `r_j` of the best.
    WorstFeasible,
    /// Uniform among items within `r_j` of the best.
    RandomFeasible,
    /// Exact greedy; the slacks are ignored.
    Zero,
}

/// Per-step slacks `r_1..r_k` with the rule for picking among feasible items.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackSchedule {
    pub slacks: Vec<f64>,
    pub policy: SlackPolicy,
}

impl SlackSchedule {
    pub fn zero(k: usize) -> Self {
        Self { slacks: vec![0.0; k], policy: SlackPolicy::Zero }
    }

    pub fn constant(k: usize, r: f64, policy: SlackPolicy) -> Self {
        Self { slacks: vec![r; k], policy }
    }

    /// Slacks drawn uniformly from `[0, max]`.
    pub fn random<R: Rng + ?Sized>(k: usize, max: f64, policy: SlackPolicy, rng: &mut R) -> Self {
        Self { slacks: (0..k).map(|_| max * rng.random::<f64>()).collect(), policy }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.slacks.len() != k {
            return Err(OfflineError::SlackLength { got: self.slacks.len(), k });
        }
        if let Some(i) = self.slacks.iter().position(|r| !(*r >= 0.0)) {
            return Err(OfflineError::NegativeSlack { index: i + 1, value: self.slacks[i] });
        }
        Ok(())
    }
}

/// Result of a greedy-type run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyOutcome {
    /// Items in selection order.
    pub order: Vec<usize>,
    /// Realized slack `max gain - chosen gain` per step, in the units of the
    /// rule being maximized.
    pub realized: Vec<f64>,
    /// Objective value `h(S)` of the final set.
    pub value: f64,
}

impl GreedyOutcome {
    pub fn slack_sum(&self) -> f64 {
        self.realized.iter().sum()
    }

    pub fn sorted_set(&self) -> Vec<usize> {
        let mut s = self.order.clone();
        s.sort_unstable();
        s
    }
}

/// Shared greedy loop; `gain(j, v, S)` is the step-`j` score of `v` given the
/// sorted current set.
fn slack_greedy<R, G>(n: usize, k: usize, schedule: &SlackSchedule, rng: &mut R, gain: G) -> Result<(Vec<usize>, Vec<f64>, Vec<usize>)>
where
    R: Rng + ?Sized,
    G: Fn(usize, usize, &[usize]) -> f64,
{
    if k > n {
        return Err(OfflineError::CardinalityTooLarge { k, n });
    }
    schedule.validate(k)?;
    let mut set: Vec<usize> = Vec::with_capacity(k);
    let mut order = Vec::with_capacity(k);
    let mut realized = Vec::with_capacity(k);
    for j in 0..k {
        let gains: Vec<(usize, f64)> = (0..n)
            .filter(|v| set.binary_search(v).is_err())
            .map(|v| (v, gain(j, v, &set)))
            .collect();
        let (best_v, best) = gains
            .iter()
            .copied()
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (v, g)| if g > acc.1 { (v, g) } else { acc });
        let r = schedule.slacks[j];
        let chosen = match schedule.policy {
            SlackPolicy::Zero => best_v,
            SlackPolicy::WorstFeasible => gains
                .iter()
                .copied()
                .filter(|&(_, g)| g >= best - r)
                .fold((best_v, best), |acc, (v, g)| if g < acc.1 { (v, g) } else { acc })
                .0,
            SlackPolicy::RandomFeasible => {
                let feasible: Vec<usize> =
                    gains.iter().filter(|&&(_, g)| g >= best - r).map(|&(v, _)| v).collect();
                feasible[rng.random_range(0..feasible.len())]
            }
        };
        let chosen_gain = gains.iter().find(|&&(v, _)| v == chosen).map_or(best, |&(_, g)| g);
        realized.push((best - chosen_gain).max(0.0));
        order.push(chosen);
        set = insert_sorted(&set, chosen);
    }
    Ok((order, realized, set))
}

/// Approximate greedy: each step picks an item whose gain is within `r_j` of
/// the best available gain, according to the schedule's policy.
pub fn approximate_greedy<R: Rng + ?Sized>(
    h: &SetFunctionOracle,
    k: usize,
    schedule: &SlackSchedule,
    rng: &mut R,
) -> Result<GreedyOutcome> {
    let (order, realized, set) = slack_greedy(h.n(), k, schedule, rng, |_, v, s| h.gain_sorted(v, s))?;
    Ok(GreedyOutcome { order, realized, value: h.value_sorted(&set) })
}

/// Standard greedy (largest marginal gain, lowest id on ties).
pub fn greedy(h: &SetFunctionOracle, k: usize) -> Result<Vec<usize>> {
    // The zero policy never draws from the generator.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Ok(approximate_greedy(h, k, &SlackSchedule::zero(k), &mut rng)?.order)
}

/// The step-dependent surrogate `pi_j` of distorted greedy for a BP objective.
///
/// With `f1 = f - l1` the totally normalized submodular part,
/// `pi_j(v | A) = (1 - 1/k)^(k-j-1) f1(v | A) + g(v | A) + l1(v)` for
/// 0-indexed steps `j`.
#[derive(Debug, Clone)]
pub struct DistortedObjective {
    f1: SetFunctionOracle,
    g: SetFunctionOracle,
    l1: Vec<f64>,
    k: usize,
}

impl DistortedObjective {
    pub fn new(bp: &BPObjective, k: usize) -> Result<Self> {
        if k == 0 || k > bp.n() {
            return Err(OfflineError::CardinalityTooLarge { k, n: bp.n() });
        }
        let lb = modular_lower_bound(bp.submodular_part());
        Ok(Self {
            f1: lb.totally_normalized(bp.submodular_part()),
            g: bp.supermodular_part().clone(),
            l1: lb.weights,
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l1(&self) -> &[f64] {
        &self.l1
    }

    pub fn f1(&self) -> &SetFunctionOracle {
        &self.f1
    }

    /// `(1 - 1/k)^(k - j - 1)`; steps at or past `k - 1` are undistorted.
    pub fn coefficient(&self, j: usize) -> f64 {
        let exp = self.k.saturating_sub(j + 1);
        (1.0 - 1.0 / self.k as f64).powi(exp as i32)
    }

    /// `pi_j(v | A)` for a sorted `A` not containing `v`.
    pub fn gain(&self, j: usize, v: usize, set: &[usize]) -> f64 {
        self.coefficient(j) * self.f1.gain_sorted(v, set) + self.g.gain_sorted(v, set) + self.l1[v]
    }

    /// `pi_k(S) = f1(S) + g(S) + l1(S)`, which equals `h(S)`.
    pub fn final_value(&self, set: &[usize]) -> f64 {
        self.f1.value_sorted(set) + self.g.value_sorted(set) + set.iter().map(|&v| self.l1[v]).sum::<f64>()
    }
}

/// Distorted greedy with slack measured in units of `pi_j`.
pub fn distorted_greedy<R: Rng + ?Sized>(
    bp: &BPObjective,
    k: usize,
    schedule: &SlackSchedule,
    rng: &mut R,
) -> Result<GreedyOutcome> {
    let n = bp.n();
    if k > n {
        return Err(OfflineError::CardinalityTooLarge { k, n });
    }
    if k == 0 {
        schedule.validate(0)?;
        return Ok(GreedyOutcome { order: vec![], realized: vec![], value: 0.0 });
    }
    let pi = DistortedObjective::new(bp, k)?;
    let (order, realized, set) = slack_greedy(n, k, schedule, rng, |j, v, s| pi.gain(j, v, s))?;
    Ok(GreedyOutcome { order, realized, value: bp.total().value_sorted(&set) })
}

/// The approximation ratios used as regret multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRatios {
    pub alpha_bp: f64,
    pub alpha_ws: f64,
    pub alpha_dist: f64,
    pub alpha_dist_weak: f64,
    pub alpha_naive: f64,
}

/// Greedy ratio for BP objectives; the `kappa_f -> 0` limit is `1 - kappa_g`.
pub fn alpha_bp(kappa_f: f64, kappa_g: f64) -> f64 {
    let x = (1.0 - kappa_g) * kappa_f;
    if kappa_f == 0.0 {
        1.0 - kappa_g
    } else {
        -(-x).exp_m1() / kappa_f
    }
}

/// Greedy ratio for weakly submodular objectives; the `zeta -> 0` limit is `gamma`.
pub fn alpha_ws(gamma: f64, zeta: f64) -> f64 {
    if zeta == 0.0 {
        gamma
    } else {
        -(-zeta * gamma).exp_m1() / zeta
    }
}

pub fn alpha_ratios(kappa_f: f64, kappa_g: f64, gamma: f64, zeta: f64) -> Result<AlphaRatios> {
    for (name, value) in [("kappa_f", kappa_f), ("kappa_g", kappa_g), ("gamma", gamma), ("zeta", zeta)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(OfflineError::OutOfRange { name, value });
        }
    }
    let e = std::f64::consts::E;
    Ok(AlphaRatios {
        alpha_bp: alpha_bp(kappa_f, kappa_g),
        alpha_ws: alpha_ws(gamma, zeta),
        alpha_dist: (1.0 - kappa_f / e).min(1.0 - kappa_g),
        alpha_dist_weak: (1.0 - 1.0 / e).min(1.0 - kappa_g),
        alpha_naive: -(-(1.0 - kappa_g)).exp_m1(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{CardinalityPower, FnSetFunction, Modular};

    fn modular(w: &[f64]) -> SetFunctionOracle {
        SetFunctionOracle::new("modular", Modular::new(w.to_vec()))
    }

    #[test]
    fn brute_force_on_modular() {
        let h = modular(&[3.0, 1.0, 2.0]);
        assert_eq!(brute_force_opt(&h, 2).unwrap(), (vec![0, 2], 5.0));
        assert_eq!(brute_force_opt(&h, 3).unwrap().0, vec![0, 1, 2]);
        assert!(matches!(brute_force_opt(&h, 4), Err(OfflineError::CardinalityTooLarge { .. })));
    }

    #[test]
    fn brute_force_ties_pick_lexicographic_first() {
        let h = modular(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(brute_force_opt(&h, 2).unwrap().0, vec![0, 1]);
    }

    #[test]
    fn brute_force_cap() {
        let h = SetFunctionOracle::unmemoized("card", CardinalityPower { n: 40, exponent: 1.0, scale: 1.0 });
        assert!(matches!(brute_force_opt(&h, 20), Err(OfflineError::SearchSpaceTooLarge { .. })));
        assert_eq!(binomial(30, 4), 27_405);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn greedy_takes_top_weights() {
        let h = modular(&[0.5, 3.0, 1.0, 3.0]);
        assert_eq!(greedy(&h, 3).unwrap(), vec![1, 3, 2]);
    }

    #[test]
    fn infinite_worst_slack_picks_minimum_gain() {
        let h = modular(&[0.5, 3.0, 1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SlackSchedule::constant(2, f64::INFINITY, SlackPolicy::WorstFeasible);
        let out = approximate_greedy(&h, 2, &s, &mut rng).unwrap();
        assert_eq!(out.order, vec![0, 2]);
        assert_eq!(out.realized, vec![2.5, 2.0]);
    }

    #[test]
    fn zero_slack_matches_greedy() {
        let h = SetFunctionOracle::new(
            "cov",
            FnSetFunction::new(5, |s: &[usize]| (s.iter().map(|&v| v % 3).collect::<std::collections::BTreeSet<_>>().len()) as f64),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SlackSchedule::constant(3, 0.0, SlackPolicy::WorstFeasible);
        assert_eq!(approximate_greedy(&h, 3, &s, &mut rng).unwrap().order, greedy(&h, 3).unwrap());
    }

    #[test]
    fn slack_schedule_validation() {
        let h = modular(&[1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = SlackSchedule { slacks: vec![-1.0], policy: SlackPolicy::Zero };
        assert!(matches!(approximate_greedy(&h, 1, &bad, &mut rng), Err(OfflineError::NegativeSlack { .. })));
        let short = SlackSchedule::zero(1);
        assert!(matches!(approximate_greedy(&h, 2, &short, &mut rng), Err(OfflineError::SlackLength { .. })));
    }

    #[test]
    fn alpha_reference_values() {
        let e = std::f64::consts::E;
        let a = alpha_ratios(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((a.alpha_bp - (1.0 - 1.0 / e)).abs() < 1e-15);
        assert!((a.alpha_bp - 0.63212).abs() < 1e-5);
        assert_eq!(a.alpha_dist, a.alpha_bp);
        assert_eq!(alpha_ratios(0.3, 1.0, 1.0, 0.0).unwrap().alpha_bp, 0.0);
        let b = alpha_ratios(0.5, 0.2, 1.0, 0.0).unwrap();
        assert!((b.alpha_dist - 0.8).abs() < 1e-15);
        assert!((b.alpha_bp - 0.6594).abs() < 1e-4);
        assert!(b.alpha_dist >= b.alpha_bp);
        assert!((alpha_bp(1e-9, 0.3) - 0.7).abs() <= 1e-6);
        assert!((alpha_ws(0.4, 1e-12) - 0.4).abs() < 1e-9);
        assert!(alpha_ratios(1.1, 0.0, 1.0, 0.0).is_err());
    }
}
