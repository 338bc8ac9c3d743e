//! Runtime checkers for the slack-robust greedy guarantees.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    alpha_bp, alpha_ratios, alpha_ws, approximate_greedy, brute_force_opt, distorted_greedy,
    OfflineError, Result, SlackPolicy, SlackSchedule,
};
use crate::objectives::{Instance, InstanceSpec, ObjectiveError, WeakSubmodReport};

/// Which guarantee to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Approximate greedy against `alpha_bp` (BP objectives).
    Bp,
    /// Approximate greedy against `alpha_ws` (weakly submodular objectives).
    Ws,
    /// Approximate distorted greedy against `alpha_dist` (BP objectives).
    Dist,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Bp => "bp",
            BoundKind::Ws => "ws",
            BoundKind::Dist => "dist",
        }
    }
}

/// One checked run: `margin = h_alg + slack_sum - alpha * h_opt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub instance_id: usize,
    pub alpha: f64,
    pub h_opt: f64,
    pub h_alg: f64,
    pub slack_sum: f64,
    pub margin: f64,
    pub violated: bool,
    pub which: BoundKind,
    #[serde(skip)]
    pub policy: SlackPolicy,
}

fn tolerance(h_opt: f64) -> f64 {
    1e-9 * h_opt.abs().max(1.0)
}

/// Ratio for `which` on `instance`, from exact constants.
pub fn instance_alpha(instance: &Instance, which: BoundKind) -> Result<f64> {
    match which {
        BoundKind::Ws => {
            let r = WeakSubmodReport::compute(instance.oracle())?;
            Ok(alpha_ws(r.gamma, r.zeta))
        }
        BoundKind::Bp | BoundKind::Dist => {
            let bp = instance.as_bp().ok_or_else(|| {
                ObjectiveError::InvalidInstance("bound requires a BP decomposition".into())
            })?;
            let c = bp.curvatures()?;
            Ok(if which == BoundKind::Bp {
                alpha_bp(c.kappa_f, c.kappa_g)
            } else {
                alpha_ratios(c.kappa_f, c.kappa_g, 1.0, 0.0)?.alpha_dist
            })
        }
    }
}

/// Runs the matching greedy variant `trials` times with slacks drawn from
/// `[0, slack_scale * h_opt / k]` and records `h(S) + sum r_j >= alpha h(S*)`.
#[allow(clippy::too_many_arguments)]
pub fn check_robust_bound<R: Rng + ?Sized>(
    instance_id: usize,
    instance: &Instance,
    k: usize,
    trials: usize,
    policy: SlackPolicy,
    which: BoundKind,
    slack_scale: f64,
    rng: &mut R,
) -> Result<Vec<BoundRow>> {
    let h = instance.oracle();
    let (_, h_opt) = brute_force_opt(h, k)?;
    let alpha = instance_alpha(instance, which)?;
    let max_slack = if k == 0 { 0.0 } else { slack_scale * h_opt / k as f64 };
    let mut rows = Vec::with_capacity(trials);
    for _ in 0..trials {
        let schedule = match policy {
            SlackPolicy::Zero => SlackSchedule::zero(k),
            p => SlackSchedule::random(k, max_slack, p, rng),
        };
        let out = match which {
            BoundKind::Bp | BoundKind::Ws => approximate_greedy(h, k, &schedule, rng)?,
            BoundKind::Dist => {
                let bp = instance.as_bp().ok_or_else(|| {
                    ObjectiveError::InvalidInstance("bound requires a BP decomposition".into())
                })?;
                distorted_greedy(bp, k, &schedule, rng)?
            }
        };
        let slack_sum = out.slack_sum();
        let margin = out.value + slack_sum - alpha * h_opt;
        rows.push(BoundRow {
            instance_id,
            alpha,
            h_opt,
            h_alg: out.value,
            slack_sum,
            margin,
            violated: margin < -tolerance(h_opt),
            which,
            policy,
        });
    }
    Ok(rows)
}

/// Parameters of a randomized sweep over generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub which: BoundKind,
    pub instances: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub k_max: usize,
    /// Trials per slack policy (the zero policy runs once).
    pub trials: usize,
    pub slack_scale: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            which: BoundKind::Bp,
            instances: 200,
            seed: 0,
            n_min: 3,
            n_max: 8,
            k_max: 3,
            trials: 3,
            slack_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: Vec<BoundRow>,
    pub violations: usize,
    pub min_margin: f64,
}

/// Seed of the `i`-th generated instance.
fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Generates `cfg.instances` random instances and checks each with random,
/// worst-feasible and zero slack.
pub fn lemma_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max || cfg.k_max == 0 {
        return Err(OfflineError::Objective(ObjectiveError::InvalidInstance(format!(
            "sweep needs 1 <= n_min <= n_max and k_max >= 1, got n in [{}, {}], k_max {}",
            cfg.n_min, cfg.n_max, cfg.k_max
        ))));
    }
    let per_instance: Vec<Result<Vec<BoundRow>>> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, i));
            let n = rng.random_range(cfg.n_min..=cfg.n_max);
            let k = rng.random_range(1..=cfg.k_max.min(n));
            let kind = if cfg.which == BoundKind::Ws { "ws_mixture" } else { "bp" };
            let instance = InstanceSpec::new(kind, n, rng.random()).generate()?;
            let mut rows = Vec::new();
            for policy in [SlackPolicy::RandomFeasible, SlackPolicy::WorstFeasible] {
                rows.extend(check_robust_bound(
                    i, &instance, k, cfg.trials, policy, cfg.which, cfg.slack_scale, &mut rng,
                )?);
            }
            rows.extend(check_robust_bound(
                i, &instance, k, 1, SlackPolicy::Zero, cfg.which, cfg.slack_scale, &mut rng,
            )?);
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    let violations = rows.iter().filter(|r| r.violated).count();
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(SweepSummary { rows, violations, min_margin })
}
