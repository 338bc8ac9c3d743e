use std::collections::HashMap;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::{distorted_signal, stream, unavailable, Environment, Scenario, STREAM_POLICY, STREAM_SKETCH};
use super::{Algorithm, BanditError, RegretKind, Result};
use crate::kernels::{effective_dimension, gram_sym, ContextPoint, KernelSpec};
use crate::nystrom::{BetaSchedule, ExactModel, NystromParams, NystromState, NystromSummary, PosteriorEstimate};
use crate::offline::DistortedObjective;

/// UCB ties within this relative tolerance go to the lowest item id.
const TIE_TOL: f64 = 1e-12;

/// Learner settings shared by every run of a trial batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub nystrom: NystromParams,
    #[serde(default)]
    pub beta: BetaSchedule,
}

impl RunConfig {
    pub fn new(kernel: KernelSpec) -> Self {
        Self { kernel, nystrom: NystromParams::default(), beta: BetaSchedule::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.nystrom.validate()?;
        self.beta.validate()?;
        Ok(())
    }
}

/// One simulated round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRow {
    /// 1-based round index.
    pub t: usize,
    pub context: usize,
    pub item: usize,
    /// The scalar the learner was trained on this round.
    pub y: f64,
    /// `NaN` when the pick did not use a UCB score.
    pub beta: f64,
    pub g_size: usize,
    pub true_gain: f64,
    /// Cumulative regret per [`RegretKind::index`]; `NaN` where undefined.
    pub cum_regret: [f64; 4],
    pub cum_reward: f64,
}

impl RoundRow {
    pub fn regret(&self, kind: RegretKind) -> f64 {
        self.cum_regret[kind.index()]
    }
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub rows: Vec<RoundRow>,
    /// Selection order per context.
    pub final_sets: Vec<Vec<usize>>,
    pub nystrom: Option<NystromSummary>,
}

impl RegretTrace {
    pub fn final_regret(&self, kind: RegretKind) -> f64 {
        self.rows.last().map_or(0.0, |r| r.regret(kind))
    }

    pub fn final_reward(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_reward)
    }
}

enum Model {
    Sketch(Box<NystromState>),
    Exact { kernel: KernelSpec, lambda: f64, points: Vec<ContextPoint>, ys: Vec<f64>, fit: ExactModel },
    Oracle,
}

impl Model {
    fn is_empty(&self) -> bool {
        match self {
            Model::Sketch(s) => s.g_size() == 0,
            Model::Exact { points, .. } => points.is_empty(),
            Model::Oracle => false,
        }
    }

    fn g_size(&self) -> usize {
        match self {
            Model::Sketch(s) => s.g_size(),
            Model::Exact { points, .. } => points.len(),
            Model::Oracle => 0,
        }
    }

    fn predict(&self, queries: &[ContextPoint]) -> Result<PosteriorEstimate> {
        match self {
            Model::Sketch(s) => Ok(s.mv_calc(queries)?),
            Model::Exact { fit, .. } => Ok(fit.predict(queries)),
            Model::Oracle => unreachable!("oracle policies do not query a posterior"),
        }
    }

    fn d_eff(&self) -> Result<f64> {
        match self {
            Model::Sketch(s) => Ok(s.d_eff()?),
            Model::Exact { kernel, lambda, points, .. } => {
                Ok(effective_dimension(&gram_sym(kernel, points), *lambda)?)
            }
            Model::Oracle => Ok(0.0),
        }
    }

    fn observe(&mut self, x: ContextPoint, y: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        match self {
            Model::Sketch(s) => {
                s.observe(&x, y, rng)?;
            }
            Model::Exact { kernel, lambda, points, ys, fit } => {
                points.push(x);
                ys.push(y);
                *fit = ExactModel::fit(kernel.clone(), *lambda, points.clone(), ys.clone())?;
            }
            Model::Oracle => {}
        }
        Ok(())
    }
}

/// Index of the largest score; near-ties go to the earliest (lowest id) entry.
fn argmax_low(scores: &[f64]) -> usize {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max - TIE_TOL * max.abs().max(1.0);
    scores.iter().position(|&s| s >= floor).unwrap_or(0)
}

/// Runs one algorithm for the scenario's horizon.
pub fn run(scenario: &Scenario, algorithm: Algorithm, cfg: &RunConfig, seed: u64) -> Result<RegretTrace> {
    cfg.validate()?;
    let mut env = Environment::new(scenario, algorithm.feedback_mode(), seed)?;
    let mut policy_rng = stream(seed, STREAM_POLICY);
    let mut sketch_rng = stream(seed, STREAM_SKETCH);
    let separate = matches!(algorithm, Algorithm::MnnUcbSeparate | Algorithm::MnnUcbSeparateNoL1);
    let needs_horizon = separate || algorithm == Algorithm::OfflineDistorted;
    if needs_horizon {
        if let Some(q) = scenario.contexts().iter().position(|c| c.horizon.is_none()) {
            return Err(BanditError::MissingHorizon { context: q });
        }
    }
    let mut model = match algorithm {
        Algorithm::OfflineGreedy | Algorithm::OfflineDistorted => Model::Oracle,
        Algorithm::MnnUcbExact => Model::Exact {
            kernel: cfg.kernel.clone(),
            lambda: cfg.nystrom.lambda,
            points: Vec::new(),
            ys: Vec::new(),
            fit: ExactModel::fit(cfg.kernel.clone(), cfg.nystrom.lambda, Vec::new(), Vec::new())?,
        },
        _ => Model::Sketch(Box::new(NystromState::new(cfg.kernel.clone(), cfg.nystrom)?)),
    };
    let mut distorted: HashMap<usize, DistortedObjective> = HashMap::new();
    let mut d_eff_cache: Option<(usize, f64)> = None;

    let ground = scenario.ground();
    let mut rows = Vec::with_capacity(scenario.horizon());
    let mut cum_regret = [0.0f64; 4];
    for kind in RegretKind::ALL {
        if !scenario.supports(kind) {
            cum_regret[kind.index()] = f64::NAN;
        }
    }
    let mut cum_reward = 0.0;

    for t in 1..=scenario.horizon() {
        let u = env.next_context()?;
        let ctx = &scenario.contexts()[u];
        let obj_id = ctx.objective;
        let obj = &scenario.objectives()[obj_id];
        let set = env.selected_sorted(u).to_vec();
        let candidates = env.candidates(u);
        if candidates.is_empty() {
            return Err(BanditError::PoolExhausted { context: u });
        }
        let mut beta = f64::NAN;
        let item = match &model {
            Model::Oracle => {
                let scores: Vec<f64> = if algorithm == Algorithm::OfflineGreedy {
                    candidates.iter().map(|&v| obj.total().gain_sorted(v, &set)).collect()
                } else {
                    let bp = obj.as_bp().ok_or(BanditError::MissingSeparateFeedback { context: u })?;
                    let k = ctx.horizon.expect("checked above");
                    let key = obj_id * (ground.n() + 1) + k;
                    let d = match distorted.entry(key) {
                        std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                        std::collections::hash_map::Entry::Vacant(e) => e.insert(DistortedObjective::new(bp, k)?),
                    };
                    candidates.iter().map(|&v| d.gain(set.len(), v, &set)).collect()
                };
                candidates[argmax_low(&scores)]
            }
            m if t == 1 || m.is_empty() => candidates[policy_rng.random_range(0..candidates.len())],
            m => {
                let points = candidates
                    .iter()
                    .map(|&v| ContextPoint::new(ctx.features.clone(), &set, v, ground))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let est = m.predict(&points)?;
                let d_eff = if cfg.beta.needs_d_eff() {
                    // Only changes when the stored set grows.
                    match d_eff_cache {
                        Some((g, d)) if g == m.g_size() => d,
                        _ => {
                            let d = m.d_eff()?;
                            d_eff_cache = Some((m.g_size(), d));
                            d
                        }
                    }
                } else {
                    0.0
                };
                beta = cfg.beta.beta(t, d_eff)?;
                let scores: Vec<f64> =
                    est.mean.iter().zip(&est.var).map(|(mu, var)| mu + beta * var.sqrt()).collect();
                candidates[argmax_low(&scores)]
            }
        };

        let record = env.step(u, item)?;
        let signal = match algorithm {
            Algorithm::MnnUcbSeparate | Algorithm::MnnUcbSeparateNoL1 => {
                let l1 = if algorithm == Algorithm::MnnUcbSeparate {
                    let l1 = obj.l1().ok_or(BanditError::MissingSeparateFeedback { context: u })?;
                    Some(l1[item])
                } else {
                    None
                };
                distorted_signal(&record, ctx.horizon.expect("checked above"), l1)
                    .ok_or(BanditError::MissingSeparateFeedback { context: u })?
            }
            _ => record.y,
        };
        if !matches!(model, Model::Oracle) {
            let x = ContextPoint::new(ctx.features.clone(), &set, item, ground)?;
            model.observe(x, signal, &mut sketch_rng)?;
        }

        let s = record.set_size;
        for kind in RegretKind::ALL {
            let slot = &mut cum_regret[kind.index()];
            if slot.is_nan() {
                continue;
            }
            let alpha = obj.alpha(kind).ok_or_else(|| unavailable(kind, obj))?;
            let (before, _) = scenario.baseline(obj_id, s).expect("baseline table covers the horizon");
            let (after, _) = scenario.baseline(obj_id, s + 1).expect("baseline table covers the horizon");
            *slot += alpha * (after - before) - record.true_gain;
        }
        cum_reward += record.true_gain;
        rows.push(RoundRow {
            t,
            context: u,
            item,
            y: signal,
            beta,
            g_size: model.g_size(),
            true_gain: record.true_gain,
            cum_regret,
            cum_reward,
        });
    }

    let nystrom = match &model {
        Model::Sketch(s) => Some(s.summary()),
        _ => None,
    };
    Ok(RegretTrace { algorithm, seed, rows, final_sets: env.final_sets(), nystrom })
}
