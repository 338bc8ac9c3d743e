use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{BanditError, RegretKind, Result};
use crate::objectives::{
    insert_sorted, modular_lower_bound, BPObjective, CurvatureReport, GroundSet, SetFunctionOracle,
    WeakSubmodReport, ENUMERATION_CAP,
};
use crate::offline::{alpha_bp, alpha_ws, binomial, brute_force_opt, greedy, SEARCH_CAP};

// Stream ids for the per-run generators. Each consumer gets its own stream so
// that, for a fixed seed, arrivals and noise are identical across algorithms.
pub(crate) const STREAM_ARRIVAL: u64 = 0;
pub(crate) const STREAM_NOISE: u64 = 1;
pub(crate) const STREAM_POLICY: u64 = 2;
pub(crate) const STREAM_SKETCH: u64 = 3;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// How contexts arrive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Arrival {
    /// Cycles through the contexts, skipping any whose horizon is used up.
    RoundRobin,
    /// Uniform over the contexts that still have capacity.
    IidUniform,
    /// A fixed sequence of context ids, one per round.
    Trace { contexts: Vec<usize> },
}

/// Observation noise added to every feedback value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Noise {
    None,
    Gaussian { sigma: f64 },
}

impl Noise {
    fn sigma(self) -> f64 {
        match self {
            Noise::None => 0.0,
            Noise::Gaussian { sigma } => sigma,
        }
    }
}

/// What the learner observes after each pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// `h(v|S) + eps`.
    Monolithic,
    /// The submodular and supermodular gains, each with `eps / 2`.
    Separate,
    /// `m(v) + scale_f f(v|S) + eps`; the supermodular part is hidden.
    SubmodularOnly,
}

/// How the offline comparator `h(S*)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Exact when the search space is within the cap, greedy otherwise.
    #[default]
    Auto,
    Exact,
    GreedySurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Exact,
    GreedySurrogate,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Exact => "exact",
            BaselineKind::GreedySurrogate => "greedy_surrogate",
        }
    }
}

/// Structural constants and the regret multipliers derived from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveConstants {
    pub curvature: Option<CurvatureReport>,
    /// Only for ground sets within the enumeration cap.
    pub weak: Option<WeakSubmodReport>,
    /// Indexed by [`RegretKind::index`].
    pub alphas: [Option<f64>; 4],
}

/// The objective shared by one or more contexts.
#[derive(Debug, Clone)]
pub struct ContextObjective {
    pub name: String,
    total: SetFunctionOracle,
    bp: Option<BPObjective>,
    l1: Option<Vec<f64>>,
    pub constants: ObjectiveConstants,
}

impl ContextObjective {
    pub fn bp(name: impl Into<String>, bp: BPObjective) -> Result<Self> {
        let curvature = bp.curvatures()?;
        let weak = Self::weak(bp.total())?;
        let (kf, kg) = (curvature.kappa_f, curvature.kappa_g);
        let e = std::f64::consts::E;
        let alphas = [
            Some(alpha_bp(kf, kg)),
            Some((1.0 - kf / e).min(1.0 - kg)),
            Some((1.0 - 1.0 / e).min(1.0 - kg)),
            weak.as_ref().map(|w| alpha_ws(w.gamma, w.zeta)),
        ];
        Ok(Self {
            name: name.into(),
            total: bp.total().clone(),
            l1: Some(modular_lower_bound(bp.submodular_part()).weights),
            bp: Some(bp),
            constants: ObjectiveConstants { curvature: Some(curvature), weak, alphas },
        })
    }

    /// An objective without a BP decomposition; only `ws` regret is defined.
    pub fn single(name: impl Into<String>, h: SetFunctionOracle) -> Result<Self> {
        let weak = Self::weak(&h)?;
        let alphas = [None, None, None, weak.as_ref().map(|w| alpha_ws(w.gamma, w.zeta))];
        Ok(Self {
            name: name.into(),
            total: h,
            bp: None,
            l1: None,
            constants: ObjectiveConstants { curvature: None, weak, alphas },
        })
    }

    fn weak(h: &SetFunctionOracle) -> Result<Option<WeakSubmodReport>> {
        if h.n() > ENUMERATION_CAP {
            return Ok(None);
        }
        Ok(Some(WeakSubmodReport::compute(h)?))
    }

    pub fn n(&self) -> usize {
        self.total.n()
    }

    pub fn total(&self) -> &SetFunctionOracle {
        &self.total
    }

    pub fn as_bp(&self) -> Option<&BPObjective> {
        self.bp.as_ref()
    }

    /// `l1(v)` of the submodular part, for BP objectives.
    pub fn l1(&self) -> Option<&[f64]> {
        self.l1.as_deref()
    }

    pub fn alpha(&self, kind: RegretKind) -> Option<f64> {
        self.constants.alphas[kind.index()]
    }
}

/// One context: a user feature vector, its objective and an optional horizon.
#[derive(Debug, Clone)]
pub struct Context {
    pub features: Arc<[f64]>,
    /// Index into [`Scenario::objectives`].
    pub objective: usize,
    /// `T_q`, the number of picks this context receives.
    pub horizon: Option<usize>,
}

/// Everything fixed across runs: items, contexts, arrivals, noise and the
/// offline comparators.
#[derive(Debug, Clone)]
pub struct Scenario {
    ground: GroundSet,
    objectives: Vec<Arc<ContextObjective>>,
    contexts: Vec<Context>,
    arrival: Arrival,
    noise: Noise,
    horizon: usize,
    baseline_mode: BaselineMode,
    // baselines[objective][k] = (h(S*_k), kind), k = 0 ..= largest size needed.
    baselines: Vec<Vec<(f64, BaselineKind)>>,
}

impl Scenario {
    pub fn new(
        ground: GroundSet,
        objectives: Vec<ContextObjective>,
        contexts: Vec<Context>,
        arrival: Arrival,
        noise: Noise,
        horizon: usize,
        baseline_mode: BaselineMode,
    ) -> Result<Self> {
        let invalid = |m: String| Err(BanditError::InvalidScenario(m));
        ground.validate()?;
        let n = ground.n();
        if contexts.is_empty() {
            return invalid("at least one context is required".into());
        }
        if horizon == 0 {
            return invalid("horizon must be >= 1".into());
        }
        if let Some(o) = objectives.iter().find(|o| o.n() != n) {
            return invalid(format!("objective {} has {} items, ground set has {n}", o.name, o.n()));
        }
        let dim = contexts[0].features.len();
        for (q, c) in contexts.iter().enumerate() {
            if c.objective >= objectives.len() {
                return invalid(format!("context {q} refers to missing objective {}", c.objective));
            }
            if c.features.len() != dim {
                return invalid(format!("context {q} has {} features, expected {dim}", c.features.len()));
            }
            if c.features.iter().any(|x| !x.is_finite()) {
                return invalid(format!("context {q} has non-finite features"));
            }
            if let Some(h) = c.horizon {
                if h == 0 || h > n {
                    return invalid(format!("context {q} horizon {h} must be in 1..={n}"));
                }
            }
        }
        if let Noise::Gaussian { sigma } = noise {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return invalid(format!("noise sigma must be >= 0, got {sigma}"));
            }
        }
        let capacity = |q: usize| contexts[q].horizon.unwrap_or(n);
        let all_fixed = contexts.iter().all(|c| c.horizon.is_some());
        match &arrival {
            Arrival::Trace { contexts: trace } => {
                if trace.len() != horizon {
                    return invalid(format!("trace has {} rounds, horizon is {horizon}", trace.len()));
                }
                let mut counts = vec![0usize; contexts.len()];
                for &q in trace {
                    if q >= contexts.len() {
                        return invalid(format!("trace refers to missing context {q}"));
                    }
                    counts[q] += 1;
                    if counts[q] > capacity(q) {
                        return invalid(format!("trace visits context {q} more than {} times", capacity(q)));
                    }
                }
                if all_fixed && counts.iter().enumerate().any(|(q, &c)| c != capacity(q)) {
                    return invalid("trace visit counts must equal the per-context horizons".into());
                }
            }
            Arrival::RoundRobin | Arrival::IidUniform => {
                let total: usize = (0..contexts.len()).map(capacity).sum();
                if horizon > total {
                    return invalid(format!("horizon {horizon} exceeds the total capacity {total}"));
                }
                if all_fixed && matches!(arrival, Arrival::RoundRobin) && total != horizon {
                    return invalid(format!("per-context horizons sum to {total}, horizon is {horizon}"));
                }
            }
        }
        let mut max_size = vec![0usize; objectives.len()];
        for (q, c) in contexts.iter().enumerate() {
            let m = &mut max_size[c.objective];
            *m = (*m).max(capacity(q).min(horizon));
        }
        let baselines = objectives
            .iter()
            .zip(&max_size)
            .enumerate()
            .map(|(i, (o, &k))| baseline_table(i, o.total(), k, baseline_mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ground,
            objectives: objectives.into_iter().map(Arc::new).collect(),
            contexts,
            arrival,
            noise,
            horizon,
            baseline_mode,
            baselines,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn objectives(&self) -> &[Arc<ContextObjective>] {
        &self.objectives
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn objective_of(&self, context: usize) -> &ContextObjective {
        &self.objectives[self.contexts[context].objective]
    }

    pub fn arrival(&self) -> &Arrival {
        &self.arrival
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    /// Same scenario with a different noise model; baselines are kept.
    pub fn with_noise(mut self, noise: Noise) -> Result<Self> {
        if let Noise::Gaussian { sigma } = noise {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(BanditError::InvalidScenario(format!("noise sigma must be >= 0, got {sigma}")));
            }
        }
        self.noise = noise;
        Ok(self)
    }

    /// Total number of rounds `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn baseline_mode(&self) -> BaselineMode {
        self.baseline_mode
    }

    pub fn is_bp(&self) -> bool {
        self.objectives.iter().all(|o| o.as_bp().is_some())
    }

    /// Whether every objective defines the multiplier for `kind`.
    pub fn supports(&self, kind: RegretKind) -> bool {
        self.objectives.iter().all(|o| o.alpha(kind).is_some())
    }

    /// `h(S*)` over sets of size `k` for an objective, and how it was found.
    pub fn baseline(&self, objective: usize, k: usize) -> Option<(f64, BaselineKind)> {
        self.baselines.get(objective)?.get(k).copied()
    }

    /// Comparator kind per objective at its largest size.
    pub fn baseline_kinds(&self) -> Vec<BaselineKind> {
        self.baselines
            .iter()
            .map(|row| {
                if row.iter().any(|(_, k)| *k == BaselineKind::GreedySurrogate) {
                    BaselineKind::GreedySurrogate
                } else {
                    BaselineKind::Exact
                }
            })
            .collect()
    }

    /// `sum_q alpha_q h_q(S*_{|S_q|}) - h_q(S_q)` over the given per-context sets.
    pub fn regret(&self, sets: &[Vec<usize>], kind: RegretKind) -> Result<f64> {
        if sets.len() != self.contexts.len() {
            return Err(BanditError::InvalidScenario(format!(
                "{} sets for {} contexts",
                sets.len(),
                self.contexts.len()
            )));
        }
        let mut total = 0.0;
        for (q, set) in sets.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let obj_id = self.contexts[q].objective;
            let obj = &self.objectives[obj_id];
            let alpha = obj.alpha(kind).ok_or_else(|| unavailable(kind, obj))?;
            let (opt, _) = self.baseline(obj_id, set.len()).ok_or_else(|| {
                BanditError::InvalidScenario(format!("context {q} holds {} items, beyond its horizon", set.len()))
            })?;
            total += alpha * opt - obj.total().value(set)?;
        }
        Ok(total)
    }
}

pub(crate) fn unavailable(kind: RegretKind, obj: &ContextObjective) -> BanditError {
    let reason = match kind {
        RegretKind::Ws => format!("objective {} has more than {ENUMERATION_CAP} items", obj.name),
        _ => format!("objective {} has no BP decomposition", obj.name),
    };
    BanditError::UnavailableRegret { kind: kind.name(), reason }
}

fn baseline_table(
    id: usize,
    h: &SetFunctionOracle,
    max_k: usize,
    mode: BaselineMode,
) -> Result<Vec<(f64, BaselineKind)>> {
    let n = h.n();
    let exact_ok = |k: usize| binomial(n, k) <= SEARCH_CAP;
    if mode == BaselineMode::Exact {
        if let Some(k) = (0..=max_k).find(|&k| !exact_ok(k)) {
            return Err(BanditError::InfeasibleBaseline { objective: id, k, count: binomial(n, k) });
        }
    }
    let needs_greedy = mode == BaselineMode::GreedySurrogate || (0..=max_k).any(|k| !exact_ok(k));
    let greedy_prefix = if needs_greedy {
        let order = greedy(h, max_k)?;
        let mut set = Vec::new();
        let mut values = vec![0.0];
        for v in order {
            set = insert_sorted(&set, v);
            values.push(h.value_sorted(&set));
        }
        values
    } else {
        Vec::new()
    };
    (0..=max_k)
        .map(|k| {
            if k == 0 {
                Ok((0.0, BaselineKind::Exact))
            } else if mode != BaselineMode::GreedySurrogate && exact_ok(k) {
                Ok((brute_force_opt(h, k)?.1, BaselineKind::Exact))
            } else {
                Ok((greedy_prefix[k], BaselineKind::GreedySurrogate))
            }
        })
        .collect()
}

/// `D = (1 - 1/T_q)^(T_q - s - 1)` for a pick made when the context holds `s` items.
pub fn distortion(horizon: usize, s: usize) -> f64 {
    let exponent = horizon.saturating_sub(s + 1);
    (1.0 - 1.0 / horizon as f64).powi(exponent as i32)
}

/// The learner's target in separate mode: `D y_f + y_g + (1 - D) l1(v)`, or
/// `D y_f + y_g` when `l1` is unknown.
pub fn distorted_signal(record: &FeedbackRecord, horizon: usize, l1: Option<f64>) -> Option<f64> {
    let d = distortion(horizon, record.set_size);
    let base = d * record.y_f? + record.y_g?;
    Some(match l1 {
        Some(l) => base + (1.0 - d) * l,
        None => base,
    })
}

/// One environment response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackRecord {
    pub context: usize,
    pub item: usize,
    /// Size of the context's set before the pick.
    pub set_size: usize,
    /// The scalar the mode reveals; in separate mode `y_f + y_g`.
    pub y: f64,
    pub y_f: Option<f64>,
    pub y_g: Option<f64>,
    /// Noise-free `h(v|S)`.
    pub true_gain: f64,
}

/// Mutable per-run state: selected sets and the arrival and noise streams.
#[derive(Debug, Clone)]
pub struct Environment<'a> {
    scenario: &'a Scenario,
    mode: FeedbackMode,
    // Selection order and a sorted copy per context.
    order: Vec<Vec<usize>>,
    sorted: Vec<Vec<usize>>,
    cursor: usize,
    trace_pos: usize,
    arrival_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
}

impl<'a> Environment<'a> {
    pub fn new(scenario: &'a Scenario, mode: FeedbackMode, seed: u64) -> Result<Self> {
        if mode != FeedbackMode::Monolithic {
            if let Some(q) = (0..scenario.contexts.len()).find(|&q| scenario.objective_of(q).as_bp().is_none()) {
                return Err(BanditError::MissingSeparateFeedback { context: q });
            }
        }
        let m = scenario.contexts.len();
        Ok(Self {
            scenario,
            mode,
            order: vec![Vec::new(); m],
            sorted: vec![Vec::new(); m],
            cursor: 0,
            trace_pos: 0,
            arrival_rng: stream(seed, STREAM_ARRIVAL),
            noise_rng: stream(seed, STREAM_NOISE),
        })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    fn capacity(&self, q: usize) -> usize {
        self.scenario.contexts[q].horizon.unwrap_or(self.scenario.ground.n())
    }

    fn has_room(&self, q: usize) -> bool {
        self.order[q].len() < self.capacity(q)
    }

    /// Draws the context for the next round.
    pub fn next_context(&mut self) -> Result<usize> {
        let m = self.scenario.contexts.len();
        match &self.scenario.arrival {
            Arrival::Trace { contexts } => {
                let q = *contexts.get(self.trace_pos).ok_or(BanditError::PoolExhausted { context: m })?;
                self.trace_pos += 1;
                Ok(q)
            }
            Arrival::RoundRobin => {
                for i in 0..m {
                    let q = (self.cursor + i) % m;
                    if self.has_room(q) {
                        self.cursor = q + 1;
                        return Ok(q);
                    }
                }
                Err(BanditError::PoolExhausted { context: self.cursor % m })
            }
            Arrival::IidUniform => {
                let open: Vec<usize> = (0..m).filter(|&q| self.has_room(q)).collect();
                if open.is_empty() {
                    return Err(BanditError::PoolExhausted { context: 0 });
                }
                Ok(open[self.arrival_rng.random_range(0..open.len())])
            }
        }
    }

    /// Items not yet selected for `context`, ascending.
    pub fn candidates(&self, context: usize) -> Vec<usize> {
        let set = &self.sorted[context];
        (0..self.scenario.ground.n()).filter(|v| set.binary_search(v).is_err()).collect()
    }

    /// Selection order for `context`.
    pub fn selected(&self, context: usize) -> &[usize] {
        &self.order[context]
    }

    pub fn selected_sorted(&self, context: usize) -> &[usize] {
        &self.sorted[context]
    }

    pub fn final_sets(&self) -> Vec<Vec<usize>> {
        self.order.clone()
    }

    /// Adds `item` to the context's set and returns the feedback. One standard
    /// normal is drawn per call regardless of the noise setting.
    pub fn step(&mut self, context: usize, item: usize) -> Result<FeedbackRecord> {
        let n = self.scenario.ground.n();
        if context >= self.scenario.contexts.len() {
            return Err(BanditError::InvalidScenario(format!("no context {context}")));
        }
        if item >= n {
            return Err(crate::objectives::ObjectiveError::OutOfRange { item, n }.into());
        }
        if !self.has_room(context) {
            return Err(BanditError::PoolExhausted { context });
        }
        let set = &self.sorted[context];
        if set.binary_search(&item).is_ok() {
            return Err(BanditError::AlreadySelected { context, item });
        }
        let obj = self.scenario.objective_of(context);
        let z: f64 = self.noise_rng.sample(StandardNormal);
        let eps = self.scenario.noise.sigma() * z;
        let true_gain = obj.total().gain_sorted(item, set);
        let (y, y_f, y_g) = match (self.mode, obj.as_bp()) {
            (FeedbackMode::Monolithic, _) => (true_gain + eps, None, None),
            (FeedbackMode::Separate, Some(bp)) => {
                let yf = bp.submodular_part().gain_sorted(item, set) + eps / 2.0;
                let yg = bp.supermodular_part().gain_sorted(item, set) + eps / 2.0;
                (yf + yg, Some(yf), Some(yg))
            }
            (FeedbackMode::SubmodularOnly, Some(bp)) => {
                (bp.submodular_part().gain_sorted(item, set) + eps, None, None)
            }
            (_, None) => return Err(BanditError::MissingSeparateFeedback { context }),
        };
        let record = FeedbackRecord { context, item, set_size: set.len(), y, y_f, y_g, true_gain };
        self.sorted[context] = insert_sorted(set, item);
        self.order[context].push(item);
        Ok(record)
    }
}
