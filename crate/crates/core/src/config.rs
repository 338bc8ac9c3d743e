//! Experiment configuration documents.
//!
//! Every field has a default, so `{}` is a valid document: the default
//! scenario is the 3-template, 30-item session simulation.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit::{
    sessions_scenario, Algorithm, Arrival, BaselineMode, Context, ContextObjective, Noise, RegretKind, RunConfig,
    Scenario, SessionSpec,
};
use crate::kernels::KernelSpec;
use crate::nystrom::{BetaSchedule, NystromParams};
use crate::objectives::{Instance, InstanceSpec};
use crate::offline::SweepConfig;
use crate::ratings::{load_ratings_matrix, ratings_objectives};

/// One constraint violation, addressed by a dotted path into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed JSON, unknown fields or wrong types.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    /// Paths of the offending fields.
    pub fn paths(&self) -> Vec<&str> {
        match self {
            ConfigError::Parse { path, .. } => vec![path.as_str()],
            ConfigError::Invalid(errs) => errs.iter().map(|e| e.path.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    /// Generated session simulation.
    Sessions(SessionSpec),
    /// `contexts` contexts over generated instances.
    Instance(InstanceScenario),
    /// Per-group objectives from a ratings file.
    Ratings(RatingsScenario),
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::Sessions(SessionSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceScenario {
    pub instance: InstanceSpec,
    #[serde(default = "one")]
    pub contexts: usize,
    /// `T_q` per context; when absent contexts are bounded only by `n`.
    #[serde(default)]
    pub per_context_horizon: Option<Vec<usize>>,
    #[serde(default = "round_robin")]
    pub arrival: Arrival,
    #[serde(default = "two")]
    pub user_dim: usize,
    /// Use one objective for all contexts instead of one per context
    /// (context `q` regenerates the instance with seed `seed + q`).
    #[serde(default)]
    pub shared_objective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingsScenario {
    pub ratings_path: PathBuf,
    pub genres_path: PathBuf,
    /// `T_q` for every group.
    pub session_length: usize,
    #[serde(default = "round_robin")]
    pub arrival: Arrival,
    #[serde(default = "modular_scale")]
    pub modular_scale: f64,
    #[serde(default = "dominance")]
    pub dominance: f64,
}

/// Grid for the effective-dimension study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeffSweepConfig {
    pub bandwidths: Vec<f64>,
    pub horizons: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Input dimension of the uniformly drawn points.
    pub dim: usize,
    pub seed: u64,
}

impl Default for DeffSweepConfig {
    fn default() -> Self {
        Self {
            bandwidths: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            horizons: vec![50, 100, 200, 400],
            lambdas: vec![1.0],
            dim: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// `T`; derived from the scenario when absent.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub nystrom: NystromParams,
    #[serde(default)]
    pub beta: BetaSchedule,
    /// Absolute noise level; overrides the scenario's own setting.
    #[serde(default)]
    pub noise_sigma: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub baseline: BaselineMode,
    /// Regret reported in aggregate files; per-algorithm default when absent.
    #[serde(default)]
    pub regret_kind: Option<RegretKind>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub offline: SweepConfig,
    /// Instance for the `curvature` report; the scenario's objectives otherwise.
    #[serde(default)]
    pub curvature: Option<InstanceSpec>,
    #[serde(default)]
    pub deff_sweep: DeffSweepConfig,
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn round_robin() -> Arrival {
    Arrival::RoundRobin
}

fn modular_scale() -> f64 {
    0.3
}

fn dominance() -> f64 {
    1.2
}

fn default_kernel() -> KernelSpec {
    KernelSpec::composite([1.0, 1.0, 1.0], 0.5)
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::MnnUcb]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty document is valid")
    }
}

/// Parses and validates a JSON document.
pub fn parse_config(document: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Parse { path: if path == "." { "<root>".into() } else { path }, message: e.into_inner().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn run_config(&self) -> RunConfig {
        RunConfig { kernel: self.kernel.clone(), nystrom: self.nystrom, beta: self.beta.clone() }
    }

    /// Per-context horizons implied by the scenario, when fixed.
    fn context_horizons(&self) -> Option<Vec<usize>> {
        match &self.scenario {
            ScenarioConfig::Sessions(s) => Some(vec![s.session_length; s.templates * s.sessions_per_template]),
            ScenarioConfig::Instance(i) => i.per_context_horizon.clone(),
            ScenarioConfig::Ratings(_) => None,
        }
    }

    /// `T`, from the document or the per-context horizons.
    pub fn resolved_horizon(&self) -> Option<usize> {
        self.horizon.or_else(|| self.context_horizons().map(|h| h.iter().sum()))
    }

    /// Collects every constraint violation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut err = |path: &str, message: String| errs.push(FieldError { path: path.into(), message });

        if let Err(e) = self.kernel.validate() {
            err("kernel", e.to_string());
        }
        let p = &self.nystrom;
        if !(p.lambda > 0.0 && p.lambda.is_finite()) {
            err("nystrom.lambda", format!("must be > 0, got {}", p.lambda));
        }
        if !(p.eta >= 0.0 && p.eta.is_finite()) {
            err("nystrom.eta", format!("must be >= 0, got {}", p.eta));
        }
        if !(p.budget > 0.0) {
            err("nystrom.budget", format!("must be > 0, got {}", p.budget));
        }
        if let Err(e) = self.beta.validate() {
            err("beta", e.to_string());
        }
        if let Some(s) = self.noise_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                err("noise_sigma", format!("must be >= 0, got {s}"));
            }
        }
        if self.seeds.is_empty() {
            err("seeds", "at least one seed is required".into());
        }
        if self.algorithms.is_empty() {
            err("algorithms", "at least one algorithm is required".into());
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            err("algorithms", "duplicate entries".into());
        }
        if self.horizon == Some(0) {
            err("horizon", "must be >= 1".into());
        }

        match &self.scenario {
            ScenarioConfig::Sessions(s) => {
                if s.session_length == 0 || s.session_length > s.n {
                    err("scenario.session_length", format!("must be in 1..={}", s.n));
                }
                for (name, v) in [("n", s.n), ("templates", s.templates), ("sessions_per_template", s.sessions_per_template), ("latent_dim", s.latent_dim)] {
                    if v == 0 {
                        err(&format!("scenario.{name}"), "must be >= 1".into());
                    }
                }
                for (name, v) in [("relative_noise", s.relative_noise), ("dominance", s.dominance), ("modular_scale", s.modular_scale)] {
                    if !(v >= 0.0 && v.is_finite()) {
                        err(&format!("scenario.{name}"), format!("must be >= 0, got {v}"));
                    }
                }
                if let Some(t) = self.horizon {
                    if t != s.horizon() {
                        err("horizon", format!("sessions imply T = {}, got {t}", s.horizon()));
                    }
                }
            }
            ScenarioConfig::Instance(i) => {
                if i.contexts == 0 {
                    err("scenario.contexts", "must be >= 1".into());
                }
                if i.instance.n == 0 {
                    err("scenario.instance.n", "must be >= 1".into());
                }
                if i.user_dim == 0 {
                    err("scenario.user_dim", "must be >= 1".into());
                }
                if let Some(h) = &i.per_context_horizon {
                    if h.len() != i.contexts {
                        err("scenario.per_context_horizon", format!("has {} entries for {} contexts", h.len(), i.contexts));
                    }
                    if let Some(bad) = h.iter().find(|&&x| x == 0 || x > i.instance.n) {
                        err("scenario.per_context_horizon", format!("entry {bad} must be in 1..={}", i.instance.n));
                    }
                }
                self.check_arrival(&i.arrival, i.contexts, &mut err);
                if self.resolved_horizon().is_none() {
                    err("horizon", "required when per-context horizons are not given".into());
                }
            }
            ScenarioConfig::Ratings(r) => {
                if r.session_length == 0 {
                    err("scenario.session_length", "must be >= 1".into());
                }
                for (name, v) in [("modular_scale", r.modular_scale), ("dominance", r.dominance)] {
                    if !(v >= 0.0 && v.is_finite()) {
                        err(&format!("scenario.{name}"), format!("must be >= 0, got {v}"));
                    }
                }
                if !matches!(r.arrival, Arrival::RoundRobin) && self.horizon.is_none() {
                    err("horizon", "required unless arrival is round_robin".into());
                }
            }
        }

        let o = &self.offline;
        if o.n_min == 0 || o.n_min > o.n_max {
            err("offline.n_min", format!("need 1 <= n_min <= n_max, got {} and {}", o.n_min, o.n_max));
        }
        if o.k_max == 0 {
            err("offline.k_max", "must be >= 1".into());
        }
        if !(o.slack_scale >= 0.0) {
            err("offline.slack_scale", format!("must be >= 0, got {}", o.slack_scale));
        }
        let d = &self.deff_sweep;
        if d.bandwidths.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            err("deff_sweep.bandwidths", "entries must be > 0".into());
        }
        if d.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            err("deff_sweep.lambdas", "entries must be > 0".into());
        }
        if d.horizons.contains(&0) {
            err("deff_sweep.horizons", "entries must be >= 1".into());
        }
        if d.dim == 0 {
            err("deff_sweep.dim", "must be >= 1".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    fn check_arrival(&self, arrival: &Arrival, contexts: usize, err: &mut impl FnMut(&str, String)) {
        let horizons = self.context_horizons();
        let total = horizons.as_ref().map(|h| h.iter().sum::<usize>());
        match arrival {
            Arrival::Trace { contexts: trace } => {
                if let Some(bad) = trace.iter().find(|&&q| q >= contexts) {
                    err("scenario.arrival.contexts", format!("context {bad} does not exist"));
                }
                if let Some(t) = self.resolved_horizon() {
                    if trace.len() != t {
                        err("scenario.arrival.contexts", format!("trace has {} rounds, horizon is {t}", trace.len()));
                    }
                }
                if let (Some(h), Some(total)) = (&horizons, total) {
                    if total != trace.len() {
                        err("scenario.per_context_horizon", format!("sums to {total}, trace has {} rounds", trace.len()));
                    }
                    let mut counts = vec![0usize; contexts];
                    for &q in trace.iter().filter(|&&q| q < contexts) {
                        counts[q] += 1;
                    }
                    if counts.iter().zip(h).any(|(c, h)| c != h) {
                        err("scenario.arrival.contexts", "visit counts differ from per_context_horizon".into());
                    }
                }
            }
            Arrival::RoundRobin => {
                if let (Some(t), Some(total)) = (self.horizon, total) {
                    if t != total {
                        err("scenario.per_context_horizon", format!("sums to {total}, horizon is {t}"));
                    }
                }
            }
            Arrival::IidUniform => {}
        }
    }

    /// Builds the simulation scenario.
    pub fn build_scenario(&self) -> crate::Result<Scenario> {
        let scenario = match &self.scenario {
            ScenarioConfig::Sessions(s) => {
                let spec = SessionSpec { baseline: self.baseline, ..s.clone() };
                sessions_scenario(&spec)?
            }
            ScenarioConfig::Instance(i) => self.instance_scenario(i)?,
            ScenarioConfig::Ratings(r) => {
                let table = load_ratings_matrix(&r.ratings_path, &r.genres_path)?;
                let (ground, objectives) = ratings_objectives(&table, r.session_length, r.modular_scale, r.dominance)?;
                let m = objectives.len();
                let contexts = (0..m)
                    .map(|q| {
                        let mut phi = vec![0.0; m];
                        phi[q] = 1.0;
                        Context { features: Arc::from(phi), objective: q, horizon: Some(r.session_length) }
                    })
                    .collect();
                let horizon = self.horizon.unwrap_or(m * r.session_length);
                Scenario::new(ground, objectives, contexts, r.arrival.clone(), Noise::None, horizon, self.baseline)?
            }
        };
        Ok(match self.noise_sigma {
            Some(0.0) => scenario.with_noise(Noise::None)?,
            Some(sigma) => scenario.with_noise(Noise::Gaussian { sigma })?,
            None => scenario,
        })
    }

    fn instance_scenario(&self, i: &InstanceScenario) -> crate::Result<Scenario> {
        let generate = |q: usize| -> crate::Result<(Instance, ContextObjective)> {
            let spec = InstanceSpec { seed: i.instance.seed.wrapping_add(q as u64), ..i.instance.clone() };
            let inst = spec.generate()?;
            let name = format!("{}_{q}", spec.kind);
            let obj = match inst.as_bp() {
                Some(bp) => ContextObjective::bp(name, bp.clone())?,
                None => ContextObjective::single(name, inst.oracle().clone())?,
            };
            Ok((inst, obj))
        };
        let (first, first_obj) = generate(0)?;
        let mut objectives = vec![first_obj];
        if !i.shared_objective {
            for q in 1..i.contexts {
                objectives.push(generate(q)?.1);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(i.instance.seed ^ 0x5EED_C0DE);
        let contexts = (0..i.contexts)
            .map(|q| Context {
                features: (0..i.user_dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>().into(),
                objective: if i.shared_objective { 0 } else { q },
                horizon: i.per_context_horizon.as_ref().map(|h| h[q]),
            })
            .collect();
        let horizon = self.resolved_horizon().expect("validated");
        Ok(Scenario::new(first.ground().clone(), objectives, contexts, i.arrival.clone(), Noise::None, horizon, self.baseline)?)
    }
}
