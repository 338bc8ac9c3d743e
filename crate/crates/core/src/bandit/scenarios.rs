//! Session-style scenarios: a few user templates, each visited by many short
//! sessions that share the template's features and objective.

use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::{Arrival, BaselineMode, Context, ContextObjective, Noise, Scenario};
use super::{BanditError, Result};
use crate::objectives::{
    make_concave_over_modular, make_genre_square, median, BPObjective, CardinalityPower, GroundSet,
    Modular, SetFunctionOracle, WeightedSum,
};
use crate::offline::greedy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `m + f + scale_g g` with a concave-over-genres `f` and a genre-square `g`.
    Bp,
    /// `m + f + c |S|^p` with `p` in `[1.5, 2.5]`, treated as a single function.
    Ws,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionSpec {
    pub family: Family,
    pub n: usize,
    pub templates: usize,
    pub sessions_per_template: usize,
    /// `T_q` for every session.
    pub session_length: usize,
    pub latent_dim: usize,
    /// Noise standard deviation as a fraction of the mean singleton value.
    pub relative_noise: f64,
    /// Weight of the supermodular (or cardinality) term relative to `f` on
    /// greedy sets of session length.
    pub dominance: f64,
    pub modular_scale: f64,
    pub baseline: BaselineMode,
    pub seed: u64,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self {
            family: Family::Bp,
            n: 30,
            templates: 3,
            sessions_per_template: 25,
            session_length: 4,
            latent_dim: 3,
            relative_noise: 0.1,
            dominance: 1.2,
            modular_scale: 0.3,
            baseline: BaselineMode::Auto,
            seed: 0,
        }
    }
}

impl SessionSpec {
    pub fn horizon(&self) -> usize {
        self.templates * self.sessions_per_template * self.session_length
    }
}

/// Context order for `groups` rounds of sessions: each group opens one session
/// per template and interleaves them pick by pick.
pub fn grouped_trace(templates: usize, groups: usize, session_length: usize) -> Vec<usize> {
    let mut trace = Vec::with_capacity(templates * groups * session_length);
    for g in 0..groups {
        for _ in 0..session_length {
            trace.extend((0..templates).map(|q| g * templates + q));
        }
    }
    trace
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Builds the scenario. Items carry latent vectors; each template's ratings
/// are a logistic function of its affinity with them, and genres are the
/// strongly positive latent coordinates. Item features are the latent vector
/// followed by a constant 1, so the set embedding also carries `|S|`.
pub fn sessions_scenario(spec: &SessionSpec) -> Result<Scenario> {
    let invalid = |m: &str| Err(BanditError::InvalidScenario(m.into()));
    if spec.n == 0 || spec.templates == 0 || spec.sessions_per_template == 0 || spec.latent_dim == 0 {
        return invalid("sizes must be >= 1");
    }
    if spec.session_length == 0 || spec.session_length > spec.n {
        return invalid("session_length must be in 1..=n");
    }
    if !(spec.relative_noise >= 0.0) || !(spec.dominance >= 0.0) || !(spec.modular_scale >= 0.0) {
        return invalid("relative_noise, dominance and modular_scale must be >= 0");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d) = (spec.n, spec.latent_dim);
    let latent: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let genres: Vec<Vec<bool>> = latent
        .iter()
        .map(|z| {
            let mut row: Vec<bool> = z.iter().map(|&x| x > 0.25).collect();
            if !row.contains(&true) {
                let top = (0..d).max_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap_or(0);
                row[top] = true;
            }
            row
        })
        .collect();
    let features: Vec<Vec<f64>> = latent.iter().map(|z| z.iter().copied().chain([1.0]).collect()).collect();
    let ground = GroundSet::new(features)?;

    let mut objectives = Vec::with_capacity(spec.templates);
    let mut users = Vec::with_capacity(spec.templates);
    for q in 0..spec.templates {
        let phi = unit_vector(&mut rng, d);
        let ratings: Vec<f64> = latent
            .iter()
            .map(|z| 1.0 + 4.0 * sigmoid(3.0 * z.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>()))
            .collect();
        let tau = median(&ratings);
        let modular: Vec<f64> = ratings.iter().map(|r| spec.modular_scale * r / 5.0).collect();
        let f = make_concave_over_modular(&genres, &ratings, tau)?;
        let name = format!("template_{q}");
        let obj = match spec.family {
            Family::Bp => {
                let scaled: Vec<f64> = ratings.iter().map(|r| r / 5.0).collect();
                let g = make_genre_square(&genres, &scaled, tau / 5.0)?;
                let bp = BPObjective::balanced(modular, f, g, 1.0, spec.dominance, Some(spec.session_length))?;
                ContextObjective::bp(name, bp)?
            }
            Family::Ws => {
                let p = rng.random_range(1.5..2.5);
                let top = greedy(&f, spec.session_length)?;
                let mut top_sorted = top.clone();
                top_sorted.sort_unstable();
                let f_ref = f.value_sorted(&top_sorted);
                let c = spec.dominance * f_ref / (spec.session_length as f64).powf(p);
                let power = SetFunctionOracle::unmemoized(
                    "cardinality_power",
                    CardinalityPower { n, exponent: p, scale: 1.0 },
                );
                let m = SetFunctionOracle::unmemoized("modular", Modular::new(modular));
                let h = SetFunctionOracle::new("ws_session", WeightedSum::new(vec![(1.0, m), (1.0, f), (c, power)])?);
                ContextObjective::single(name, h)?
            }
        };
        objectives.push(obj);
        users.push(Arc::<[f64]>::from(phi));
    }

    let singleton_mean = objectives
        .iter()
        .map(|o| (0..n).map(|v| o.total().value_sorted(&[v])).sum::<f64>() / n as f64)
        .sum::<f64>()
        / spec.templates as f64;
    let noise = if spec.relative_noise > 0.0 {
        Noise::Gaussian { sigma: spec.relative_noise * singleton_mean }
    } else {
        Noise::None
    };

    let groups = spec.sessions_per_template;
    let contexts: Vec<Context> = (0..groups * spec.templates)
        .map(|c| Context {
            features: users[c % spec.templates].clone(),
            objective: c % spec.templates,
            horizon: Some(spec.session_length),
        })
        .collect();
    let trace = grouped_trace(spec.templates, groups, spec.session_length);
    Scenario::new(
        ground,
        objectives,
        contexts,
        Arrival::Trace { contexts: trace },
        noise,
        spec.horizon(),
        spec.baseline,
    )
}
