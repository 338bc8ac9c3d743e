use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::runner::{run, RegretTrace, RunConfig};
use super::{Algorithm, BanditError, RegretKind, Result, Scenario};

/// Per-round mean and sample standard deviation across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub t: usize,
    pub mean_cum_regret: f64,
    pub std_cum_regret: f64,
    pub algorithm: &'static str,
    pub seed_count: usize,
    pub mean_cum_reward: f64,
    pub std_cum_reward: f64,
    pub regret_kind: &'static str,
}

/// Traces grouped by algorithm, each list ordered like the input seeds.
#[derive(Debug, Clone, Default)]
pub struct TrialResults {
    pub traces: BTreeMap<Algorithm, Vec<RegretTrace>>,
}

impl TrialResults {
    pub fn get(&self, algorithm: Algorithm) -> &[RegretTrace] {
        self.traces.get(&algorithm).map_or(&[], Vec::as_slice)
    }

    /// Mean final regret and its standard error across seeds.
    pub fn final_regret(&self, algorithm: Algorithm, kind: RegretKind) -> (f64, f64) {
        let xs: Vec<f64> = self.get(algorithm).iter().map(|t| t.final_regret(kind)).collect();
        let (mean, sd) = mean_std(&xs);
        (mean, sd / (xs.len().max(1) as f64).sqrt())
    }
}

/// Mean and sample standard deviation; the deviation is 0 for one value.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Runs every `(algorithm, seed)` pair in parallel on the current rayon pool.
pub fn run_trials(
    scenario: &Scenario,
    algorithms: &[Algorithm],
    cfg: &RunConfig,
    seeds: &[u64],
) -> Result<TrialResults> {
    if seeds.is_empty() {
        return Err(BanditError::NoSeeds);
    }
    let jobs: Vec<(Algorithm, u64)> =
        algorithms.iter().flat_map(|&a| seeds.iter().map(move |&s| (a, s))).collect();
    let traces = jobs
        .par_iter()
        .map(|&(a, s)| run(scenario, a, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let mut out = TrialResults::default();
    for trace in traces {
        out.traces.entry(trace.algorithm).or_default().push(trace);
    }
    Ok(out)
}

/// One row per round for one algorithm's traces.
pub fn aggregate(traces: &[RegretTrace], kind: RegretKind) -> Vec<AggregateRow> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let rounds = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    (0..rounds)
        .map(|i| {
            let regret: Vec<f64> = traces.iter().map(|t| t.rows[i].regret(kind)).collect();
            let reward: Vec<f64> = traces.iter().map(|t| t.rows[i].cum_reward).collect();
            let (mean_cum_regret, std_cum_regret) = mean_std(&regret);
            let (mean_cum_reward, std_cum_reward) = mean_std(&reward);
            AggregateRow {
                t: first.rows[i].t,
                mean_cum_regret,
                std_cum_regret,
                algorithm: first.algorithm.name(),
                seed_count: traces.len(),
                mean_cum_reward,
                std_cum_reward,
                regret_kind: kind.name(),
            }
        })
        .collect()
}
