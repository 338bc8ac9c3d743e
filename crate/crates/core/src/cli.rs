//! Subcommand orchestration shared by the `bpb` binary and the tests.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bandit::{aggregate, run_trials, Algorithm, BanditError, ContextObjective, RegretKind};
use crate::config::{parse_config, ExperimentConfig};
use crate::kernels::{effective_dimension, gram_sym, information_gain_bound, ContextPoint, KernelSpec, Operand};
use crate::objectives::{
    submodular_curvature, supermodular_curvature, verify_mnn_properties, PropertyKind, VERIFY_CAP,
};
use crate::offline::lemma_sweep;
use crate::output::{
    config_hash, io_err, write_aggregate, write_deff, write_long, write_meta, write_offline, write_rounds,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Offline,
    Curvature,
    DeffSweep,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Offline => "offline",
            Subcommand::Curvature => "curvature",
            Subcommand::DeffSweep => "deff-sweep",
        }
    }
}

/// Command-line values that replace fields of the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub algorithms: Option<Vec<Algorithm>>,
}

/// What a subcommand wrote, plus a one-paragraph summary for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Reads the document at `path` (defaults when `None`) and applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(io_err(p))?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seeds) = &overrides.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(algs) = &overrides.algorithms {
        cfg.algorithms = algs.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cmd: Subcommand, cfg: &ExperimentConfig) -> Result<Report> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let hash = config_hash(cfg)?;
    match cmd {
        Subcommand::Simulate => simulate(cfg, &hash),
        Subcommand::Offline => offline(cfg, &hash),
        Subcommand::Curvature => curvature(cfg, &hash),
        Subcommand::DeffSweep => deff_sweep(cfg, &hash),
    }
}

fn simulate(cfg: &ExperimentConfig, hash: &str) -> Result<Report> {
    let scenario = cfg.build_scenario()?;
    let results = run_trials(&scenario, &cfg.algorithms, &cfg.run_config(), &cfg.seeds)?;
    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    let mut all_rows = Vec::new();
    let mut summary = Vec::new();
    for &alg in &cfg.algorithms {
        let kind = cfg.regret_kind.unwrap_or_else(|| alg.default_regret(scenario.is_bp()));
        if !scenario.supports(kind) {
            return Err(BanditError::UnavailableRegret {
                kind: kind.name(),
                reason: "the scenario's objectives do not define it".into(),
            }
            .into());
        }
        let traces = results.get(alg);
        for trace in traces {
            let path = dir.join(format!("rounds_{}_seed{}.csv", alg.name(), trace.seed));
            write_rounds(&path, trace, &scenario)?;
            write_meta(&path, "simulate", hash, &[trace.seed])?;
            files.push(path);
        }
        let rows = aggregate(traces, kind);
        let path = dir.join(format!("aggregate_{}.csv", alg.name()));
        write_aggregate(&path, &rows)?;
        write_meta(&path, "simulate", hash, &cfg.seeds)?;
        files.push(path);
        let (mean, se) = results.final_regret(alg, kind);
        summary.push(format!("{}: final {} regret {mean:.4} (se {se:.4})", alg.name(), kind.name()));
        all_rows.extend(rows);
    }
    let path = dir.join("aggregate.csv");
    write_aggregate(&path, &all_rows)?;
    write_meta(&path, "simulate", hash, &cfg.seeds)?;
    files.push(path);
    Ok(Report { files, summary: summary.join("\n") })
}

fn offline(cfg: &ExperimentConfig, hash: &str) -> Result<Report> {
    let sweep = lemma_sweep(&cfg.offline)?;
    let path = cfg.output_dir.join("offline.csv");
    write_offline(&path, &sweep.rows)?;
    write_meta(&path, "offline", hash, &[cfg.offline.seed])?;
    let summary = format!(
        "{} bound: {} rows, {} violations, min margin {:.6}",
        cfg.offline.which.as_str(),
        sweep.rows.len(),
        sweep.violations,
        sweep.min_margin
    );
    Ok(Report { files: vec![path], summary })
}

/// `(quantity, value)` pairs for one objective.
pub fn curvature_rows(obj: &ContextObjective) -> Result<Vec<(String, f64)>> {
    let mut rows = vec![("n".to_string(), obj.n() as f64)];
    let c = &obj.constants;
    if let Some(curv) = &c.curvature {
        rows.push(("kappa_f".into(), curv.kappa_f));
        rows.push(("kappa_g".into(), curv.kappa_g));
    } else if obj.n() <= VERIFY_CAP {
        // A single function: report whichever curvature its shape defines.
        let h = obj.total();
        if verify_mnn_properties(h, PropertyKind::Submodular)?.passed {
            rows.push(("kappa_f".into(), submodular_curvature(h)?.kappa));
        }
        if verify_mnn_properties(h, PropertyKind::Supermodular)?.passed {
            rows.push(("kappa_g".into(), supermodular_curvature(h)?.kappa));
        }
    }
    if let Some(w) = &c.weak {
        rows.push(("gamma".into(), w.gamma));
        rows.push(("zeta".into(), w.zeta));
    }
    for kind in RegretKind::ALL {
        if let Some(a) = obj.alpha(kind) {
            rows.push((format!("alpha_{}", kind.name()), a));
        }
    }
    Ok(rows)
}

fn curvature(cfg: &ExperimentConfig, hash: &str) -> Result<Report> {
    let objectives: Vec<Arc<ContextObjective>> = match &cfg.curvature {
        Some(spec) => {
            let inst = spec.generate()?;
            let obj = match inst.as_bp() {
                Some(bp) => ContextObjective::bp(spec.kind.clone(), bp.clone())?,
                None => ContextObjective::single(spec.kind.clone(), inst.oracle().clone())?,
            };
            vec![Arc::new(obj)]
        }
        None => cfg.build_scenario()?.objectives().to_vec(),
    };
    let mut rows = Vec::new();
    for obj in &objectives {
        for (q, v) in curvature_rows(obj)? {
            rows.push((obj.name.clone(), q, v));
        }
    }
    let path = cfg.output_dir.join("curvature.csv");
    write_long(&path, &rows)?;
    write_meta(&path, "curvature", hash, &[])?;
    let summary = rows.iter().map(|(o, q, v)| format!("{o} {q} = {v}")).collect::<Vec<_>>().join("\n");
    Ok(Report { files: vec![path], summary })
}

/// `d_eff` and the information-gain bound of an item-RBF Gram matrix over
/// the first `T` of a fixed sequence of uniform points in `[0, 1]^dim`.
pub fn deff_grid(cfg: &crate::config::DeffSweepConfig) -> Result<Vec<(f64, usize, f64, f64, f64)>> {
    let t_max = cfg.horizons.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<ContextPoint> = (0..t_max)
        .map(|i| {
            let x: Vec<f64> = (0..cfg.dim).map(|_| rng.random::<f64>()).collect();
            ContextPoint::from_parts(Vec::new(), Vec::new(), i, x, vec![0.0; cfg.dim])
        })
        .collect();
    let mut rows = Vec::new();
    for &bandwidth in &cfg.bandwidths {
        let kernel = KernelSpec::Rbf { operand: Operand::Item, bandwidth };
        for &t in &cfg.horizons {
            let k = gram_sym(&kernel, &points[..t]);
            for &lambda in &cfg.lambdas {
                rows.push((bandwidth, t, lambda, effective_dimension(&k, lambda)?, information_gain_bound(&k, lambda)?));
            }
        }
    }
    Ok(rows)
}

fn deff_sweep(cfg: &ExperimentConfig, hash: &str) -> Result<Report> {
    let rows = deff_grid(&cfg.deff_sweep)?;
    let path = cfg.output_dir.join("deff_sweep.csv");
    write_deff(&path, &rows)?;
    write_meta(&path, "deff-sweep", hash, &[cfg.deff_sweep.seed])?;
    Ok(Report { files: vec![path], summary: format!("{} grid points", rows.len()) })
}
