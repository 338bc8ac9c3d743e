//! CSV emission. Every file gets a `<name>.meta.json` sidecar holding the
//! config hash and crate version; nothing time-dependent is written, so equal
//! configs and seeds give byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bandit::{AggregateRow, RegretKind, RegretTrace, Scenario};
use crate::offline::BoundRow;
use crate::{Error, Result};

pub const ROUND_HEADER: [&str; 12] = [
    "t",
    "u_t",
    "v_t",
    "y",
    "beta",
    "G_size",
    "cum_regret_bp",
    "cum_regret_bp2",
    "cum_reward",
    "cum_regret_bp3",
    "cum_regret_ws",
    "baseline_kind",
];

pub const AGGREGATE_HEADER: [&str; 8] = [
    "t",
    "mean_cum_regret",
    "std_cum_regret",
    "algorithm",
    "seed_count",
    "mean_cum_reward",
    "std_cum_reward",
    "regret_kind",
];

pub const OFFLINE_HEADER: [&str; 8] = ["instance_id", "alpha", "h_opt", "h_alg", "slack_sum", "margin", "violated", "which"];

pub const DEFF_HEADER: [&str; 5] = ["bandwidth", "T", "lambda", "d_eff", "info_gain"];

/// Formats a float for CSV; `NaN` becomes an empty field.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

/// Hex SHA-256 of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct Meta<'a> {
    file: &'a str,
    command: &'a str,
    config_sha256: &'a str,
    version: &'a str,
    seeds: &'a [u64],
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

/// Sidecar path for `csv_path`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv_path.with_file_name(name)
}

pub fn write_meta(csv_path: &Path, command: &str, hash: &str, seeds: &[u64]) -> Result<()> {
    let file = csv_path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    let meta = Meta { file, command, config_sha256: hash, version: env!("CARGO_PKG_VERSION"), seeds };
    let path = meta_path(csv_path);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// Per-round trace of one run. `baseline_kind` names how the comparator for
/// the round's context at its current set size was obtained.
pub fn write_rounds(path: &Path, trace: &RegretTrace, scenario: &Scenario) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(ROUND_HEADER)?;
    let mut sizes = vec![0usize; scenario.contexts().len()];
    for r in &trace.rows {
        sizes[r.context] += 1;
        let objective = scenario.contexts()[r.context].objective;
        let kind = scenario.baseline(objective, sizes[r.context]).map_or("", |(_, k)| k.name());
        w.write_record([
            r.t.to_string(),
            r.context.to_string(),
            r.item.to_string(),
            fmt_f64(r.y),
            fmt_f64(r.beta),
            r.g_size.to_string(),
            fmt_f64(r.regret(RegretKind::Bp)),
            fmt_f64(r.regret(RegretKind::Bp2)),
            fmt_f64(r.cum_reward),
            fmt_f64(r.regret(RegretKind::Bp3)),
            fmt_f64(r.regret(RegretKind::Ws)),
            kind.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            fmt_f64(r.mean_cum_regret),
            fmt_f64(r.std_cum_regret),
            r.algorithm.to_string(),
            r.seed_count.to_string(),
            fmt_f64(r.mean_cum_reward),
            fmt_f64(r.std_cum_reward),
            r.regret_kind.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_offline(path: &Path, rows: &[BoundRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(OFFLINE_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance_id.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.h_opt),
            fmt_f64(r.h_alg),
            fmt_f64(r.slack_sum),
            fmt_f64(r.margin),
            r.violated.to_string(),
            r.which.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

/// Long-form `objective,quantity,value` rows.
pub fn write_long(path: &Path, rows: &[(String, String, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["objective", "quantity", "value"])?;
    for (obj, q, v) in rows {
        w.write_record([obj.as_str(), q.as_str(), fmt_f64(*v).as_str()])?;
    }
    w.flush().map_err(io_err(path))
}

/// `(bandwidth, T, lambda, d_eff, info_gain)` rows.
pub fn write_deff(path: &Path, rows: &[(f64, usize, f64, f64, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DEFF_HEADER)?;
    for &(b, t, l, d, g) in rows {
        w.write_record([fmt_f64(b), t.to_string(), fmt_f64(l), fmt_f64(d), fmt_f64(g)])?;
    }
    w.flush().map_err(io_err(path))
}
