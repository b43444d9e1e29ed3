//! Report emission and aggregation. Rows go to CSV (stable column order,
//! shortest round-trip float formatting), aggregates to JSON keyed by
//! (ε, method) with provenance. Every byte is a pure function of the
//! config, so identical runs produce identical files, serial or parallel.

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::trial::{run_trial_with, Method, PredictorMode, TrialRow};

pub const ROWS_HEADER: &str =
    "seed,epsilon,method,feasible,scale,coverage,avg_width,mae,macro_mae,ma_acc";

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn format_row(row: &TrialRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.seed,
        row.epsilon,
        row.method,
        row.feasible,
        fmt_opt(row.scale),
        fmt_opt(row.coverage),
        fmt_opt(row.avg_width),
        fmt_opt(row.mae),
        fmt_opt(row.macro_mae),
        fmt_opt(row.ma_acc),
    )
}

/// Writes the rows CSV: header plus one line per row. `None` metrics render
/// as empty fields; floats use the shortest representation that parses back
/// to the same value.
///
/// # Errors
///
/// Propagates write failures.
pub fn write_rows<W: Write>(mut writer: W, rows: &[TrialRow]) -> std::io::Result<()> {
    writeln!(writer, "{ROWS_HEADER}")?;
    for row in rows {
        writeln!(writer, "{}", format_row(row))?;
    }
    Ok(())
}

/// Reads a rows CSV produced by [`write_rows`]. Lines starting with `#`
/// (failed-trial markers) are skipped.
///
/// # Errors
///
/// A wrong header or any malformed line, cited by 1-based line number.
pub fn read_rows<R: BufRead>(reader: R) -> Result<Vec<TrialRow>, HarnessError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != ROWS_HEADER {
                return Err(HarnessError::usage(format!(
                    "line {line_no}: expected header `{ROWS_HEADER}`, got `{trimmed}`"
                )));
            }
            saw_header = true;
            continue;
        }
        rows.push(parse_row(trimmed, line_no)?);
    }
    if !saw_header {
        return Err(HarnessError::usage("rows file has no header line"));
    }
    Ok(rows)
}

fn parse_row(line: &str, line_no: usize) -> Result<TrialRow, HarnessError> {
    let bad = |message: String| HarnessError::usage(format!("line {line_no}: {message}"));
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 10 {
        return Err(bad(format!("expected 10 fields, got {}", fields.len())));
    }
    fn scalar<T: std::str::FromStr>(
        field: &str,
        name: &str,
        line_no: usize,
    ) -> Result<T, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        field
            .parse()
            .map_err(|e| HarnessError::usage(format!("line {line_no}: bad {name} `{field}`: {e}")))
    }
    fn optional(field: &str, name: &str, line_no: usize) -> Result<Option<f64>, HarnessError> {
        if field.is_empty() {
            Ok(None)
        } else {
            scalar(field, name, line_no).map(Some)
        }
    }
    Ok(TrialRow {
        seed: scalar(fields[0], "seed", line_no)?,
        epsilon: scalar(fields[1], "epsilon", line_no)?,
        method: fields[2].parse().map_err(|e| bad(format!("{e}")))?,
        feasible: scalar(fields[3], "feasible", line_no)?,
        scale: optional(fields[4], "scale", line_no)?,
        coverage: optional(fields[5], "coverage", line_no)?,
        avg_width: optional(fields[6], "avg_width", line_no)?,
        mae: optional(fields[7], "mae", line_no)?,
        macro_mae: optional(fields[8], "macro_mae", line_no)?,
        ma_acc: optional(fields[9], "ma_acc", line_no)?,
    })
}

/// Mean and sample standard deviation (n − 1 denominator; 0 when n ≤ 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// `None` for an empty slice.
#[must_use]
pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() <= 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanStd { mean, std })
}

/// Summary of all rows sharing one (ε, method) cell. Metric statistics are
/// taken over feasible rows and are `None` when there were none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub epsilon: f64,
    pub method: String,
    pub n_rows: usize,
    pub n_feasible: usize,
    pub scale: Option<MeanStd>,
    pub coverage: Option<MeanStd>,
    pub avg_width: Option<MeanStd>,
    pub mae: Option<MeanStd>,
    pub macro_mae: Option<MeanStd>,
    pub ma_acc: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hash of the canonical config; absent when aggregates were recomputed
    /// from a bare rows file.
    pub config_hash: Option<String>,
    /// Sorted distinct seeds that contributed rows.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub provenance: Provenance,
    pub groups: Vec<GroupAggregate>,
}

/// Groups rows by (ε, method) — sorted by ε, then method name — and
/// summarizes each metric.
#[must_use]
pub fn aggregate(rows: &[TrialRow], config_hash: Option<String>) -> Aggregates {
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();

    let mut keys: Vec<(f64, Method)> = rows.iter().map(|r| (r.epsilon, r.method)).collect();
    keys.sort_by(|a, b| f64::total_cmp(&a.0, &b.0).then(a.1.name().cmp(b.1.name())));
    keys.dedup_by(|a, b| a.0.to_bits() == b.0.to_bits() && a.1 == b.1);

    let groups = keys
        .into_iter()
        .map(|(epsilon, method)| {
            let members: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.epsilon.to_bits() == epsilon.to_bits() && r.method == method)
                .collect();
            let n_feasible = members.iter().filter(|r| r.feasible).count();
            let stat = |pick: fn(&TrialRow) -> Option<f64>| {
                let values: Vec<f64> = members.iter().filter_map(|r| pick(r)).collect();
                mean_std(&values)
            };
            GroupAggregate {
                epsilon,
                method: method.name().to_string(),
                n_rows: members.len(),
                n_feasible,
                scale: stat(|r| r.scale),
                coverage: stat(|r| r.coverage),
                avg_width: stat(|r| r.avg_width),
                mae: stat(|r| r.mae),
                macro_mae: stat(|r| r.macro_mae),
                ma_acc: stat(|r| r.ma_acc),
            }
        })
        .collect();

    Aggregates {
        provenance: Provenance { config_hash, seeds },
        groups,
    }
}

/// Outcome of one suite: per-seed results in `seed_list` order.
pub type SuiteResults = Vec<(u64, Result<Vec<TrialRow>, HarnessError>)>;

/// Runs every configured seed, serially or on a bounded worker pool.
/// Results always come back in `seed_list` order, so downstream files do
/// not depend on scheduling.
///
/// # Errors
///
/// Only pool construction can fail here; per-trial failures are returned
/// inside the result list so one bad trial does not discard the others.
pub fn run_suite(
    config: &ExperimentConfig,
    mode: PredictorMode,
    workers: Option<usize>,
) -> Result<SuiteResults, HarnessError> {
    let one = |&seed: &u64| (seed, run_trial_with(config, seed, mode));
    match workers {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::usage(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(|| config.seed_list.par_iter().map(one).collect()))
        }
        _ => Ok(config.seed_list.iter().map(one).collect()),
    }
}

/// Writes `rows.csv` and `aggregates.json` under `out_dir`. Failed trials
/// leave a `# trial <seed> failed: <message>` marker in the CSV where their
/// rows would have been, and their seeds are excluded from aggregation.
/// Returns the first failure, if any, after flushing everything.
///
/// # Errors
///
/// Directory creation or file writes.
pub fn write_report(
    out_dir: &Path,
    config: &ExperimentConfig,
    results: &SuiteResults,
) -> Result<Option<(u64, String)>, HarnessError> {
    std::fs::create_dir_all(out_dir)?;

    let mut csv = String::new();
    csv.push_str(ROWS_HEADER);
    csv.push('\n');
    let mut ok_rows: Vec<TrialRow> = Vec::new();
    let mut first_failure = None;
    for (seed, outcome) in results {
        match outcome {
            Ok(rows) => {
                for row in rows {
                    csv.push_str(&format_row(row));
                    csv.push('\n');
                }
                ok_rows.extend(rows.iter().cloned());
            }
            Err(e) => {
                csv.push_str(&format!("# trial {seed} failed: {e}\n"));
                if first_failure.is_none() {
                    first_failure = Some((*seed, e.to_string()));
                }
            }
        }
    }
    std::fs::write(out_dir.join("rows.csv"), csv)?;

    let aggregates = aggregate(&ok_rows, Some(config.hash()));
    let json = serde_json::to_string_pretty(&aggregates)
        .map_err(|e| HarnessError::usage(format!("cannot serialize aggregates: {e}")))?;
    std::fs::write(out_dir.join("aggregates.json"), json + "\n")?;
    Ok(first_failure)
}
