//! Seeded Monte-Carlo sweeps over `(M, K, SNR)` and their CSV reports.

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::time::Instant;

use phunmix::seed::derive_seed;
use phunmix::{generate_instance, is_exact, relative_error, solve, GenerationSpec, Instance, Snr, SolverKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepConfig;
use crate::error::{config, BenchError, Result};

/// CSV header, in field order.
pub const CSV_HEADER: [&str; 11] = [
    "m",
    "k",
    "snr_db",
    "solver",
    "trial_index",
    "relative_error",
    "residual",
    "exact",
    "iterations",
    "wall_time_ms",
    "seed",
];

/// One solver run on one trial instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub m: usize,
    pub k: usize,
    pub snr_db: Snr,
    pub solver: SolverKind,
    pub trial_index: usize,
    pub relative_error: f64,
    pub residual: f64,
    pub exact: bool,
    pub iterations: usize,
    pub wall_time_ms: f64,
    /// Seed of the trial instance, shared by every solver of the trial.
    pub seed: u64,
}

/// Seed of trial `trial` in cell `(m, k, snr)`.
pub fn trial_seed(master_seed: u64, m: usize, k: usize, snr: Snr, trial: usize) -> u64 {
    derive_seed(master_seed, &[m as u64, k as u64, snr.db().to_bits(), trial as u64])
}

/// Regenerates the instance behind a trial seed.
pub fn trial_instance(m: usize, k: usize, snr: Snr, seed: u64) -> Result<Instance> {
    Ok(generate_instance(&GenerationSpec::new(m, k, snr, seed))?)
}

/// Runs every solver on every trial of every cell. The output is sorted by
/// `(M, K, SNR, solver position in the config, trial)` and does not depend
/// on the number of threads.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config(format!("cannot start {n} threads: {e}")))?
            .install(|| sweep_rows(cfg)),
        None => sweep_rows(cfg),
    }
}

fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<ReportRow>> {
    let mut tasks = Vec::with_capacity(cfg.grid.len() * cfg.snr_db_list.len() * cfg.trials);
    for &(m, k) in &cfg.grid {
        for &snr in &cfg.snr_db_list {
            tasks.extend((0..cfg.trials).map(|t| (m, k, snr, t)));
        }
    }
    let nested: Vec<Vec<(usize, ReportRow)>> = tasks
        .into_par_iter()
        .map(|(m, k, snr, trial)| run_trial(cfg, m, k, snr, trial))
        .collect::<Result<_>>()?;
    let mut rows: Vec<(usize, ReportRow)> = nested.into_iter().flatten().collect();
    rows.sort_by(|(ia, a), (ib, b)| {
        (a.m, a.k)
            .cmp(&(b.m, b.k))
            .then(a.snr_db.db().total_cmp(&b.snr_db.db()))
            .then(ia.cmp(ib))
            .then(a.trial_index.cmp(&b.trial_index))
    });
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

fn run_trial(cfg: &SweepConfig, m: usize, k: usize, snr: Snr, trial: usize) -> Result<Vec<(usize, ReportRow)>> {
    let seed = trial_seed(cfg.master_seed, m, k, snr, trial);
    let instance = trial_instance(m, k, snr, seed)?;
    let truth = instance
        .ground_truth()
        .ok_or_else(|| BenchError::Report("generated instance lacks a ground truth".into()))?;
    cfg.solvers
        .iter()
        .enumerate()
        .map(|(pos, &solver)| {
            let start = Instant::now();
            let result = solve(solver, &instance, &cfg.solve, seed)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let row = ReportRow {
                m,
                k,
                snr_db: snr,
                solver,
                trial_index: trial,
                relative_error: relative_error(&result.estimate, truth)?,
                residual: result.residual,
                exact: is_exact(&result.estimate, truth)?,
                iterations: result.iterations,
                wall_time_ms: if cfg.timing { elapsed } else { 0.0 },
                seed,
            };
            Ok((pos, row))
        })
        .collect()
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes rows as CSV with a header; floats carry 17 significant digits.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.k.to_string(),
            r.snr_db.to_string(),
            r.solver.to_string(),
            r.trial_index.to_string(),
            float(r.relative_error),
            float(r.residual),
            r.exact.to_string(),
            r.iterations.to_string(),
            float(r.wall_time_ms),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::io("<csv output>", e))?;
    Ok(())
}

/// Parses CSV written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_reader(input);
    if reader.headers()?.iter().ne(CSV_HEADER) {
        return Err(BenchError::Report("unexpected CSV header".into()));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let field = |j: usize| rec.get(j).unwrap_or("");
            let bad = |j: usize| BenchError::Report(format!("row {}: bad `{}` value `{}`", i + 1, CSV_HEADER[j], field(j)));
            macro_rules! parse {
                ($j:expr) => {
                    field($j).parse().map_err(|_| bad($j))?
                };
            }
            Ok(ReportRow {
                m: parse!(0),
                k: parse!(1),
                snr_db: parse!(2),
                solver: parse!(3),
                trial_index: parse!(4),
                relative_error: parse!(5),
                residual: parse!(6),
                exact: parse!(7),
                iterations: parse!(8),
                wall_time_ms: parse!(9),
                seed: parse!(10),
            })
        })
        .collect()
}

/// Aggregate of one `(M, K, SNR, solver)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub m: usize,
    pub k: usize,
    /// SNR in dB, or `"noiseless"`.
    pub snr_db: String,
    pub solver: String,
    pub trials: usize,
    pub mean_relative_error: f64,
    pub median_relative_error: f64,
    pub exact_fraction: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_ms: f64,
}

/// Per-group statistics, in order of first appearance.
pub fn summarize(rows: &[ReportRow]) -> Result<Vec<Summary>> {
    if rows.is_empty() {
        return Err(BenchError::Report("cannot summarize an empty report".into()));
    }
    let mut groups: Vec<(&ReportRow, Vec<&ReportRow>)> = Vec::new();
    for row in rows {
        let same = |r: &ReportRow| (r.m, r.k, r.snr_db, r.solver) == (row.m, row.k, row.snr_db, row.solver);
        match groups.iter_mut().find(|(head, _)| same(head)) {
            Some((_, members)) => members.push(row),
            None => groups.push((row, vec![row])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(head, members)| {
            let n = members.len() as f64;
            let errors: Vec<f64> = members.iter().map(|r| r.relative_error).collect();
            Summary {
                m: head.m,
                k: head.k,
                snr_db: head.snr_db.to_string(),
                solver: head.solver.to_string(),
                trials: members.len(),
                mean_relative_error: errors.iter().sum::<f64>() / n,
                median_relative_error: median(&errors),
                exact_fraction: members.iter().filter(|r| r.exact).count() as f64 / n,
                mean_iterations: members.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
                mean_wall_time_ms: members.iter().map(|r| r.wall_time_ms).sum::<f64>() / n,
            }
        })
        .collect())
}

/// Median with the midpoint convention for even lengths; NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx.partial_cmp(&0.0) == Some(Ordering::Greater)).then(|| sxy / sxx)
}
