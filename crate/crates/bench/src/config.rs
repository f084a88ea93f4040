//! Sweep configuration in a flat `key = value` format.
//!
//! ```text
//! # Fig. 1(a)-style determined sweep
//! grid = 2x2, 3x3, 4x4
//! snr_db = 60, noiseless
//! trials = 100
//! solvers = mwf, nmwf, phunlift, phunalt*5
//! master_seed = 7
//! ```
//!
//! Lists are comma separated and `#` starts a comment. Recognised keys:
//! `grid`, `snr_db`, `trials`, `solvers`, `master_seed`, `output`, `timing`,
//! `threads`, `alt_tol`, `alt_max_iter`, `bcd_tol`, `bcd_max_iter`, `bcd_nu`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phunmix::{SolveOptions, SolverKind, Snr};

use crate::error::{config, BenchError, Result};

/// Default trial count per grid cell.
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// `(M, K)` cells.
    pub grid: Vec<(usize, usize)>,
    pub snr_db_list: Vec<Snr>,
    pub trials: usize,
    pub solvers: Vec<SolverKind>,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    /// Record wall-clock times. Off by default so reports are reproducible
    /// byte for byte; `wall_time_ms` is then 0.
    pub timing: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub solve: SolveOptions,
}

impl SweepConfig {
    pub fn new(grid: Vec<(usize, usize)>, snr_db_list: Vec<Snr>, trials: usize, solvers: Vec<SolverKind>, master_seed: u64) -> SweepConfig {
        SweepConfig {
            grid,
            snr_db_list,
            trials,
            solvers,
            master_seed,
            output_path: None,
            timing: false,
            threads: None,
            solve: SolveOptions::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SweepConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// Checks everything that can be checked without running a trial.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.snr_db_list.is_empty() || self.solvers.is_empty() {
            return Err(config("grid, snr_db and solvers must be non-empty"));
        }
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        if let Some((m, k)) = self.grid.iter().find(|(m, k)| *m == 0 || *k == 0) {
            return Err(config(format!("grid cell {m}x{k} has a zero dimension")));
        }
        if self.threads == Some(0) {
            return Err(config("threads must be at least 1"));
        }
        for snr in &self.snr_db_list {
            if let Snr::Db(db) = snr {
                if !db.is_finite() {
                    return Err(config(format!("unusable SNR {db}")));
                }
            }
        }
        let noiseless = self.snr_db_list.contains(&Snr::Noiseless);
        if noiseless && self.solve.sigma_n.is_none() {
            if let Some(kind) = self.solvers.iter().find(|s| s.needs_sigma()) {
                return Err(config(format!("{kind} needs a noise level and cannot run on noiseless instances")));
            }
        }
        self.solve.alt.validate().map_err(|e| config(e.to_string()))?;
        self.solve.bcd.validate().map_err(|e| config(e.to_string()))?;
        Ok(())
    }
}

impl FromStr for SweepConfig {
    type Err = BenchError;

    fn from_str(text: &str) -> Result<SweepConfig> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }

        let mut take = |key: &str| entries.remove(key);
        let required = |v: Option<String>, key: &str| v.ok_or_else(|| config(format!("missing key `{key}`")));

        let grid = list(&required(take("grid"), "grid")?)
            .map(parse_cell)
            .collect::<Result<Vec<_>>>()?;
        let snr_db_list = list(&required(take("snr_db"), "snr_db")?)
            .map(|s| s.parse::<Snr>().map_err(|e| config(format!("snr_db: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let solvers = list(&required(take("solvers"), "solvers")?)
            .map(|s| s.parse::<SolverKind>().map_err(|e| config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let trials = take("trials").map(|v| number(&v, "trials")).transpose()?.unwrap_or(DEFAULT_TRIALS);
        let master_seed = take("master_seed").map(|v| number(&v, "master_seed")).transpose()?.unwrap_or(0);

        let mut cfg = SweepConfig::new(grid, snr_db_list, trials, solvers, master_seed);
        cfg.output_path = take("output").map(PathBuf::from);
        cfg.timing = take("timing").map(|v| flag(&v, "timing")).transpose()?.unwrap_or(false);
        cfg.threads = take("threads").map(|v| number(&v, "threads")).transpose()?;
        if let Some(v) = take("alt_tol") {
            cfg.solve.alt.tol = number(&v, "alt_tol")?;
        }
        if let Some(v) = take("alt_max_iter") {
            cfg.solve.alt.max_iter = number(&v, "alt_max_iter")?;
        }
        if let Some(v) = take("bcd_tol") {
            cfg.solve.bcd.tol = number(&v, "bcd_tol")?;
        }
        if let Some(v) = take("bcd_max_iter") {
            cfg.solve.bcd.max_iter = number(&v, "bcd_max_iter")?;
        }
        if let Some(v) = take("bcd_nu") {
            cfg.solve.bcd.nu = number(&v, "bcd_nu")?;
        }
        if let Some(key) = entries.keys().next() {
            return Err(config(format!("unknown key `{key}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_cell(cell: &str) -> Result<(usize, usize)> {
    let bad = || config(format!("grid cell `{cell}` is not of the form MxK"));
    let (m, k) = cell.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?))
}

fn number<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value.parse().map_err(|_| config(format!("{key}: cannot parse `{value}`")))
}

fn flag(value: &str, key: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(config(format!("{key}: expected true or false, got `{value}`"))),
    }
}
