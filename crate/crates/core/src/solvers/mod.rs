//! Solver families for phase least squares and the name-based dispatcher
//! used by the experiment driver.

mod alternating;
mod wiener;

use std::fmt;
use std::str::FromStr;

pub use alternating::{
    chain, multistart_phunalt, phunalt, phunalt_update, random_phase_init, CoordinateUpdate,
};
pub use wiener::{mwf, mwf_channel_form, mwf_source_form, nmwf};

use crate::error::{invalid, PhunError, Result};
use crate::instance::Instance;
use crate::lifting::{phunlift, BcdConfig};
use crate::linalg::CVector;
use crate::seed::{derive_seed, label_hash, rng_from_seed};

/// Output of any solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub estimate: CVector,
    /// `‖A ŝ − y‖²` of the returned estimate.
    pub residual: f64,
    /// Per-sweep objective for iterative solvers (empty for closed forms).
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub method: String,
    /// Final primal objective of the lifted relaxation, when one was solved.
    pub sdp_objective: Option<f64>,
    /// Certified lower bound on the phase least-squares optimum.
    pub lower_bound: Option<f64>,
    /// Coordinates whose phase was undetermined (zero inner product or zero
    /// coefficient).
    pub degenerate: Vec<usize>,
}

impl SolverResult {
    pub(crate) fn closed_form(
        method: &str,
        instance: &Instance,
        estimate: CVector,
        degenerate: Vec<usize>,
    ) -> Result<SolverResult> {
        Ok(SolverResult {
            residual: instance.residual_of(&estimate)?,
            estimate,
            residual_history: Vec::new(),
            iterations: 0,
            converged: true,
            method: method.to_string(),
            sdp_objective: None,
            lower_bound: None,
            degenerate,
        })
    }
}

/// Stopping rule for PhUnAlt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltConfig {
    /// Relative residual decrease below which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AltConfig {
    fn default() -> Self {
        AltConfig {
            tol: 1e-3,
            max_iter: 10_000,
        }
    }
}

impl AltConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Named solver, as used on the command line and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Mwf,
    Nmwf,
    NmwfPlus,
    PhunAlt,
    /// Best of `n` random starts; `phunalt*5` in reports.
    PhunAltMulti(usize),
    PhunLift,
    PhunLiftPlus,
    /// Random phases with the correct magnitudes.
    Rand,
}

impl SolverKind {
    /// Whether the solver needs a noise level.
    pub fn needs_sigma(self) -> bool {
        matches!(self, SolverKind::Mwf | SolverKind::Nmwf | SolverKind::NmwfPlus)
    }

    /// Whether outputs satisfy `|ŝ_k| = b_k`.
    pub fn is_magnitude_feasible(self) -> bool {
        !matches!(self, SolverKind::Mwf)
    }

    /// One of each solver, with five starts for the multi-start variant.
    pub fn all() -> Vec<SolverKind> {
        vec![
            SolverKind::Mwf,
            SolverKind::Nmwf,
            SolverKind::NmwfPlus,
            SolverKind::PhunAlt,
            SolverKind::PhunAltMulti(5),
            SolverKind::PhunLift,
            SolverKind::PhunLiftPlus,
            SolverKind::Rand,
        ]
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::Mwf => f.write_str("mwf"),
            SolverKind::Nmwf => f.write_str("nmwf"),
            SolverKind::NmwfPlus => f.write_str("nmwf+"),
            SolverKind::PhunAlt => f.write_str("phunalt"),
            SolverKind::PhunAltMulti(n) => write!(f, "phunalt*{n}"),
            SolverKind::PhunLift => f.write_str("phunlift"),
            SolverKind::PhunLiftPlus => f.write_str("phunlift+"),
            SolverKind::Rand => f.write_str("rand"),
        }
    }
}

impl FromStr for SolverKind {
    type Err = PhunError;

    fn from_str(s: &str) -> Result<SolverKind> {
        let name = s.trim().to_ascii_lowercase();
        let kind = match name.as_str() {
            "mwf" => SolverKind::Mwf,
            "nmwf" => SolverKind::Nmwf,
            "nmwf+" => SolverKind::NmwfPlus,
            "phunalt" => SolverKind::PhunAlt,
            "phunlift" => SolverKind::PhunLift,
            "phunlift+" => SolverKind::PhunLiftPlus,
            "rand" => SolverKind::Rand,
            other => match other.strip_prefix("phunalt*").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => SolverKind::PhunAltMulti(n),
                _ => return Err(PhunError::UnknownSolver(s.trim().to_string())),
            },
        };
        Ok(kind)
    }
}

/// Everything a named solver may need besides the instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Noise level for Wiener filtering; falls back to the instance's own.
    pub sigma_n: Option<f64>,
    pub alt: AltConfig,
    pub bcd: BcdConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            sigma_n: None,
            alt: AltConfig::default(),
            bcd: BcdConfig::default(),
        }
    }
}

/// Runs the named solver. Randomized solvers draw from
/// `derive_seed(seed, [label_hash(name)])`.
pub fn solve(
    kind: SolverKind,
    instance: &Instance,
    opts: &SolveOptions,
    seed: u64,
) -> Result<SolverResult> {
    let sigma = || -> Result<f64> {
        opts.sigma_n
            .or(instance.noise_stddev())
            .filter(|s| *s > 0.0)
            .ok_or_else(|| invalid(format!("{kind} needs a positive noise level")))
    };
    let solver_seed = derive_seed(seed, &[label_hash(&kind.to_string())]);
    let mut result = match kind {
        SolverKind::Mwf => mwf(instance, sigma()?)?,
        SolverKind::Nmwf => nmwf(instance, sigma()?)?,
        SolverKind::NmwfPlus => chain(&nmwf(instance, sigma()?)?, instance, &opts.alt)?,
        SolverKind::PhunAlt => {
            let init = random_phase_init(instance.magnitudes(), &mut rng_from_seed(solver_seed));
            phunalt(instance, &init, &opts.alt)?
        }
        SolverKind::PhunAltMulti(n) => multistart_phunalt(instance, n, &opts.alt, solver_seed)?,
        SolverKind::PhunLift => phunlift(instance, &opts.bcd)?,
        SolverKind::PhunLiftPlus => chain(&phunlift(instance, &opts.bcd)?, instance, &opts.alt)?,
        SolverKind::Rand => {
            let est = random_phase_init(instance.magnitudes(), &mut rng_from_seed(solver_seed));
            SolverResult::closed_form("rand", instance, est, Vec::new())?
        }
    };
    result.method = kind.to_string();
    Ok(result)
}
