//! Coordinate descent on the phase least-squares problem.
//!
//! Each step fixes all sources but one and moves that source to the global
//! minimizer of `‖A s − y‖²` on its circle `|s_i| = b_i`:
//!
//! ```text
//! r   = y − Σ_{k≠i} a_k s_k
//! s_i = b_i · (a_iᴴ r) / |a_iᴴ r|
//! ```

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{invalid, mismatch, Result};
use crate::instance::Instance;
use crate::linalg::{norm_sqr, unit_phase, CVector, C64};
use crate::seed::{derive_seed, rng_from_seed};

use super::{AltConfig, SolverResult};

/// Outcome of a single coordinate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateUpdate {
    pub value: C64,
    /// The inner product vanished; `value` is the unchanged coordinate.
    pub degenerate: bool,
}

/// `a_iᴴ (y − Σ_{k≠i} a_k s_k)` given the full residual `e = y − A s`.
fn deflated_correlation(instance: &Instance, e: &CVector, s: &CVector, i: usize) -> C64 {
    let col = instance.mixing().column(i);
    col.iter()
        .zip(e.iter())
        .map(|(a, e)| a.conj() * (e + a * s[i]))
        .sum()
}

fn update_from(b: f64, current: C64, corr: C64) -> CoordinateUpdate {
    match unit_phase(corr) {
        Some(u) => CoordinateUpdate {
            value: u * b,
            degenerate: false,
        },
        None => CoordinateUpdate {
            value: current,
            degenerate: true,
        },
    }
}

/// Exact minimizer of the residual over coordinate `i` on its circle.
pub fn phunalt_update(instance: &Instance, s: &CVector, i: usize) -> Result<CoordinateUpdate> {
    if s.len() != instance.k() {
        return Err(mismatch("estimate length differs from K"));
    }
    if i >= instance.k() {
        return Err(invalid(format!("coordinate {i} out of range")));
    }
    let e = instance.observation() - instance.mixing() * s;
    let corr = deflated_correlation(instance, &e, s, i);
    Ok(update_from(instance.magnitudes()[i], s[i], corr))
}

/// Runs sweeps `i = 0..K` until the relative residual decrease drops below
/// `cfg.tol`, the residual hits zero, or `cfg.max_iter` sweeps are done.
pub fn phunalt(instance: &Instance, init: &CVector, cfg: &AltConfig) -> Result<SolverResult> {
    cfg.validate()?;
    if init.len() != instance.k() {
        return Err(mismatch("initial estimate length differs from K"));
    }
    if instance.magnitude_violation(init) > 1e-10 {
        return Err(invalid("initial estimate violates |s_k| = b_k"));
    }
    let (a, y, b) = (instance.mixing(), instance.observation(), instance.magnitudes());
    let mut s = init.clone();
    let mut history = Vec::new();
    let mut degenerate = Vec::new();
    let mut previous = f64::INFINITY;
    let mut converged = false;

    while history.len() < cfg.max_iter {
        let mut e = y - a * &s;
        for i in 0..s.len() {
            let corr = deflated_correlation(instance, &e, &s, i);
            let up = update_from(b[i], s[i], corr);
            if up.degenerate {
                if !degenerate.contains(&i) {
                    degenerate.push(i);
                }
                continue;
            }
            let delta = s[i] - up.value;
            e.axpy(delta, &a.column(i), C64::from(1.0));
            s[i] = up.value;
        }
        let r = norm_sqr(&(y - a * &s));
        history.push(r);
        if r == 0.0 || (previous - r) / r < cfg.tol {
            converged = true;
            break;
        }
        previous = r;
    }

    let residual = *history.last().expect("at least one sweep");
    Ok(SolverResult {
        estimate: s,
        residual,
        iterations: history.len(),
        residual_history: history,
        converged,
        method: "phunalt".into(),
        sdp_objective: None,
        lower_bound: None,
        degenerate,
    })
}

/// `b_k e^{iθ_k}` with `θ_k` uniform on `[0, 2π)`.
pub fn random_phase_init<R: Rng + ?Sized>(b: &[f64], rng: &mut R) -> CVector {
    CVector::from_iterator(
        b.len(),
        b.iter()
            .map(|&bk| C64::from_polar(bk, rng.random::<f64>() * TAU)),
    )
}

/// Best of `n_starts` randomly initialized runs. Start `j` uses the seed
/// `derive_seed(seed, [j])`; ties go to the lowest start index.
pub fn multistart_phunalt(
    instance: &Instance,
    n_starts: usize,
    cfg: &AltConfig,
    seed: u64,
) -> Result<SolverResult> {
    if n_starts == 0 {
        return Err(invalid("n_starts must be at least 1"));
    }
    let mut best: Option<SolverResult> = None;
    for j in 0..n_starts {
        let mut rng = rng_from_seed(derive_seed(seed, &[j as u64]));
        let init = random_phase_init(instance.magnitudes(), &mut rng);
        let run = phunalt(instance, &init, cfg)?;
        if best.as_ref().is_none_or(|b| run.residual < b.residual) {
            best = Some(run);
        }
    }
    let mut best = best.expect("n_starts >= 1");
    best.method = format!("phunalt*{n_starts}");
    Ok(best)
}

/// Refines a first-stage estimate with PhUnAlt. The estimate is projected onto
/// the magnitude constraint first, so unconstrained outputs (MWF) are accepted.
pub fn chain(first: &SolverResult, instance: &Instance, cfg: &AltConfig) -> Result<SolverResult> {
    let init = instance.project(&first.estimate);
    let mut refined = phunalt(instance, &init, cfg)?;
    refined.method = format!("{}+", first.method);
    refined.sdp_objective = first.sdp_objective;
    refined.lower_bound = first.lower_bound;
    Ok(refined)
}
