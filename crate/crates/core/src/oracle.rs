//! Brute-force global optimizer on the phase torus, for small K.
//!
//! Every source phase is restricted to `G` equispaced values and all `G^K`
//! combinations are scored; the best grid local minima are then optionally
//! polished by coordinate descent. Used as ground truth in tests and acceptance runs.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{invalid, PhunError, Result};
use crate::instance::Instance;
use crate::linalg::{CVector, C64};
use crate::solvers::{phunalt, AltConfig, SolverResult};

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_phase: usize,
    pub polish: bool,
    /// Maximum number of residual evaluations.
    pub budget: u128,
    /// Common shift of every phase grid, in units of one grid step.
    pub offset: f64,
    pub polish_cfg: AltConfig,
    /// Number of grid local minima used as polishing starts.
    pub polish_starts: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_phase: 96,
            polish: true,
            budget: 10_000_000,
            offset: 0.0,
            polish_cfg: AltConfig {
                tol: 1e-12,
                max_iter: 10_000,
            },
            polish_starts: 8,
        }
    }
}

impl GridSpec {
    /// Number of residual evaluations for `k` sources.
    pub fn work(&self, k: usize) -> u128 {
        (self.points_per_phase as u128).saturating_pow(k as u32)
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.points_per_phase < 4 {
            return Err(invalid("grid needs at least 4 points per phase"));
        }
        let required = self.work(k);
        if required > self.budget {
            return Err(PhunError::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// Exhaustive search over the phase grid, then optional polishing.
///
/// Polishing starts from the `polish_starts` best grid points that are
/// local minima of the grid (no lower neighbour along any single phase),
/// so a narrow global basin is not lost to a wide shallow one.
pub fn grid_search(instance: &Instance, spec: &GridSpec) -> Result<SolverResult> {
    let (m, k) = (instance.m(), instance.k());
    spec.validate(k)?;
    let g = spec.points_per_phase;
    let a = instance.mixing();
    let y = instance.observation();
    let b = instance.magnitudes();
    let keep = spec.polish_starts.max(1);

    let phase = |idx: usize| C64::from_polar(1.0, TAU * (idx as f64 + spec.offset) / g as f64);
    // contributions[src][idx] = a_src · b_src · e^{iθ_idx}, laid out per channel
    let contributions: Vec<Vec<C64>> = (0..k)
        .map(|src| {
            (0..g)
                .flat_map(|idx| {
                    let z = phase(idx) * b[src];
                    (0..m).map(move |ch| a[(ch, src)] * z)
                })
                .collect()
        })
        .collect();

    let total = spec.work(k) as u64;
    let n_chunks = total.div_ceil(CHUNK);
    let candidates = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut digits = vec![0usize; k];
            let mut acc = vec![C64::from(0.0); m];
            let mut best: Vec<(f64, u64)> = Vec::with_capacity(keep + 1);
            let end = ((chunk + 1) * CHUNK).min(total);
            for flat in chunk * CHUNK..end {
                let mut rest = flat;
                for d in digits.iter_mut() {
                    *d = (rest % g as u64) as usize;
                    rest /= g as u64;
                }
                acc.iter_mut().zip(y.iter()).for_each(|(v, yv)| *v = -yv);
                for (src, &d) in digits.iter().enumerate() {
                    let col = &contributions[src][d * m..(d + 1) * m];
                    acc.iter_mut().zip(col).for_each(|(v, c)| *v += c);
                }
                let r: f64 = acc.iter().map(|v| v.norm_sqr()).sum();
                if best.len() == keep && (r, flat) >= best[keep - 1] {
                    continue;
                }
                let is_local_min = digits.iter().enumerate().all(|(src, &d)| {
                    let here = &contributions[src][d * m..(d + 1) * m];
                    [(d + 1) % g, (d + g - 1) % g].iter().all(|&nd| {
                        let there = &contributions[src][nd * m..(nd + 1) * m];
                        let rn: f64 = (0..m).map(|ch| (acc[ch] - here[ch] + there[ch]).norm_sqr()).sum();
                        rn >= r
                    })
                });
                if is_local_min {
                    insert_sorted(&mut best, (r, flat), keep);
                }
            }
            best
        })
        .reduce(Vec::new, |mut x, y| {
            for item in y {
                insert_sorted(&mut x, item, keep);
            }
            x
        });

    let point = |flat: u64| {
        let mut rest = flat;
        CVector::from_iterator(
            k,
            (0..k).map(|src| {
                let d = (rest % g as u64) as usize;
                rest /= g as u64;
                phase(d) * b[src]
            }),
        )
    };
    // The global grid minimum is always a local minimum, so this is non-empty.
    let grid_point = point(candidates[0].1);
    let grid_residual = instance.residual_of(&grid_point)?;

    let mut result = SolverResult {
        estimate: grid_point,
        residual: grid_residual,
        residual_history: vec![grid_residual],
        iterations: 0,
        converged: true,
        method: "oracle".into(),
        sdp_objective: None,
        lower_bound: None,
        degenerate: Vec::new(),
    };
    if spec.polish {
        let mut best: Option<SolverResult> = None;
        for &(_, flat) in &candidates {
            let polished = phunalt(instance, &point(flat), &spec.polish_cfg)?;
            if best.as_ref().is_none_or(|b| polished.residual < b.residual) {
                best = Some(polished);
            }
        }
        if let Some(polished) = best.filter(|p| p.residual <= grid_residual) {
            result.residual_history.push(polished.residual);
            result.estimate = polished.estimate;
            result.residual = polished.residual;
            result.iterations = polished.iterations;
            result.converged = polished.converged;
            result.degenerate = polished.degenerate;
        }
    }
    Ok(result)
}

fn insert_sorted(best: &mut Vec<(f64, u64)>, item: (f64, u64), keep: usize) {
    let pos = best.partition_point(|x| *x < item);
    if pos < keep {
        best.insert(pos, item);
        best.truncate(keep);
    }
}

/// Whether `candidate` matches the polished oracle up to
/// `max(1e-8, 1e-6 · oracle residual)`.
pub fn certify_global(instance: &Instance, candidate: &SolverResult, spec: &GridSpec) -> Result<bool> {
    let spec = GridSpec {
        polish: true,
        ..*spec
    };
    let oracle = grid_search(instance, &spec)?;
    let candidate_residual = instance.residual_of(&candidate.estimate)?;
    Ok(candidate_residual <= oracle.residual + f64::max(1e-8, 1e-6 * oracle.residual))
}
