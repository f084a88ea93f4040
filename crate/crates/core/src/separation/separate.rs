use rayon::prelude::*;

use crate::error::{invalid, mismatch, Result};
use crate::instance::Instance;
use crate::linalg::{CMatrix, CVector, C64};
use crate::seed::{derive_seed, rng_from_seed};
use crate::solvers::{random_phase_init, solve, SolveOptions, SolverKind};

use super::{mixing_matrix, MixSpec, Spectrogram};

/// SDR reported when the estimate matches the reference to rounding.
pub const SDR_CAP_DB: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationConfig {
    /// Sources quieter than this (dB, relative to their own peak magnitude)
    /// in a bin are skipped and get a random phase.
    pub threshold_db: f64,
    pub solve: SolveOptions,
    /// Noise level handed to Wiener filters when `solve.sigma_n` is unset,
    /// relative to the per-channel RMS of the bin observation.
    pub wiener_rel_sigma: f64,
    pub seed: u64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            threshold_db: -40.0,
            solve: SolveOptions::default(),
            wiener_rel_sigma: 1e-6,
            seed: 0,
        }
    }
}

/// One reduced time-frequency sub-problem.
#[derive(Debug, Clone)]
pub struct BinProblem {
    pub f: usize,
    pub t: usize,
    /// Indices of the sources that take part in the solve.
    pub active: Vec<usize>,
    pub instance: Instance,
    /// Seed reserved for this bin.
    pub seed: u64,
}

fn check_shapes(mixture: &[Spectrogram], mix: &MixSpec, magnitudes: &[Spectrogram]) -> Result<(usize, usize)> {
    if mixture.len() != mix.m() || magnitudes.len() != mix.k() {
        return Err(mismatch(format!(
            "{} mixture channels and {} magnitude spectrograms for a {}x{} mix",
            mixture.len(),
            magnitudes.len(),
            mix.m(),
            mix.k()
        )));
    }
    let shape = mixture[0].shape();
    if mixture.iter().chain(magnitudes).any(|s| s.shape() != shape) {
        return Err(mismatch("spectrograms differ in shape"));
    }
    Ok(shape)
}

/// Per-bin separation with an arbitrary per-bin solver. `solver` returns an
/// estimate for the active sources; only its phases are kept.
pub fn separate_with<F>(
    mixture: &[Spectrogram],
    mix: &MixSpec,
    magnitudes: &[Spectrogram],
    cfg: &SeparationConfig,
    solver: F,
) -> Result<Vec<Spectrogram>>
where
    F: Fn(&BinProblem) -> Result<CVector> + Sync,
{
    let (bins, frames) = check_shapes(mixture, mix, magnitudes)?;
    let k = mix.k();
    let floor = 10f64.powf(cfg.threshold_db / 20.0);
    let thresholds: Vec<f64> = magnitudes
        .iter()
        .map(|s| floor * s.data().iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    let matrices: Vec<CMatrix> = (0..bins)
        .map(|f| mixing_matrix(mix, f, bins))
        .collect::<Result<_>>()?;

    let solved: Vec<Vec<C64>> = (0..bins * frames)
        .into_par_iter()
        .map(|idx| {
            let (f, t) = (idx / frames, idx % frames);
            let seed = derive_seed(cfg.seed, &[f as u64, t as u64]);
            let b: Vec<f64> = magnitudes.iter().map(|s| s.get(f, t).norm()).collect();
            let mut out = random_phase_init(&b, &mut rng_from_seed(seed)).as_slice().to_vec();
            let active: Vec<usize> = (0..k).filter(|&i| b[i] > 0.0 && b[i] >= thresholds[i]).collect();
            if active.is_empty() {
                return Ok(out);
            }
            let a = matrices[f].select_columns(active.iter());
            let y = CVector::from_iterator(mix.m(), mixture.iter().map(|s| s.get(f, t)));
            let sub_b: Vec<f64> = active.iter().map(|&i| b[i]).collect();
            let instance = Instance::new(a, y, sub_b, None, None, None)?;
            let problem = BinProblem {
                f,
                t,
                active,
                instance,
                seed,
            };
            let est = solver(&problem)?;
            if est.len() != problem.active.len() {
                return Err(mismatch("bin solver returned the wrong number of sources"));
            }
            let projected = problem.instance.project(&est);
            for (j, &src) in problem.active.iter().enumerate() {
                out[src] = projected[j];
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut outputs = vec![Spectrogram::zeros(bins, frames); k];
    for (idx, values) in solved.into_iter().enumerate() {
        let (f, t) = (idx / frames, idx % frames);
        for (src, v) in values.into_iter().enumerate() {
            outputs[src].set(f, t, v);
        }
    }
    Ok(outputs)
}

/// Per-bin separation with a named solver.
pub fn separate(
    mixture: &[Spectrogram],
    mix: &MixSpec,
    magnitudes: &[Spectrogram],
    kind: SolverKind,
    cfg: &SeparationConfig,
) -> Result<Vec<Spectrogram>> {
    separate_with(mixture, mix, magnitudes, cfg, |p| {
        let mut opts = cfg.solve;
        if kind.needs_sigma() && opts.sigma_n.is_none() {
            let m = p.instance.m() as f64;
            let rms = (p.instance.observation().norm() / m.sqrt()).max(f64::MIN_POSITIVE.sqrt());
            opts.sigma_n = Some(cfg.wiener_rel_sigma * rms);
        }
        Ok(solve(kind, &p.instance, &opts, p.seed)?.estimate)
    })
}

/// Plain energy ratio `10 log10(‖ref‖² / ‖ref − est‖²)`, capped at 100 dB.
pub fn sdr(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(mismatch("estimate and reference lengths differ"));
    }
    let signal: f64 = reference.iter().map(|x| x * x).sum();
    if signal <= 0.0 {
        return Err(invalid("reference signal is zero"));
    }
    let distortion: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(r, e)| (r - e) * (r - e))
        .sum();
    let cap = 10f64.powf(SDR_CAP_DB / 10.0);
    if distortion <= 0.0 || signal / distortion > cap {
        return Ok(SDR_CAP_DB);
    }
    Ok(10.0 * (signal / distortion).log10())
}
