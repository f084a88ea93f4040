use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::seed::{derive_seed, rng_from_seed};

/// Raised-cosine fade length at both ends, in seconds.
const FADE_S: f64 = 0.05;

/// Test signals: white Gaussian noise under a slow sinusoidal envelope
/// (2 to 6 Hz, gain between 0.5 and 1), faded in and out and scaled to a
/// peak of 0.5. The sources overlap everywhere in the time-frequency plane,
/// so every bin is a genuine `K`-source problem.
pub fn synthetic_sources(k: usize, len: usize, sample_rate: u32, seed: u64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| modulated_noise(len, sample_rate as f64, derive_seed(seed, &[j as u64])))
        .collect()
}

fn modulated_noise(len: usize, sr: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let rate = rng.random_range(2.0..6.0);
    let offset = rng.random_range(0.0..TAU);
    let fade = ((FADE_S * sr) as usize).min(len / 2).max(1);

    let mut out: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / sr;
            let envelope = 0.75 + 0.25 * (TAU * rate * t + offset).sin();
            let edge = n.min(len - 1 - n);
            let gain = if edge < fade {
                0.5 - 0.5 * (PI * (edge as f64 + 0.5) / fade as f64).cos()
            } else {
                1.0
            };
            let z: f64 = rng.sample(StandardNormal);
            gain * envelope * z
        })
        .collect();
    let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|x| *x *= 0.5 / peak);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_nonzero() {
        let a = synthetic_sources(3, 16_000, 16_000, 7);
        let b = synthetic_sources(3, 16_000, 16_000, 7);
        assert_eq!(a, b);
        for s in &a {
            assert_eq!(s.len(), 16_000);
            let peak = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!((peak - 0.5).abs() < 1e-12);
            assert!(s[0].abs() < 1e-2 && s[15_999].abs() < 1e-2);
        }
        assert_ne!(a[0], a[1]);
    }
}
