//! Short-time Fourier analysis and least-squares overlap-add synthesis.
//!
//! Frames use a periodic Hann window. A real frame of length `N` has `N/2 + 1`
//! distinct bins, of which bin 0 (DC) and bin `N/2` (Nyquist) are real. Only
//! `F = N/2` bins are stored: the Nyquist value is packed into the imaginary
//! part of bin 0, so the spectrogram is complete and invertible.
//!
//! The signal is padded with `N − hop` zeros in front and enough zeros at the
//! end that every input sample is covered by a full set of overlapping
//! frames; `T = ceil(len / hop) + N/hop − 1`.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, mismatch, Result};
use crate::linalg::{C64, ZERO};

use super::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    PeriodicHann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub sample_rate: u32,
    pub window_len: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    /// 64 ms frames at 16 kHz with 50% overlap.
    fn default() -> Self {
        StftConfig {
            sample_rate: 16_000,
            window_len: 1024,
            hop: 512,
            window: WindowKind::PeriodicHann,
        }
    }
}

impl StftConfig {
    pub fn bins(&self) -> usize {
        self.window_len / 2
    }

    /// Frames produced for a signal of `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        len.div_ceil(self.hop) + self.window_len / self.hop - 1
    }

    fn front_pad(&self) -> usize {
        self.window_len - self.hop
    }

    pub fn window(&self) -> Vec<f64> {
        let n = self.window_len as f64;
        match self.window {
            WindowKind::PeriodicHann => (0..self.window_len)
                .map(|i| 0.5 - 0.5 * (TAU * i as f64 / n).cos())
                .collect(),
        }
    }

    /// Largest deviation of `Σ_t w(n − t·hop)` from its mean over one hop.
    pub fn cola_deviation(&self) -> f64 {
        let w = self.window();
        let sums: Vec<f64> = (0..self.hop)
            .map(|n| w.iter().skip(n).step_by(self.hop).sum())
            .collect();
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        sums.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len < 4 || !self.window_len.is_multiple_of(2) {
            return Err(invalid("window length must be even and at least 4"));
        }
        if self.hop == 0 || !self.window_len.is_multiple_of(self.hop) {
            return Err(invalid("hop must divide the window length"));
        }
        if self.cola_deviation() > 1e-10 {
            return Err(invalid("window does not overlap-add to a constant at this hop"));
        }
        Ok(())
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

pub fn stft(signal: &[f64], cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let n = cfg.window_len;
    if signal.len() < n {
        return Err(invalid(format!(
            "signal has {} samples, window needs {n}",
            signal.len()
        )));
    }
    let bins = cfg.bins();
    let frames = cfg.frames_for(signal.len());
    let pad = cfg.front_pad();
    let w = cfg.window();
    let fft = plans(n).forward;
    let mut out = Spectrogram::zeros(bins, frames);
    let mut buf = vec![ZERO; n];

    for t in 0..frames {
        for (i, slot) in buf.iter_mut().enumerate() {
            let p = t * cfg.hop + i;
            let x = p
                .checked_sub(pad)
                .and_then(|idx| signal.get(idx))
                .copied()
                .unwrap_or(0.0);
            *slot = C64::from(x * w[i]);
        }
        fft.process(&mut buf);
        out.set(0, t, C64::new(buf[0].re, buf[n / 2].re));
        for f in 1..bins {
            out.set(f, t, buf[f]);
        }
    }
    Ok(out)
}

/// Least-squares inverse: `x(n) = Σ_t w·frame_t / Σ_t w²`. Returns `T·hop`
/// samples aligned with the original signal; callers truncate to the
/// original length.
pub fn istft(spec: &Spectrogram, cfg: &StftConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.window_len;
    if spec.bins() != cfg.bins() {
        return Err(mismatch(format!(
            "spectrogram has {} bins, config expects {}",
            spec.bins(),
            cfg.bins()
        )));
    }
    let frames = spec.frames();
    let pad = cfg.front_pad();
    let total = (frames.max(1) - 1) * cfg.hop + n;
    let w = cfg.window();
    let ifft = plans(n).inverse;
    let mut acc = vec![0.0; total];
    let mut weight = vec![0.0; total];
    let mut buf = vec![ZERO; n];

    for t in 0..frames {
        let packed = spec.get(0, t);
        buf[0] = C64::from(packed.re);
        buf[n / 2] = C64::from(packed.im);
        for f in 1..spec.bins() {
            let z = spec.get(f, t);
            buf[f] = z;
            buf[n - f] = z.conj();
        }
        ifft.process(&mut buf);
        for i in 0..n {
            let p = t * cfg.hop + i;
            acc[p] += w[i] * buf[i].re / n as f64;
            weight[p] += w[i] * w[i];
        }
    }
    Ok((pad..pad + frames * cfg.hop)
        .map(|p| match weight.get(p) {
            Some(&wt) if wt > 1e-12 => acc[p] / wt,
            _ => 0.0,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    #[test]
    fn default_layout() {
        let cfg = StftConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.bins(), 512);
        assert_eq!(cfg.frames_for(16_000), 33);
        assert!(cfg.cola_deviation() < 1e-10);
        let bad = StftConfig { hop: 300, ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_signal() {
        let cfg = StftConfig::default();
        let s = stft(&vec![0.0; 4000], &cfg).unwrap();
        assert!(s.data().iter().all(|z| *z == ZERO));
        assert!(istft(&s, &cfg).unwrap().iter().all(|x| *x == 0.0));
        assert!(stft(&[0.0; 100], &cfg).is_err());
    }

    #[test]
    fn bin_centred_sinusoid_stays_in_main_lobe() {
        let cfg = StftConfig::default();
        let bin = 40;
        let x: Vec<f64> = (0..8192)
            .map(|i| (TAU * bin as f64 * i as f64 / cfg.window_len as f64).cos())
            .collect();
        let s = stft(&x, &cfg).unwrap();
        for t in 2..s.frames() - 2 {
            let total: f64 = (0..s.bins()).map(|f| s.get(f, t).norm_sqr()).sum();
            let centre = s.get(bin, t).norm_sqr();
            let lobe: f64 = (bin - 1..=bin + 1).map(|f| s.get(f, t).norm_sqr()).sum();
            // Hann spreads a centred tone over three bins with amplitudes 1/4, 1/2, 1/4.
            assert!((centre / total - 2.0 / 3.0).abs() < 1e-9);
            assert!(lobe >= 0.99 * total);
        }
    }

    #[test]
    fn white_noise_round_trip() {
        let cfg = StftConfig::default();
        let mut rng = rng_from_seed(5);
        let x: Vec<f64> = (0..16_000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y = istft(&stft(&x, &cfg).unwrap(), &cfg).unwrap();
        let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn inverse_is_linear() {
        let cfg = StftConfig { window_len: 64, hop: 32, ..StftConfig::default() };
        let mut rng = rng_from_seed(8);
        let mut a = Spectrogram::zeros(32, 10);
        let mut b = Spectrogram::zeros(32, 10);
        for f in 0..32 {
            for t in 0..10 {
                a.set(f, t, C64::new(rng.random(), rng.random()));
                b.set(f, t, C64::new(rng.random(), rng.random()));
            }
        }
        let mut sum = a.clone();
        sum.data_mut().iter_mut().zip(b.data()).for_each(|(x, y)| *x += y);
        let lhs = istft(&sum, &cfg).unwrap();
        let ra = istft(&a, &cfg).unwrap();
        let rb = istft(&b, &cfg).unwrap();
        for i in 0..lhs.len() {
            assert!((lhs[i] - ra[i] - rb[i]).abs() < 1e-12);
        }
    }
}
