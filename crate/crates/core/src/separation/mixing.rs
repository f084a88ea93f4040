use rand::Rng;

use crate::error::{invalid, mismatch, Result};
use crate::linalg::{has_full_rank, CMatrix, CVector, C64};

use super::Spectrogram;

/// Per-pair gain (dB) and integer delay (samples) from source `k` to channel `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixSpec {
    m: usize,
    k: usize,
    gains_db: Vec<f64>,
    delays: Vec<u32>,
}

/// Minimum `σ_min / σ_max` accepted for generated mixing matrices.
pub const MIX_RANK_TOL: f64 = 1e-6;

impl MixSpec {
    /// Row-major `M × K` gains and delays.
    pub fn new(m: usize, k: usize, gains_db: Vec<f64>, delays: Vec<u32>) -> Result<MixSpec> {
        if m == 0 || k == 0 {
            return Err(invalid("M and K must be at least 1"));
        }
        if gains_db.len() != m * k || delays.len() != m * k {
            return Err(mismatch("gains and delays must have M*K entries"));
        }
        if gains_db.iter().any(|g| !g.is_finite()) {
            return Err(invalid("gains must be finite"));
        }
        Ok(MixSpec {
            m,
            k,
            gains_db,
            delays,
        })
    }

    /// Gains uniform in [−5, 5] dB, delays uniform in {0, …, 50}; redrawn until
    /// every `min(M, K)`-column submatrix of every `A_f` is well conditioned.
    pub fn random<R: Rng + ?Sized>(m: usize, k: usize, bins: usize, rng: &mut R) -> Result<MixSpec> {
        loop {
            let gains = (0..m * k).map(|_| rng.random_range(-5.0..=5.0)).collect();
            let delays = (0..m * k).map(|_| rng.random_range(0..=50)).collect();
            let spec = MixSpec::new(m, k, gains, delays)?;
            if spec.is_well_conditioned(bins) {
                return Ok(spec);
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gain_db(&self, m: usize, k: usize) -> f64 {
        self.gains_db[m * self.k + k]
    }

    pub fn delay(&self, m: usize, k: usize) -> u32 {
        self.delays[m * self.k + k]
    }

    /// Whether all column subsets of size `min(M, K)` stay full rank at every bin.
    pub fn is_well_conditioned(&self, bins: usize) -> bool {
        let r = self.m.min(self.k);
        let subsets = combinations(self.k, r);
        (0..bins).all(|f| {
            let a = mixing_matrix(self, f, bins).expect("f < bins");
            subsets.iter().all(|cols| {
                let sub = a.select_columns(cols.iter());
                has_full_rank(&sub, MIX_RANK_TOL)
            })
        })
    }
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// `A_f(m, k) = 10^{g(m,k)/20} · exp(j τ(m,k) f / F)`.
pub fn mixing_matrix(mix: &MixSpec, f: usize, bins: usize) -> Result<CMatrix> {
    if f >= bins {
        return Err(invalid(format!("bin {f} out of range 0..{bins}")));
    }
    Ok(CMatrix::from_fn(mix.m, mix.k, |m, k| {
        let amp = 10f64.powf(mix.gain_db(m, k) / 20.0);
        C64::from_polar(amp, mix.delay(m, k) as f64 * f as f64 / bins as f64)
    }))
}

/// Applies `y = A_f s` in every bin.
pub fn mix_stft(sources: &[Spectrogram], mix: &MixSpec) -> Result<Vec<Spectrogram>> {
    if sources.len() != mix.k {
        return Err(mismatch(format!(
            "{} sources for a {}-source mix",
            sources.len(),
            mix.k
        )));
    }
    let (bins, frames) = sources[0].shape();
    if sources.iter().any(|s| s.shape() != (bins, frames)) {
        return Err(mismatch("source spectrograms differ in shape"));
    }
    let mut out = vec![Spectrogram::zeros(bins, frames); mix.m];
    for f in 0..bins {
        let a = mixing_matrix(mix, f, bins)?;
        for t in 0..frames {
            let s = CVector::from_iterator(mix.k, sources.iter().map(|src| src.get(f, t)));
            let y = &a * s;
            for (ch, spec) in out.iter_mut().enumerate() {
                spec.set(f, t, y[ch]);
            }
        }
    }
    Ok(out)
}
