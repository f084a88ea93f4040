//! Problem model: the mixture `y = A s0 + n` with known magnitudes `b = |s0|`,
//! random instance generation, error metrics and the least-squares baseline.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, PhunError, Result};
use crate::linalg::{c, has_full_rank, norm_sqr, CMatrix, CVector, C64};
use crate::seed::rng_from_seed;

/// Relative squared error below which a recovery counts as exact.
pub const EXACT_THRESHOLD: f64 = 1e-8;

/// Smallest/largest singular value ratio accepted as full rank.
pub const RANK_TOL: f64 = 1e-12;

/// Signal-to-noise ratio of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    Noiseless,
}

impl Snr {
    /// `+inf` dB maps to [`Snr::Noiseless`].
    pub fn from_db(db: f64) -> Snr {
        if db == f64::INFINITY {
            Snr::Noiseless
        } else {
            Snr::Db(db)
        }
    }

    /// dB value, `+inf` for the noiseless sentinel.
    pub fn db(self) -> f64 {
        match self {
            Snr::Db(db) => db,
            Snr::Noiseless => f64::INFINITY,
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Db(db) => write!(f, "{db}"),
            Snr::Noiseless => f.write_str("noiseless"),
        }
    }
}

impl FromStr for Snr {
    type Err = PhunError;

    fn from_str(s: &str) -> Result<Snr> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("noiseless") || s.eq_ignore_ascii_case("inf") {
            return Ok(Snr::Noiseless);
        }
        let db: f64 = s
            .parse()
            .map_err(|_| invalid(format!("cannot parse SNR `{s}`")))?;
        if db.is_nan() {
            return Err(invalid("SNR is NaN"));
        }
        Ok(Snr::from_db(db))
    }
}

/// One phase-unmixing problem.
///
/// Immutable once built; [`Instance::new`] checks every structural invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    mixing: CMatrix,
    observation: CVector,
    magnitudes: Vec<f64>,
    ground_truth: Option<CVector>,
    noise: Option<CVector>,
    noise_stddev: Option<f64>,
}

impl Instance {
    pub fn new(
        mixing: CMatrix,
        observation: CVector,
        magnitudes: Vec<f64>,
        ground_truth: Option<CVector>,
        noise: Option<CVector>,
        noise_stddev: Option<f64>,
    ) -> Result<Instance> {
        let (m, k) = mixing.shape();
        if m == 0 || k == 0 {
            return Err(invalid("mixing matrix must be non-empty"));
        }
        if observation.len() != m {
            return Err(mismatch(format!(
                "observation has length {}, mixing has {m} rows",
                observation.len()
            )));
        }
        if magnitudes.len() != k {
            return Err(mismatch(format!(
                "{} magnitudes for {k} sources",
                magnitudes.len()
            )));
        }
        if let Some(bad) = magnitudes.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(invalid(format!("magnitudes must be strictly positive, got {bad}")));
        }
        if !has_full_rank(&mixing, RANK_TOL) {
            return Err(invalid("mixing matrix is rank deficient"));
        }
        if let Some(s0) = &ground_truth {
            if s0.len() != k {
                return Err(mismatch("ground truth length differs from K"));
            }
            for (z, b) in s0.iter().zip(&magnitudes) {
                if (z.norm() - b).abs() > 1e-12 * b {
                    return Err(invalid("ground-truth magnitudes disagree with b"));
                }
            }
        }
        if let Some(n) = &noise {
            if n.len() != m {
                return Err(mismatch("noise length differs from M"));
            }
        }
        if let Some(sigma) = noise_stddev {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(invalid(format!("noise stddev must be nonnegative, got {sigma}")));
            }
        }
        if let (Some(s0), Some(n)) = (&ground_truth, &noise) {
            let defect = (&observation - &mixing * s0 - n).norm();
            if defect > 1e-10 * observation.norm() {
                return Err(invalid("observation is not A s0 + n"));
            }
        }
        Ok(Instance {
            mixing,
            observation,
            magnitudes,
            ground_truth,
            noise,
            noise_stddev,
        })
    }

    pub fn m(&self) -> usize {
        self.mixing.nrows()
    }

    pub fn k(&self) -> usize {
        self.mixing.ncols()
    }

    pub fn mixing(&self) -> &CMatrix {
        &self.mixing
    }

    pub fn observation(&self) -> &CVector {
        &self.observation
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn ground_truth(&self) -> Option<&CVector> {
        self.ground_truth.as_ref()
    }

    pub fn noise(&self) -> Option<&CVector> {
        self.noise.as_ref()
    }

    pub fn noise_stddev(&self) -> Option<f64> {
        self.noise_stddev
    }

    /// Whether `K <= M`.
    pub fn is_determined(&self) -> bool {
        self.k() <= self.m()
    }

    /// `‖A s − y‖²` for this instance.
    pub fn residual_of(&self, s: &CVector) -> Result<f64> {
        residual(&self.mixing, s, &self.observation)
    }

    /// Projects `s` onto the magnitude constraint `|s_k| = b_k`; zero entries
    /// get phase 0.
    pub fn project(&self, s: &CVector) -> CVector {
        CVector::from_iterator(
            s.len(),
            s.iter().zip(&self.magnitudes).map(|(z, &b)| {
                crate::linalg::unit_phase(*z).map_or(c(b, 0.0), |u| u * b)
            }),
        )
    }

    /// Largest violation `| |s_k| − b_k | / b_k`.
    pub fn magnitude_violation(&self, s: &CVector) -> f64 {
        s.iter()
            .zip(&self.magnitudes)
            .map(|(z, b)| (z.norm() - b).abs() / b)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InstanceJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let raw: InstanceJson = serde_json::from_str(text)?;
        raw.into_instance()
    }
}

type Pair = [f64; 2];

/// Wire form: `a` is row-major, every complex number is an `[re, im]` pair.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceJson {
    m: usize,
    k: usize,
    a: Vec<Pair>,
    y: Vec<Pair>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s0: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_n: Option<f64>,
}

fn pairs<'a>(it: impl Iterator<Item = &'a C64>) -> Vec<Pair> {
    it.map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[Pair]) -> CVector {
    CVector::from_iterator(p.len(), p.iter().map(|[re, im]| c(*re, *im)))
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        let (m, k) = inst.mixing.shape();
        let a = (0..m)
            .flat_map(|r| (0..k).map(move |col| (r, col)))
            .map(|(r, col)| {
                let z = inst.mixing[(r, col)];
                [z.re, z.im]
            })
            .collect();
        InstanceJson {
            m,
            k,
            a,
            y: pairs(inst.observation.iter()),
            b: inst.magnitudes.clone(),
            s0: inst.ground_truth.as_ref().map(|v| pairs(v.iter())),
            n: inst.noise.as_ref().map(|v| pairs(v.iter())),
            sigma_n: inst.noise_stddev,
        }
    }
}

impl InstanceJson {
    fn into_instance(self) -> Result<Instance> {
        if self.a.len() != self.m * self.k {
            return Err(mismatch(format!(
                "`a` has {} entries, expected m*k = {}",
                self.a.len(),
                self.m * self.k
            )));
        }
        let entries: Vec<C64> = self.a.iter().map(|[re, im]| c(*re, *im)).collect();
        let mixing = CMatrix::from_row_slice(self.m, self.k, &entries);
        Instance::new(
            mixing,
            from_pairs(&self.y),
            self.b,
            self.s0.as_deref().map(from_pairs),
            self.n.as_deref().map(from_pairs),
            self.sigma_n,
        )
    }
}

/// Parameters of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationSpec {
    pub m: usize,
    pub k: usize,
    pub snr: Snr,
    /// Drawn uniformly from (0, 2] when absent.
    pub sigma_a: Option<f64>,
    /// Drawn uniformly from (0, 2] when absent.
    pub sigma_s: Option<f64>,
    pub seed: u64,
}

impl GenerationSpec {
    pub fn new(m: usize, k: usize, snr: Snr, seed: u64) -> GenerationSpec {
        GenerationSpec {
            m,
            k,
            snr,
            sigma_a: None,
            sigma_s: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(invalid("M and K must be at least 1"));
        }
        for (name, sigma) in [("sigma_a", self.sigma_a), ("sigma_s", self.sigma_s)] {
            if let Some(v) = sigma {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Snr::Db(db) = self.snr {
            if db.is_nan() || db == f64::NEG_INFINITY {
                return Err(invalid(format!("unusable SNR {db}")));
            }
        }
        Ok(())
    }
}

/// `‖A s − y‖²` as a sum of squared moduli.
pub fn residual(a: &CMatrix, s: &CVector, y: &CVector) -> Result<f64> {
    if a.ncols() != s.len() || a.nrows() != y.len() {
        return Err(mismatch(format!(
            "A is {}x{}, s has length {}, y has length {}",
            a.nrows(),
            a.ncols(),
            s.len(),
            y.len()
        )));
    }
    Ok(norm_sqr(&(a * s - y)))
}

/// `‖ŝ − s0‖² / ‖s0‖²`.
pub fn relative_error(s_hat: &CVector, s0: &CVector) -> Result<f64> {
    if s_hat.len() != s0.len() {
        return Err(mismatch("estimate and reference lengths differ"));
    }
    let denom = norm_sqr(s0);
    if denom <= 0.0 {
        return Err(invalid("reference vector has zero norm"));
    }
    Ok(norm_sqr(&(s_hat - s0)) / denom)
}

pub fn is_exact(s_hat: &CVector, s0: &CVector) -> Result<bool> {
    Ok(relative_error(s_hat, s0)? < EXACT_THRESHOLD)
}

/// Circular complex Gaussian samples with `E|z|² = sigma²`.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(
    sigma: f64,
    count: usize,
    rng: &mut R,
) -> Result<CVector> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    let scale = sigma / std::f64::consts::SQRT_2;
    Ok(CVector::from_iterator(
        count,
        (0..count).map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(scale * re, scale * im)
        }),
    ))
}

/// `σ_n` such that `‖A s0‖² / (M σ_n²)` equals the requested SNR.
pub fn noise_stddev_for(clean_energy: f64, m: usize, snr: Snr) -> f64 {
    match snr {
        Snr::Noiseless => 0.0,
        Snr::Db(db) => (clean_energy / (m as f64 * 10f64.powf(db / 10.0))).sqrt(),
    }
}

fn positive_uniform<R: Rng + ?Sized>(rng: &mut R, hi: f64) -> f64 {
    loop {
        let v = rng.random::<f64>() * hi;
        if v > 0.0 {
            return v;
        }
    }
}

/// Draws a random instance; the RNG is seeded from `spec.seed`.
pub fn generate_instance(spec: &GenerationSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let (m, k) = (spec.m, spec.k);
    let sigma_a = spec.sigma_a.unwrap_or_else(|| positive_uniform(&mut rng, 2.0));
    let sigma_s = spec.sigma_s.unwrap_or_else(|| positive_uniform(&mut rng, 2.0));

    let mixing = loop {
        let draw = sample_complex_gaussian(sigma_a, m * k, &mut rng)?;
        let a = CMatrix::from_row_slice(m, k, draw.as_slice());
        if has_full_rank(&a, RANK_TOL) {
            break a;
        }
    };

    let mut s0 = sample_complex_gaussian(sigma_s, k, &mut rng)?;
    for i in 0..k {
        while s0[i].norm() == 0.0 {
            s0[i] = sample_complex_gaussian(sigma_s, 1, &mut rng)?[0];
        }
    }
    let magnitudes: Vec<f64> = s0.iter().map(|z| z.norm()).collect();

    let clean = &mixing * &s0;
    let sigma_n = noise_stddev_for(norm_sqr(&clean), m, spec.snr);
    let noise = sample_complex_gaussian(sigma_n, m, &mut rng)?;
    let observation = &clean + &noise;

    Instance::new(
        mixing,
        observation,
        magnitudes,
        Some(s0),
        Some(noise),
        Some(sigma_n),
    )
}

/// Moore–Penrose solution `A† y`; defined only for `K <= M`.
pub fn least_squares(a: &CMatrix, y: &CVector) -> Result<CVector> {
    let (m, k) = a.shape();
    if y.len() != m {
        return Err(mismatch("observation length differs from M"));
    }
    if k > m {
        return Err(PhunError::UnsupportedRegime(format!(
            "least squares has infinitely many solutions for K = {k} > M = {m}"
        )));
    }
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    svd.solve(y, RANK_TOL * max_sv)
        .map_err(|e| invalid(format!("pseudo-inverse failed: {e}")))
}
