//! Semidefinite relaxation of phase least squares, solved by block-coordinate
//! descent.
//!
//! With `x = [s; 1]` and `C = [A, −y]ᴴ [A, −y]` the residual is
//! `‖A s − y‖² = trace(C x xᴴ)`. Replacing `x xᴴ` by any Hermitian PSD `X`
//! with `diag(X) = [b²; 1]` gives a convex problem whose optimum lower-bounds
//! the residual of every feasible `s`. Rescaling by `D = diag(b, 1)` turns the
//! diagonal constraint into `diag(X) = 1`, where each column update has a
//! closed form and `X = I` is feasible.

use std::io::Write;

use crate::error::{invalid, mismatch, PhunError, Result};
use crate::instance::Instance;
use crate::linalg::{hermitian_eigenvalues, sigma_min, unit_phase, CMatrix, CVector, C64, ZERO};
use crate::solvers::SolverResult;

/// Objective floor at which BCD stops.
pub const OBJECTIVE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProblem {
    cost: CMatrix,
    diag_target: Vec<f64>,
    k: usize,
}

impl LiftedProblem {
    pub fn cost(&self) -> &CMatrix {
        &self.cost
    }

    pub fn diag_target(&self) -> &[f64] {
        &self.diag_target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_normalized(&self) -> bool {
        self.diag_target.iter().all(|&t| t == 1.0)
    }

    /// `trace(C X)`, real part.
    pub fn objective(&self, x: &CMatrix) -> f64 {
        trace_product(&self.cost, x)
    }

    /// Rescales to unit diagonal: cost `D C D` with `D = diag(√b̃)`.
    pub fn normalize(&self) -> LiftedProblem {
        let d: Vec<f64> = self.diag_target.iter().map(|t| t.sqrt()).collect();
        let n = d.len();
        let cost = CMatrix::from_fn(n, n, |i, j| self.cost[(i, j)] * (d[i] * d[j]));
        LiftedProblem {
            cost,
            diag_target: vec![1.0; n],
            k: self.k,
        }
    }
}

/// Real part of `trace(C X) = Σ_{jl} C_jl X_lj`.
pub fn trace_product(c: &CMatrix, x: &CMatrix) -> f64 {
    let n = c.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for l in 0..n {
            let (a, b) = (c[(j, l)], x[(l, j)]);
            acc += a.re * b.re - a.im * b.im;
        }
    }
    acc
}

/// Builds the lifted cost `C = [A, −y]ᴴ [A, −y]` and target `[b²; 1]`.
pub fn build_lifted(a: &CMatrix, y: &CVector, b: &[f64]) -> Result<LiftedProblem> {
    let (m, k) = a.shape();
    if y.len() != m || b.len() != k {
        return Err(mismatch(format!(
            "A is {m}x{k}, y has length {}, b has length {}",
            y.len(),
            b.len()
        )));
    }
    if let Some(bad) = b.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid(format!("magnitudes must be positive, got {bad}")));
    }
    let mut augmented = CMatrix::zeros(m, k + 1);
    augmented.columns_mut(0, k).copy_from(a);
    augmented.column_mut(k).copy_from(&(-y));
    let mut cost = augmented.adjoint() * &augmented;
    // exact Hermitian symmetry and a real diagonal
    for i in 0..=k {
        cost[(i, i)] = C64::from(cost[(i, i)].re);
        for j in 0..i {
            cost[(j, i)] = cost[(i, j)].conj();
        }
    }
    let mut diag_target: Vec<f64> = b.iter().map(|v| v * v).collect();
    diag_target.push(1.0);
    Ok(LiftedProblem {
        cost,
        diag_target,
        k,
    })
}

/// Block-coordinate descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdConfig {
    /// Barrier slack: column updates keep the Schur complement at `ν`.
    pub nu: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BcdConfig {
    fn default() -> Self {
        BcdConfig {
            nu: 0.0,
            tol: 1e-3,
            max_iter: 100_000,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.nu) {
            return Err(invalid(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// The PSD iterate together with its per-sweep objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedIterate {
    pub x: CMatrix,
    pub objective_history: Vec<f64>,
    pub converged: bool,
}

impl LiftedIterate {
    pub fn sweeps(&self) -> usize {
        self.objective_history.len()
    }

    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Smallest eigenvalue relative to the largest diagonal entry.
    pub fn psd_margin(&self) -> f64 {
        let ev = hermitian_eigenvalues(&self.x);
        let max_diag = (0..self.x.nrows())
            .map(|i| self.x[(i, i)].re)
            .fold(0.0, f64::max);
        ev[0] / max_diag
    }
}

/// Block-coordinate descent on a normalized lifted problem.
pub fn bcd_solve(problem: &LiftedProblem, cfg: &BcdConfig) -> Result<LiftedIterate> {
    bcd_solve_observed(problem, cfg, |_, _, _| {})
}

/// [`bcd_solve`] calling `observer(sweep, X, objective)` after every sweep.
pub fn bcd_solve_observed<F>(
    problem: &LiftedProblem,
    cfg: &BcdConfig,
    mut observer: F,
) -> Result<LiftedIterate>
where
    F: FnMut(usize, &CMatrix, f64),
{
    cfg.validate()?;
    if !problem.is_normalized() {
        return Err(invalid("bcd_solve needs a normalized problem (unit diagonal target)"));
    }
    let c = &problem.cost;
    let n = c.nrows();
    let mut x = CMatrix::identity(n, n);
    let mut z = vec![ZERO; n];
    let mut history = Vec::new();
    let mut previous = f64::INFINITY;
    let mut converged = false;
    let scale = (1.0 - cfg.nu).sqrt();

    while history.len() < cfg.max_iter {
        for i in 0..problem.k {
            // z = X_{ic,ic} C_{ic,i}, accumulated column by column
            z.iter_mut().for_each(|v| *v = ZERO);
            for l in (0..n).filter(|&l| l != i) {
                let w = c[(l, i)];
                for (zj, xjl) in z.iter_mut().zip(x.column(l).iter()) {
                    *zj += xjl * w;
                }
            }
            z[i] = ZERO;
            let gamma: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[j].conj() * c[(j, i)]).re)
                .sum();
            let t = if gamma > 0.0 { -scale / gamma.sqrt() } else { 0.0 };
            for j in (0..n).filter(|&j| j != i) {
                let v = z[j] * t;
                x[(j, i)] = v;
                x[(i, j)] = v.conj();
            }
        }
        let r = problem.objective(&x);
        history.push(r);
        observer(history.len(), &x, r);
        if r <= OBJECTIVE_FLOOR || (previous - r) / r < cfg.tol {
            converged = true;
            break;
        }
        previous = r;
    }

    Ok(LiftedIterate {
        x,
        objective_history: history,
        converged,
    })
}

/// Writes `sweep,objective` lines for a diagnostic dump.
pub fn write_objective_csv<W: Write>(history: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "sweep,objective")?;
    for (p, r) in history.iter().enumerate() {
        writeln!(out, "{},{:.16e}", p + 1, r)?;
    }
    Ok(())
}

/// Source estimate read off the last column of the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub estimate: CVector,
    /// Sources whose coupling to the last coordinate vanished (phase 0 used).
    pub degenerate: Vec<usize>,
}

/// `ŝ_k = b_k · X_{k,K} / |X_{k,K}|` (zero-based, last column).
pub fn extract_solution(x: &LiftedIterate, b: &[f64]) -> Result<Extraction> {
    let k = b.len();
    if x.x.nrows() != k + 1 {
        return Err(mismatch("iterate size differs from K + 1"));
    }
    let mut degenerate = Vec::new();
    let estimate = CVector::from_iterator(
        k,
        (0..k).map(|i| match unit_phase(x.x[(i, k)]) {
            Some(u) => u * b[i],
            None => {
                degenerate.push(i);
                C64::from(b[i])
            }
        }),
    );
    Ok(Extraction {
        estimate,
        degenerate,
    })
}

/// Dual certificate for a normalized problem.
///
/// Multipliers `λ_j = Re (C X)_jj` are shifted by the smallest eigenvalue `μ`
/// of `C − diag(λ)`, which makes them dual feasible. The value
/// `Σ λ_j + (K+1) μ` then bounds the relaxation optimum, hence the phase
/// least-squares optimum, from below.
pub fn dual_lower_bound(problem: &LiftedProblem, x: &LiftedIterate) -> Result<f64> {
    if !problem.is_normalized() {
        return Err(invalid("dual bound needs a normalized problem"));
    }
    let n = problem.cost.nrows();
    let cx = &problem.cost * &x.x;
    let lambda: Vec<f64> = (0..n).map(|j| cx[(j, j)].re).collect();
    let mut slack = problem.cost.clone();
    for (j, l) in lambda.iter().enumerate() {
        slack[(j, j)] -= C64::from(*l);
    }
    let mu = hermitian_eigenvalues(&slack)[0];
    Ok(lambda.iter().sum::<f64>() + n as f64 * mu)
}

/// Phase unmixing by lifting: build, normalize, run BCD, extract.
pub fn phunlift(instance: &Instance, cfg: &BcdConfig) -> Result<SolverResult> {
    let b = instance.magnitudes();
    let lifted = build_lifted(instance.mixing(), instance.observation(), b)?;
    let normalized = lifted.normalize();
    let iterate = bcd_solve(&normalized, cfg)?;
    let Extraction {
        estimate,
        degenerate,
    } = extract_solution(&iterate, b)?;
    let lower_bound = dual_lower_bound(&normalized, &iterate)?;
    Ok(SolverResult {
        residual: instance.residual_of(&estimate)?,
        estimate,
        iterations: iterate.sweeps(),
        converged: iterate.converged,
        sdp_objective: Some(iterate.objective()),
        lower_bound: Some(lower_bound),
        residual_history: iterate.objective_history,
        method: "phunlift".into(),
        degenerate,
    })
}

/// Worst-case error `2√2 ‖n‖ / σ_min(A)` of the relaxation for `K <= M`.
pub fn stability_bound(a: &CMatrix, n: &CVector) -> Result<f64> {
    let (m, k) = a.shape();
    if k > m {
        return Err(PhunError::UnsupportedRegime(format!(
            "no stability bound for K = {k} > M = {m}: sigma_min(A) = 0"
        )));
    }
    if n.len() != m {
        return Err(mismatch("noise length differs from M"));
    }
    let smin = sigma_min(a);
    if !(smin > 0.0) {
        return Err(invalid("mixing matrix is rank deficient"));
    }
    Ok(2.0 * std::f64::consts::SQRT_2 * n.norm() / smin)
}

/// `residual(ŝ) − lift_objective`; at most `ε` certifies `ŝ` is within `ε`
/// of the global optimum when `lift_objective` is a valid lower bound.
pub fn duality_gap(instance: &Instance, result: &SolverResult, lift_objective: f64) -> Result<f64> {
    Ok(instance.residual_of(&result.estimate)? - lift_objective)
}
