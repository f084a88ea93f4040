//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Sum of squared moduli.
pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// True when `a` has rank `min(M, K)` with smallest/largest singular value
/// ratio above `rel_tol`.
pub fn has_full_rank(a: &CMatrix, rel_tol: f64) -> bool {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) => max > 0.0 && min.is_finite() && min > rel_tol * max,
        _ => false,
    }
}

/// Smallest singular value among the first `min(M, K)`.
pub fn sigma_min(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Solves `H x = rhs` for Hermitian positive-definite `H`.
pub(crate) fn solve_hpd(h: CMatrix, rhs: &CVector) -> Option<CVector> {
    match h.clone().cholesky() {
        Some(ch) => Some(ch.solve(rhs)),
        None => h.lu().solve(rhs),
    }
}

/// `z / |z|`, or `None` when `z` is zero or not finite.
pub fn unit_phase(z: C64) -> Option<C64> {
    let r = z.norm();
    if r > 0.0 && r.is_finite() {
        Some(z / r)
    } else {
        None
    }
}
