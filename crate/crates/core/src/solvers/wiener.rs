//! Oracle multichannel Wiener filter and its magnitude-normalized variant.

use crate::error::{invalid, Result};
use crate::instance::Instance;
use crate::linalg::{solve_hpd, CMatrix, CVector, C64};

use super::SolverResult;

fn check_sigma(sigma_n: f64) -> Result<()> {
    if sigma_n > 0.0 && sigma_n.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "Wiener filtering needs sigma_n > 0, got {sigma_n}; use least squares for the noiseless limit"
        )))
    }
}

fn singular() -> crate::error::PhunError {
    invalid("Wiener system is numerically singular")
}

/// `(σ² D(b)⁻² + AᴴA)⁻¹ Aᴴ y`, a K×K system.
pub fn mwf_source_form(a: &CMatrix, y: &CVector, b: &[f64], sigma_n: f64) -> Result<CVector> {
    check_sigma(sigma_n)?;
    let var = sigma_n * sigma_n;
    let mut gram = a.adjoint() * a;
    for (i, bi) in b.iter().enumerate() {
        gram[(i, i)] += C64::from(var / (bi * bi));
    }
    solve_hpd(gram, &(a.adjoint() * y)).ok_or_else(singular)
}

/// `D(b)² Aᴴ (A D(b)² Aᴴ + σ² I)⁻¹ y`, an M×M system.
pub fn mwf_channel_form(a: &CMatrix, y: &CVector, b: &[f64], sigma_n: f64) -> Result<CVector> {
    check_sigma(sigma_n)?;
    let var = sigma_n * sigma_n;
    let mut weighted = a.clone();
    for (mut col, bi) in weighted.column_iter_mut().zip(b) {
        col *= C64::from(bi * bi);
    }
    // weighted = A D(b)²
    let mut cov = &weighted * a.adjoint();
    for i in 0..cov.nrows() {
        cov[(i, i)] += C64::from(var);
    }
    let w = solve_hpd(cov, y).ok_or_else(singular)?;
    Ok(weighted.adjoint() * w)
}

/// MWF estimate; picks the K×K form when `K <= M`, the M×M form otherwise.
pub fn mwf(instance: &Instance, sigma_n: f64) -> Result<SolverResult> {
    let (a, y, b) = (instance.mixing(), instance.observation(), instance.magnitudes());
    let estimate = if instance.is_determined() {
        mwf_source_form(a, y, b, sigma_n)?
    } else {
        mwf_channel_form(a, y, b, sigma_n)?
    };
    SolverResult::closed_form("mwf", instance, estimate, Vec::new())
}

/// MWF phases with magnitudes reset to `b`. Zero MWF coefficients get phase 0
/// and are reported in `degenerate`.
pub fn nmwf(instance: &Instance, sigma_n: f64) -> Result<SolverResult> {
    let raw = mwf(instance, sigma_n)?;
    let degenerate = raw
        .estimate
        .iter()
        .enumerate()
        .filter(|(_, z)| crate::linalg::unit_phase(**z).is_none())
        .map(|(i, _)| i)
        .collect();
    let estimate = instance.project(&raw.estimate);
    SolverResult::closed_form("nmwf", instance, estimate, degenerate)
}
