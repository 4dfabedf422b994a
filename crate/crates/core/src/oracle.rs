//! Exact thermodynamics from a dense spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::EigenSystem;
use crate::linalg::{self, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPoint {
    pub beta: f64,
    pub z: f64,
    pub alpha: f64,
    pub fdensity: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    Ok(())
}

/// `ln Σ_a e^{−βE_a}` with the ground energy factored out.
pub fn log_partition_function(eig: &EigenSystem, beta: f64) -> f64 {
    let e0 = eig.min_energy();
    let s: f64 = eig.energies.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    s.ln() - beta * e0
}

/// `Z(β) = Σ_a e^{−βE_a}`.
pub fn partition_function(eig: &EigenSystem, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(eig.dim() as f64);
    }
    Ok(log_partition_function(eig, beta).exp())
}

/// Boltzmann weights `e^{−βE_a}/Z` in eigenbasis order.
pub fn boltzmann_weights(eig: &EigenSystem, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let e0 = eig.min_energy();
    let raw: Vec<f64> = eig.energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let s: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / s).collect())
}

/// `ρ(β) = e^{−βH}/Z(β)` in the computational basis.
pub fn gibbs_state(eig: &EigenSystem, beta: f64) -> Result<CMatrix> {
    let p = boltzmann_weights(eig, beta)?;
    density_from_weights(eig, &p)
}

/// `V diag(p) V†`.
pub fn density_from_weights(eig: &EigenSystem, weights: &[f64]) -> Result<CMatrix> {
    if weights.len() != eig.dim() {
        return Err(Error::LayoutMismatch(format!("{} weights for dimension {}", weights.len(), eig.dim())));
    }
    let n = eig.dim();
    let mut scaled = eig.vectors.clone();
    for (col, &w) in weights.iter().enumerate() {
        for row in 0..n {
            scaled[(row, col)] *= C64::new(w, 0.0);
        }
    }
    Ok(scaled * eig.vectors.adjoint())
}

/// `F = Z(β_{k+1})/Z(β_k)`, evaluated as the thermal average `⟨e^{−ΔβH}⟩_{β_k}`.
pub fn ratio(eig: &EigenSystem, beta_k: f64, beta_k1: f64) -> Result<f64> {
    check_beta(beta_k)?;
    if beta_k1 < beta_k {
        return Err(Error::InvalidParameter(format!("ratio needs beta_k1 ≥ beta_k, got {beta_k1} < {beta_k}")));
    }
    let dbeta = beta_k1 - beta_k;
    let p = boltzmann_weights(eig, beta_k)?;
    Ok(p.iter().zip(&eig.energies).map(|(w, &e)| w * (-dbeta * e).exp()).sum())
}

/// `⟨H⟩_β`.
pub fn mean_energy(eig: &EigenSystem, beta: f64) -> Result<f64> {
    let p = boltzmann_weights(eig, beta)?;
    Ok(p.iter().zip(&eig.energies).map(|(w, e)| w * e).sum())
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    linalg::hermitian_fn(&herm, |l| C64::new(l.max(0.0).sqrt(), 0.0))
}

/// Uhlmann fidelity `Tr √(√ρ σ √ρ)`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::LayoutMismatch("fidelity needs square matrices of equal shape".into()));
    }
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    Ok(linalg::eigvalsh(&inner).iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let d = rho - sigma;
    let d = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    0.5 * linalg::eigvalsh(&d).iter().map(|l| l.abs()).sum::<f64>()
}

/// Scaling exponent `α = ½(1 − ln Z/ln D)` and free-energy density for `n` sites.
pub fn scaling_exponent(eig: &EigenSystem, beta: f64, n: usize) -> Result<ThermalPoint> {
    check_beta(beta)?;
    let dim = eig.dim() as f64;
    let (lnz, z) = if beta == 0.0 {
        (dim.ln(), dim)
    } else {
        let l = log_partition_function(eig, beta);
        (l, l.exp())
    };
    let alpha = if eig.dim() > 1 { 0.5 * (1.0 - lnz / dim.ln()) } else { 0.0 };
    let fdensity = if beta == 0.0 { 0.0 } else { -lnz / (n as f64 * beta) };
    Ok(ThermalPoint { beta, z, alpha, fdensity })
}
