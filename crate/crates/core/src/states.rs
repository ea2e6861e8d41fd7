//! Correlated thermal two-spin states and their composite embedding.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fock_projector, FockCutoff};
use crate::linops::{eigh, kron_all, CMatrix};

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (CODATA 2018), J/K.
pub const K_B: f64 = 1.380649e-23;

/// Tolerance for the PSD verdict.
pub const PSD_TOL: f64 = 1e-12;

/// Γ = ħω_e / (2 k_B T).
pub fn gamma_from_temperature(omega_e: f64, kelvin: f64) -> Result<f64> {
    if !(kelvin > 0.0) {
        return Err(Error::NonpositiveTemperature(kelvin));
    }
    Ok(HBAR * omega_e / (2.0 * K_B * kelvin))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperatures {
    Kelvin { t1: f64, t2: f64 },
    Gamma { gamma1: f64, gamma2: f64 },
}

/// Pseudo-temperatures of both spins plus the correlation α = r·e^{iθ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    pub temperatures: Temperatures,
    pub alpha_r: f64,
    pub alpha_theta: f64,
}

impl ThermalSpec {
    /// T₁ = 265 mK, T₂ = 255 mK, uncorrelated.
    pub fn reference() -> Self {
        ThermalSpec {
            temperatures: Temperatures::Kelvin { t1: 0.265, t2: 0.255 },
            alpha_r: 0.0,
            alpha_theta: 0.0,
        }
    }

    pub fn with_alpha(mut self, r: f64, theta: f64) -> Self {
        self.alpha_r = r;
        self.alpha_theta = theta;
        self
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.alpha_r, self.alpha_theta)
    }

    pub fn gammas(&self, omega_e: f64) -> Result<(f64, f64)> {
        if !(self.alpha_r >= 0.0) {
            return Err(Error::InvalidState(format!(
                "correlation amplitude must be non-negative, got {}",
                self.alpha_r
            )));
        }
        match self.temperatures {
            Temperatures::Kelvin { t1, t2 } => Ok((
                gamma_from_temperature(omega_e, t1)?,
                gamma_from_temperature(omega_e, t2)?,
            )),
            Temperatures::Gamma { gamma1, gamma2 } => Ok((gamma1, gamma2)),
        }
    }
}

/// Prefactor e^{−Γ₊} / (Z₁Z₂) multiplying the printed matrix, with Z_j = 1 + e^{−2Γ_j}.
///
/// The physical coherence ⟨↑↓|ρ|↓↑⟩ is α times this factor.
pub fn coherence_scale(gamma1: f64, gamma2: f64) -> f64 {
    let z1 = 1.0 + (-2.0 * gamma1).exp();
    let z2 = 1.0 + (-2.0 * gamma2).exp();
    (-(gamma1 + gamma2)).exp() / (z1 * z2)
}

/// ρ_s(0) = e^{−Γ₊}/(Z₁Z₂) · [[e^{Γ₊},0,0,0],[0,e^{Γ₋},α,0],[0,α*,e^{−Γ₋},0],[0,0,0,e^{−Γ₊}]].
pub fn build_rho_s0_from_gammas(gamma1: f64, gamma2: f64, alpha: C64) -> CMatrix {
    let gp = gamma1 + gamma2;
    let pre = coherence_scale(gamma1, gamma2);
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    // Diagonal written as e^{−Γ₊}e^{±Γ} products collapsed to single exponentials.
    let z1 = 1.0 + (-2.0 * gamma1).exp();
    let z2 = 1.0 + (-2.0 * gamma2).exp();
    let zz = z1 * z2;
    CMatrix::from_row_slice(
        4,
        4,
        &[
            r(1.0 / zz), z, z, z,
            z, r((-2.0 * gamma2).exp() / zz), alpha * pre, z,
            z, alpha.conj() * pre, r((-2.0 * gamma1).exp() / zz), z,
            z, z, z, r((-2.0 * gp).exp() / zz),
        ],
    )
}

pub fn build_rho_s0(spec: &ThermalSpec, omega_e: f64) -> Result<CMatrix> {
    let (g1, g2) = spec.gammas(omega_e)?;
    Ok(build_rho_s0_from_gammas(g1, g2, spec.alpha()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub trace: f64,
    pub min_eigenvalue: f64,
    /// Authoritative validity verdict.
    pub psd: bool,
    /// |α|² ≤ 1/2 − (1 + tanh Γ₁)²(1 + tanh Γ₂)²/8, reported only.
    pub closed_bound_satisfied: bool,
    pub closed_bound_value: f64,
}

/// Right-hand side of the printed correlation bound on |α|².
pub fn printed_alpha_bound(gamma1: f64, gamma2: f64) -> f64 {
    0.5 - (1.0 + gamma1.tanh()).powi(2) * (1.0 + gamma2.tanh()).powi(2) / 8.0
}

pub fn validate_state(rho: &CMatrix, spec: &ThermalSpec, omega_e: f64) -> Result<StateReport> {
    if rho.rows() != 4 || !rho.is_square() {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.rows() });
    }
    let (g1, g2) = spec.gammas(omega_e)?;
    let min_eigenvalue = eigh(rho)?.values[0];
    let bound = printed_alpha_bound(g1, g2);
    Ok(StateReport {
        trace: rho.trace().re,
        min_eigenvalue,
        psd: min_eigenvalue >= -PSD_TOL,
        closed_bound_satisfied: spec.alpha_r * spec.alpha_r <= bound,
        closed_bound_value: bound,
    })
}

/// ρ(0) = ρ_s ⊗ |0⟩⟨0| ⊗ |0⟩⟨0|.
pub fn build_rho0_composite(rho_s: &CMatrix, cutoff: FockCutoff) -> Result<CMatrix> {
    if rho_s.rows() != 4 || !rho_s.is_square() {
        return Err(Error::DimensionMismatch { expected: 4, found: rho_s.rows() });
    }
    let vac = fock_projector(cutoff, 0);
    Ok(kron_all(&[rho_s.clone(), vac.clone(), vac]))
}
