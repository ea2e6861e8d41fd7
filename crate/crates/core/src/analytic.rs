//! Closed-form evolution in the vibrational ground-state manifold.
//!
//! Pseudo-energies are ⟨H_j⟩ with the local Hamiltonian
//! H_j = (ħω_e/2)(1 − σ_z^(j)). Dimensionless `*_norm` variants are in
//! units of ħω_e/2 (flux in (ħω_e/2)/s).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::CMatrix;
use crate::model::DerivedCouplings;
use crate::states::{coherence_scale, ThermalSpec, HBAR};

/// Relative tolerance for the V₋ = 0 precondition of the simplified flux.
const SIMPLIFIED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticContext {
    pub v_plus: f64,
    pub v_minus: f64,
    /// J = J₁₂ + J₂₁.
    pub j: f64,
    pub omega_eff: f64,
    pub delta_phi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Magnitude of the physical coherence ⟨↑↓|ρ_s(0)|↓↑⟩.
    pub coherence: f64,
    /// Phase θ of the coherence.
    pub theta: f64,
    pub omega_e: f64,
}

impl AnalyticContext {
    /// Builds a context from raw closed-form parameters; Ω is recomputed as √(V₋² + J²).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v_plus: f64,
        v_minus: f64,
        j: f64,
        delta_phi: f64,
        gamma1: f64,
        gamma2: f64,
        coherence: f64,
        theta: f64,
        omega_e: f64,
    ) -> Self {
        AnalyticContext {
            v_plus,
            v_minus,
            j,
            omega_eff: v_minus.hypot(j),
            delta_phi,
            gamma1,
            gamma2,
            coherence,
            theta,
            omega_e,
        }
    }

    /// Context for the printed initial state: the correlation α enters
    /// ρ_s(0) scaled by e^{−Γ₊}/(Z₁Z₂), and that product is the coherence.
    pub fn from_model(couplings: &DerivedCouplings, thermal: &ThermalSpec, omega_e: f64) -> Result<Self> {
        let (g1, g2) = thermal.gammas(omega_e)?;
        let ctx = Self::new(
            couplings.v_plus,
            couplings.v_minus,
            couplings.j_total,
            couplings.delta_phi,
            g1,
            g2,
            thermal.alpha_r * coherence_scale(g1, g2),
            thermal.alpha_theta,
            omega_e,
        );
        debug_assert!((ctx.omega_eff - couplings.omega_eff).abs() <= 1e-12 * ctx.omega_eff.max(1.0));
        Ok(ctx)
    }

    /// Δθ = Δφ − θ.
    pub fn delta_theta(&self) -> f64 {
        self.delta_phi - self.theta
    }

    /// ħω_e/2 in joules.
    pub fn energy_unit(&self) -> f64 {
        0.5 * HBAR * self.omega_e
    }

    /// tanh Γ₁ − tanh Γ₂.
    pub fn tanh_difference(&self) -> f64 {
        self.gamma1.tanh() - self.gamma2.tanh()
    }

    /// Coherence → printed-α amplitude conversion factor.
    pub fn coherence_scale(&self) -> f64 {
        coherence_scale(self.gamma1, self.gamma2)
    }

    /// Same context with Δθ set to `delta_theta` (θ adjusted, Δφ kept).
    pub fn with_delta_theta(mut self, delta_theta: f64) -> Self {
        self.theta = self.delta_phi - delta_theta;
        self
    }

    pub fn with_coherence(mut self, coherence: f64) -> Self {
        self.coherence = coherence;
        self
    }

    fn degenerate(&self) -> bool {
        self.omega_eff == 0.0
    }
}

/// Closed-form Û(t) = exp(−iĤ_S t) in the |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ basis.
pub fn propagator_4x4(ctx: &AnalyticContext, t: f64) -> CMatrix {
    let zero = C64::new(0.0, 0.0);
    let u11 = C64::from_polar(1.0, -ctx.v_plus * t);
    let (u22, u23) = if ctx.degenerate() {
        (C64::new(1.0, 0.0), zero)
    } else {
        let (s, c) = (ctx.omega_eff * t).sin_cos();
        (
            C64::new(c, -ctx.v_minus / ctx.omega_eff * s),
            C64::new(0.0, -ctx.j / ctx.omega_eff * s) * C64::from_polar(1.0, ctx.delta_phi),
        )
    };
    CMatrix::from_row_slice(
        4,
        4,
        &[
            u11, zero, zero, zero,
            zero, u22, u23, zero,
            zero, -u23.conj(), u22.conj(), zero,
            zero, zero, zero, u11.conj(),
        ],
    )
}

/// 𝒬₁(t) / (ħω_e/2).
pub fn q1_norm(ctx: &AnalyticContext, t: f64) -> f64 {
    let (g1, g2) = (ctx.gamma1.tanh(), ctx.gamma2.tanh());
    if ctx.degenerate() {
        return 1.0 - g1;
    }
    let (om, jj, vm, r, dth) = (ctx.omega_eff, ctx.j, ctx.v_minus, ctx.coherence, ctx.delta_theta());
    let s2 = (om * t).sin().powi(2);
    // J²(… − 4V₋r/J cos Δθ) expanded to avoid dividing by J.
    (jj * jj * s2 * (g1 - g2) - 4.0 * jj * vm * r * dth.cos() * s2
        + om * om * (1.0 - g1 - 2.0 * jj * r / om * dth.sin() * (2.0 * om * t).sin()))
        / (om * om)
}

/// 𝒬₂(t) / (ħω_e/2).
pub fn q2_norm(ctx: &AnalyticContext, t: f64) -> f64 {
    let (g1, g2) = (ctx.gamma1.tanh(), ctx.gamma2.tanh());
    if ctx.degenerate() {
        return 1.0 - g2;
    }
    let (om, jj, vm, r, dth) = (ctx.omega_eff, ctx.j, ctx.v_minus, ctx.coherence, ctx.delta_theta());
    let s2 = (om * t).sin().powi(2);
    (jj * jj * s2 * (g2 - g1) + 4.0 * jj * vm * r * dth.cos() * s2
        + om * om * (1.0 - g2 + 2.0 * jj * r / om * dth.sin() * (2.0 * om * t).sin()))
        / (om * om)
}

/// 𝒬₁₂(t) / (ħω_e/2).
pub fn q12_norm(ctx: &AnalyticContext, t: f64) -> f64 {
    let dt = ctx.tanh_difference();
    if ctx.degenerate() {
        return -dt;
    }
    let (om, jj, vm, r, dth) = (ctx.omega_eff, ctx.j, ctx.v_minus, ctx.coherence, ctx.delta_theta());
    let s2 = (om * t).sin().powi(2);
    -2.0 / (om * om)
        * (0.5 * dt * (jj * jj * (2.0 * om * t).cos() + vm * vm)
            + 2.0 * jj * r * (2.0 * vm * dth.cos() * s2 + om * dth.sin() * (2.0 * om * t).sin()))
}

/// d𝒬₁₂/dt / (ħω_e/2), in s⁻¹.
pub fn heat_flux_norm(ctx: &AnalyticContext, t: f64) -> f64 {
    if ctx.degenerate() {
        return 0.0;
    }
    let (om, jj, vm, r, dth) = (ctx.omega_eff, ctx.j, ctx.v_minus, ctx.coherence, ctx.delta_theta());
    let (s, c) = (2.0 * om * t).sin_cos();
    2.0 / om * (jj * jj * ctx.tanh_difference() * s - 4.0 * jj * r * (vm * dth.cos() * s + om * dth.sin() * c))
}

/// 𝒬₁(t) in joules.
pub fn q1(ctx: &AnalyticContext, t: f64) -> f64 {
    ctx.energy_unit() * q1_norm(ctx, t)
}

/// 𝒬₂(t) in joules.
pub fn q2(ctx: &AnalyticContext, t: f64) -> f64 {
    ctx.energy_unit() * q2_norm(ctx, t)
}

/// 𝒬₁₂(t) in joules.
pub fn q12(ctx: &AnalyticContext, t: f64) -> f64 {
    ctx.energy_unit() * q12_norm(ctx, t)
}

/// Pseudo-heat flux d𝒬₁₂/dt in watts.
pub fn heat_flux(ctx: &AnalyticContext, t: f64) -> f64 {
    ctx.energy_unit() * heat_flux_norm(ctx, t)
}

/// Flux for V₋ = 0, Ω = |J|: ħω_e J [(tanh Γ₁ − tanh Γ₂) sin 2Jt − 4r sin Δθ cos 2Jt], in watts.
pub fn simplified_flux(ctx: &AnalyticContext, t: f64) -> Result<f64> {
    if ctx.v_minus.abs() > SIMPLIFIED_TOL * ctx.j.abs() {
        return Err(Error::PreconditionViolated(format!(
            "simplified flux needs V- = 0, got {}",
            ctx.v_minus
        )));
    }
    let jj = ctx.j;
    Ok(HBAR
        * ctx.omega_e
        * jj
        * (ctx.tanh_difference() * (2.0 * jj * t).sin()
            - 4.0 * ctx.coherence * ctx.delta_theta().sin() * (2.0 * jj * t).cos()))
}

/// End of the faithful-simulation interval 2Ωt ∈ [0, π/2].
pub fn validity_window(ctx: &AnalyticContext) -> Result<f64> {
    window_for(ctx.omega_eff)
}

pub fn window_for(omega_eff: f64) -> Result<f64> {
    if omega_eff == 0.0 {
        return Err(Error::DegenerateOmega);
    }
    Ok(PI / (4.0 * omega_eff.abs()))
}
