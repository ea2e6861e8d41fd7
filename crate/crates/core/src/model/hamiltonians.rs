//! Hamiltonian builders. Every matrix is H/ħ in rad/s on the composite
//! space (or the two-spin space for the projected model).

use num_complex::Complex64 as C64;

use super::params::{derive_couplings, DerivedCouplings, TrapParams};
use crate::error::Result;
use crate::hilbert::{
    composite_space, ladder, mode_slot, pauli, spin_slot, spin_space, FockCutoff, LadderKind,
    PauliKind,
};
use crate::linops::{eigh, kron_all, CMatrix, SpaceDescriptor};

/// Tensor product of `factors` placed on their slots, identity elsewhere.
fn product_op(space: &SpaceDescriptor, factors: &[(usize, CMatrix)]) -> CMatrix {
    let ops: Vec<CMatrix> = space
        .factors()
        .iter()
        .enumerate()
        .map(|(slot, &d)| {
            factors
                .iter()
                .filter(|(s, _)| *s == slot)
                .fold(CMatrix::identity(d), |acc, (_, op)| &acc * op)
        })
        .collect();
    kron_all(&ops)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// H₀/ħ = Σ_j (ω_e/2) σ_z^(j) + Σ_m ω_m n̂_m.
pub fn build_h0(p: &TrapParams, cutoff: FockCutoff) -> CMatrix {
    free_part(p.omega_e, p, cutoff)
}

fn free_part(spin_freq: f64, p: &TrapParams, cutoff: FockCutoff) -> CMatrix {
    let space = composite_space(cutoff);
    let z = pauli(PauliKind::Z);
    let n = ladder(cutoff, LadderKind::Number);
    (0..2)
        .map(|j| product_op(&space, &[(spin_slot(j), z.scale_real(spin_freq / 2.0))]))
        .chain((0..2).map(|m| product_op(&space, &[(mode_slot(m), n.scale_real(p.mode_freqs[m]))])))
        .sum()
}

/// Laboratory-frame H(t)/ħ with the full exponential spin-motion coupling,
/// D_j = exp(i Σ_m η_jm (a_m + a_m†)) evaluated on the truncated space.
pub fn build_h_lab(p: &TrapParams, cutoff: FockCutoff, t: f64) -> Result<CMatrix> {
    let space = composite_space(cutoff);
    let a = ladder(cutoff, LadderKind::Lower);
    let x = &a + &a.adjoint();
    let sx = pauli(PauliKind::X);
    let mut h = build_h0(p, cutoff);
    for j in 0..2 {
        let position = product_op(&space, &[(mode_slot(0), x.scale_real(p.lamb_dicke[j][0]))])
            + product_op(&space, &[(mode_slot(1), x.scale_real(p.lamb_dicke[j][1]))]);
        let displacement = eigh(&position)?.apply_fn(|l| C64::from_polar(1.0, l));
        let phase = C64::from_polar(1.0, p.phases[j] - p.omega_drive() * t);
        let drive = displacement.scale(phase);
        let coupling = (&drive + &drive.adjoint()).scale_real(p.rabi[j]);
        let flip = product_op(&space, &[(spin_slot(j), sx.clone())]);
        h = h + &coupling * &flip;
    }
    Ok(h)
}

/// Lamb-Dicke Hamiltonian in the rotating frame:
/// Σ_j (δ/2)σ_z^(j) + Σ_m ω_m n̂_m + i Σ_{j,m} Ω_j η_jm (a_m σ₊^(j) e^{iφ_j} − a_m† σ₋^(j) e^{−iφ_j}).
pub fn build_h_ld(p: &TrapParams, cutoff: FockCutoff) -> CMatrix {
    let space = composite_space(cutoff);
    let a = ladder(cutoff, LadderKind::Lower);
    let ad = ladder(cutoff, LadderKind::Raise);
    let sp = pauli(PauliKind::Plus);
    let sm = pauli(PauliKind::Minus);
    let mut h = free_part(p.delta, p, cutoff);
    for j in 0..2 {
        for m in 0..2 {
            let strength = p.rabi[j] * p.lamb_dicke[j][m];
            if strength == 0.0 {
                continue;
            }
            let up = product_op(&space, &[(spin_slot(j), sp.clone()), (mode_slot(m), a.clone())])
                .scale(c(0.0, strength) * C64::from_polar(1.0, p.phases[j]));
            let down = product_op(&space, &[(spin_slot(j), sm.clone()), (mode_slot(m), ad.clone())])
                .scale(c(0.0, -strength) * C64::from_polar(1.0, -p.phases[j]));
            h = h + up + down;
        }
    }
    h
}

/// Spin-exchange term Σ_{j≠s} J_js (σ₊^(j)σ₋^(s) e^{iΔφ_js} + h.c.) on `space`.
fn exchange_term(space: &SpaceDescriptor, c: &DerivedCouplings) -> CMatrix {
    let sp = pauli(PauliKind::Plus);
    let sm = pauli(PauliKind::Minus);
    let pairs = [(0usize, 1usize, c.j12, c.delta_phi), (1, 0, c.j21, -c.delta_phi)];
    pairs
        .iter()
        .map(|&(j, s, coupling, dphi)| {
            let fwd = product_op(space, &[(spin_slot(j), sp.clone()), (spin_slot(s), sm.clone())])
                .scale(C64::from_polar(coupling, dphi));
            let bwd = product_op(space, &[(spin_slot(j), sm.clone()), (spin_slot(s), sp.clone())])
                .scale(C64::from_polar(coupling, -dphi));
            fwd + bwd
        })
        .sum()
}

/// Effective spin-chain Hamiltonian after the small rotation:
/// Σ_m ω_m n̂_m + Σ_{j,m} V_jm (2n̂_m + 1) σ_z^(j)
/// + Σ_{j, m≠l} Ω_j² η_jm η_jl / (δ − ω_l) (a_l† a_m + a_l a_m†) σ_z^(j) + exchange.
pub fn build_h_r(p: &TrapParams, cutoff: FockCutoff) -> Result<CMatrix> {
    let couplings = derive_couplings(p)?;
    let space = composite_space(cutoff);
    let z = pauli(PauliKind::Z);
    let a = ladder(cutoff, LadderKind::Lower);
    let ad = ladder(cutoff, LadderKind::Raise);
    let n = ladder(cutoff, LadderKind::Number);
    let stark = (&n.scale_real(2.0)) + &CMatrix::identity(cutoff.dim());

    let mut h = (0..2)
        .map(|m| product_op(&space, &[(mode_slot(m), n.scale_real(p.mode_freqs[m]))]))
        .sum::<CMatrix>();
    for j in 0..2 {
        for m in 0..2 {
            h = h + product_op(
                &space,
                &[(spin_slot(j), z.clone()), (mode_slot(m), stark.scale_real(couplings.v[j][m]))],
            );
        }
        for (m, l) in [(0usize, 1usize), (1, 0)] {
            let strength = p.rabi[j] * p.rabi[j] * p.lamb_dicke[j][m] * p.lamb_dicke[j][l]
                / (p.delta - p.mode_freqs[l]);
            let hop = product_op(
                &space,
                &[(spin_slot(j), z.clone()), (mode_slot(l), ad.clone()), (mode_slot(m), a.clone())],
            ) + product_op(
                &space,
                &[(spin_slot(j), z.clone()), (mode_slot(l), a.clone()), (mode_slot(m), ad.clone())],
            );
            h = h + hop.scale_real(strength);
        }
    }
    Ok(h + exchange_term(&space, &couplings))
}

/// Projected two-spin Hamiltonian Σ_{j,m} V_jm σ_z^(j) + exchange, 4×4.
pub fn build_h_s(c: &DerivedCouplings) -> CMatrix {
    let space = spin_space();
    let z = pauli(PauliKind::Z);
    let fields: CMatrix = (0..2)
        .map(|j| product_op(&space, &[(spin_slot(j), z.scale_real(c.v_ion(j)))]))
        .sum();
    fields + exchange_term(&space, c)
}
