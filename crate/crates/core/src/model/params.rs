use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamb-Dicke factors above this trigger a regime warning.
pub const LAMB_DICKE_WARN: f64 = 0.3;

/// Physical trap inputs. All frequencies are angular (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Qubit gap ω_e.
    pub omega_e: f64,
    /// Drive detuning δ = ω_e − ω.
    pub delta: f64,
    /// Common-mode frequencies ω₁, ω₂.
    pub mode_freqs: [f64; 2],
    /// Rabi rates Ω₁, Ω₂.
    pub rabi: [f64; 2],
    /// η[j][m] couples ion j to mode m.
    pub lamb_dicke: [[f64; 2]; 2],
    /// Drive phases φ₁, φ₂ (rad).
    pub phases: [f64; 2],
}

impl TrapParams {
    /// Ytterbium reference set: ω_e/2π = 12.643 GHz, ω_m/2π = 3.5838 and
    /// 3.5305 MHz, Ω_j/2π = 300 kHz, η = 0.049, δ/2π = 3.5571 MHz, Δφ = −π/2.
    pub fn ytterbium_reference() -> Self {
        TrapParams {
            omega_e: TAU * 12.643e9,
            delta: TAU * 3.5571e6,
            mode_freqs: [TAU * 3.5838e6, TAU * 3.5305e6],
            rabi: [TAU * 300e3, TAU * 300e3],
            lamb_dicke: [[0.049; 2]; 2],
            phases: [-FRAC_PI_2, 0.0],
        }
    }

    /// Drive frequency ω = ω_e − δ.
    pub fn omega_drive(&self) -> f64 {
        self.omega_e - self.delta
    }

    pub fn delta_phi(&self) -> f64 {
        self.phases[0] - self.phases[1]
    }

    /// Regime checks; these warn rather than fail.
    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for j in 0..2 {
            for m in 0..2 {
                let eta = self.lamb_dicke[j][m];
                if eta.abs() > LAMB_DICKE_WARN {
                    out.push(format!(
                        "Lamb-Dicke factor eta[{}][{}] = {eta} exceeds {LAMB_DICKE_WARN}",
                        j + 1,
                        m + 1
                    ));
                }
                let coupling = (self.rabi[j] * eta).abs();
                let detuning = (self.delta - self.mode_freqs[m]).abs();
                if coupling >= detuning {
                    out.push(format!(
                        "dispersive condition violated for ion {} / mode {}: Omega*eta = {coupling:.6e} rad/s >= |delta - omega_m| = {detuning:.6e} rad/s",
                        j + 1,
                        m + 1
                    ));
                }
            }
        }
        out
    }
}

/// Effective couplings derived from [`TrapParams`]; frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    /// Small-rotation parameters g[m][j] = Ω_j η_jm / (δ − ω_m).
    pub g: [[f64; 2]; 2],
    /// Stark terms V[j][m] = Ω_j² η_jm² / (δ − ω_m).
    pub v: [[f64; 2]; 2],
    pub j12: f64,
    pub j21: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    /// J = J₁₂ + J₂₁.
    pub j_total: f64,
    /// √(V₋² + J²).
    pub omega_eff: f64,
    pub delta_phi: f64,
}

impl DerivedCouplings {
    /// Stark shift of ion j summed over modes, Σ_m V_jm.
    pub fn v_ion(&self, j: usize) -> f64 {
        self.v[j][0] + self.v[j][1]
    }
}

pub fn derive_couplings(p: &TrapParams) -> Result<DerivedCouplings> {
    let mut detuning = [0.0; 2];
    for m in 0..2 {
        detuning[m] = p.delta - p.mode_freqs[m];
        if detuning[m] == 0.0 {
            return Err(Error::ResonantDrive { mode: m + 1 });
        }
    }
    let eta = &p.lamb_dicke;
    let omega = &p.rabi;

    let mut g = [[0.0; 2]; 2];
    let mut v = [[0.0; 2]; 2];
    for m in 0..2 {
        for j in 0..2 {
            g[m][j] = omega[j] * eta[j][m] / detuning[m];
            v[j][m] = omega[j] * omega[j] * eta[j][m] * eta[j][m] / detuning[m];
        }
    }
    let exchange = |j: usize, s: usize| -> f64 {
        omega[j] * omega[s] * (0..2).map(|m| eta[j][m] * eta[s][m] / detuning[m]).sum::<f64>()
    };
    let j12 = exchange(0, 1);
    let j21 = exchange(1, 0);

    let v_plus = (0..2).map(|m| v[0][m] + v[1][m]).sum::<f64>();
    let v_minus = (0..2).map(|m| v[0][m] - v[1][m]).sum::<f64>();
    let j_total = j12 + j21;
    Ok(DerivedCouplings {
        g,
        v,
        j12,
        j21,
        v_plus,
        v_minus,
        j_total,
        omega_eff: v_minus.hypot(j_total),
        delta_phi: p.delta_phi(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_couplings() {
        let c = derive_couplings(&TrapParams::ytterbium_reference()).unwrap();
        assert!((c.j12 - 191.17).abs() / 191.17 < 5e-3, "J12 = {}", c.j12);
        assert_eq!(c.j12, c.j21);
        assert_eq!(c.v_minus, 0.0);
        assert!((c.v_plus - 382.34167).abs() / 382.34167 < 5e-3, "V+ = {}", c.v_plus);
        assert_eq!(c.omega_eff, c.j_total);
        assert!((c.v_plus - c.j_total).abs() / c.j_total < 1e-3);
        // Strongly non-perturbative rotation parameters for this set.
        assert!(c.g[0][0] < -0.5 && c.g[1][0] > 0.5);
    }

    #[test]
    fn reference_has_no_warnings() {
        assert!(TrapParams::ytterbium_reference().validity_warnings().is_empty());
        let mut p = TrapParams::ytterbium_reference();
        p.lamb_dicke[1][0] = 0.4;
        let w = p.validity_warnings();
        assert!(w.iter().any(|s| s.contains("Lamb-Dicke")));
        assert!(w.iter().any(|s| s.contains("dispersive")));
    }

    #[test]
    fn single_mode_toy_case() {
        let p = TrapParams {
            omega_e: TAU * 1e9,
            delta: TAU * 11_000.0,
            mode_freqs: [TAU * 10_000.0, TAU * 50_000.0],
            rabi: [TAU * 100.0; 2],
            lamb_dicke: [[0.1, 0.0], [0.1, 0.0]],
            phases: [0.0; 2],
        };
        let c = derive_couplings(&p).unwrap();
        // Ω²η²/(δ − ω₁) = (2π·100)²·0.01 / (2π·1000) = 2π·0.1
        let expected = TAU * 100.0 * 100.0 * 0.01 / 1000.0;
        assert!((c.j12 - expected).abs() < 1e-12);
    }

    #[test]
    fn resonant_drive_is_rejected() {
        let mut p = TrapParams::ytterbium_reference();
        p.delta = p.mode_freqs[0];
        assert_eq!(derive_couplings(&p), Err(Error::ResonantDrive { mode: 1 }));
    }

    #[test]
    fn symmetric_trap_has_vanishing_v_minus() {
        let mut p = TrapParams::ytterbium_reference();
        p.rabi = [TAU * 123e3; 2];
        p.lamb_dicke = [[0.03, 0.07], [0.03, 0.07]];
        let c = derive_couplings(&p).unwrap();
        assert_eq!(c.v_minus, 0.0);
        assert_eq!(c.j12, c.j21);
        assert!(c.omega_eff >= c.j_total.abs() && c.omega_eff >= c.v_minus.abs());
    }

    #[test]
    fn couplings_scale_homogeneously_in_rabi() {
        let p = TrapParams::ytterbium_reference();
        let mut q = p.clone();
        let s = 1.7;
        q.rabi = [p.rabi[0] * s, p.rabi[1] * s];
        let (a, b) = (derive_couplings(&p).unwrap(), derive_couplings(&q).unwrap());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        assert!(close(b.j12, s * s * a.j12));
        assert!(close(b.v_plus, s * s * a.v_plus));
        for m in 0..2 {
            for j in 0..2 {
                assert!(close(b.g[m][j], s * a.g[m][j]));
                assert!(close(b.v[j][m], s * s * a.v[j][m]));
            }
        }
    }

    #[test]
    fn asymmetric_trap_bounds() {
        let mut p = TrapParams::ytterbium_reference();
        p.rabi[1] *= 0.6;
        p.lamb_dicke[0][1] = 0.02;
        let c = derive_couplings(&p).unwrap();
        assert!(c.v_minus != 0.0);
        assert!(c.omega_eff >= c.j_total.abs() && c.omega_eff >= c.v_minus.abs());
    }
}
