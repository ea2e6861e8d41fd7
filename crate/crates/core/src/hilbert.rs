//! Spin and bosonic operators on the two-spin ⊗ two-mode space.
//!
//! Basis ordering is spin 1, spin 2, mode 1, mode 2. Each spin has
//! |↑⟩ (σ_z = +1) first, so the two-spin block reads |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{kron_all, CMatrix, SpaceDescriptor};

pub const SPIN1: usize = 0;
pub const SPIN2: usize = 1;
pub const MODE1: usize = 2;
pub const MODE2: usize = 3;

/// Slot of spin `j` (0-based).
pub fn spin_slot(j: usize) -> usize {
    [SPIN1, SPIN2][j]
}

/// Slot of mode `m` (0-based).
pub fn mode_slot(m: usize) -> usize {
    [MODE1, MODE2][m]
}

/// Highest retained Fock level; each mode has dimension `n_max + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockCutoff(pub usize);

impl FockCutoff {
    pub fn n_max(self) -> usize {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 + 1
    }
}

impl Default for FockCutoff {
    fn default() -> Self {
        FockCutoff(10)
    }
}

/// [2, 2, n_max+1, n_max+1].
pub fn composite_space(cutoff: FockCutoff) -> SpaceDescriptor {
    SpaceDescriptor::new(vec![2, 2, cutoff.dim(), cutoff.dim()]).expect("positive factors")
}

/// Two-spin space [2, 2].
pub fn spin_space() -> SpaceDescriptor {
    SpaceDescriptor::new(vec![2, 2]).expect("positive factors")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn pauli(kind: PauliKind) -> CMatrix {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match kind {
        PauliKind::X => [o, l, l, o],
        PauliKind::Y => [o, -i, i, o],
        PauliKind::Z => [l, o, o, -l],
        PauliKind::Plus => [o, l, o, o],
        PauliKind::Minus => [o, o, l, o],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Lower,
    Raise,
    Number,
}

/// Truncated bosonic operators; a†|n_max⟩ is dropped.
pub fn ladder(cutoff: FockCutoff, kind: LadderKind) -> CMatrix {
    let d = cutoff.dim();
    CMatrix::from_fn(d, d, |i, j| {
        let v = match kind {
            LadderKind::Lower if j == i + 1 => (j as f64).sqrt(),
            LadderKind::Raise if i == j + 1 => (i as f64).sqrt(),
            LadderKind::Number if i == j => i as f64,
            _ => 0.0,
        };
        C64::new(v, 0.0)
    })
}

/// Projector onto Fock level `n`.
pub fn fock_projector(cutoff: FockCutoff, n: usize) -> CMatrix {
    let d = cutoff.dim();
    CMatrix::from_fn(d, d, |i, j| C64::new(if i == n && j == n { 1.0 } else { 0.0 }, 0.0))
}

/// Places `op` on `slot`, identity elsewhere.
pub fn embed(op: &CMatrix, space: &SpaceDescriptor, slot: usize) -> Result<CMatrix> {
    let factors = space.factors();
    let &target = factors.get(slot).ok_or_else(|| {
        Error::UnsupportedArgument(format!("slot {slot} out of range for {} factors", factors.len()))
    })?;
    if !op.is_square() || op.rows() != target {
        return Err(Error::DimensionMismatch { expected: target, found: op.rows() });
    }
    let ops: Vec<CMatrix> = factors
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == slot { op.clone() } else { CMatrix::identity(d) })
        .collect();
    Ok(kron_all(&ops))
}

/// Spin operator on ion `j` in the composite space.
pub fn spin_op(kind: PauliKind, j: usize, space: &SpaceDescriptor) -> CMatrix {
    embed(&pauli(kind), space, spin_slot(j)).expect("spin slots have dimension 2")
}

/// Mode operator on mode `m` in the composite space.
pub fn mode_op(kind: LadderKind, m: usize, cutoff: FockCutoff, space: &SpaceDescriptor) -> CMatrix {
    embed(&ladder(cutoff, kind), space, mode_slot(m)).expect("mode slots match the cutoff")
}

/// Σ_j σ₊σ₋^(j) + Σ_m n̂_m, conserved by the Lamb-Dicke Hamiltonian.
pub fn excitation_number(cutoff: FockCutoff) -> CMatrix {
    let space = composite_space(cutoff);
    let up = &pauli(PauliKind::Plus) * &pauli(PauliKind::Minus);
    (0..2)
        .map(|j| embed(&up, &space, spin_slot(j)).unwrap())
        .chain((0..2).map(|m| mode_op(LadderKind::Number, m, cutoff, &space)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_identities() {
        assert_eq!(pauli(PauliKind::Z), CMatrix::from_real_diagonal(&[1.0, -1.0]));
        assert_eq!(
            &pauli(PauliKind::Plus) * &pauli(PauliKind::Minus),
            CMatrix::from_real_diagonal(&[1.0, 0.0])
        );
        assert_eq!(&pauli(PauliKind::Plus) + &pauli(PauliKind::Minus), pauli(PauliKind::X));
        // σ_x σ_y = iσ_z
        let xy = &pauli(PauliKind::X) * &pauli(PauliKind::Y);
        assert_eq!(xy, pauli(PauliKind::Z).scale(C64::new(0.0, 1.0)));
    }

    #[test]
    fn ladder_small_cutoff() {
        let a = ladder(FockCutoff(1), LadderKind::Lower);
        assert_eq!(a, CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let cutoff = FockCutoff(5);
        let a = ladder(cutoff, LadderKind::Lower);
        let ad = ladder(cutoff, LadderKind::Raise);
        let comm = a.commutator(&ad);
        for i in 0..cutoff.dim() {
            for j in 0..cutoff.dim() {
                let expected = match (i == j, i == cutoff.n_max()) {
                    (true, false) => 1.0,
                    // Truncation leaves [a, a†] = −n_max on the top level.
                    (true, true) => -(cutoff.n_max() as f64),
                    _ => 0.0,
                };
                assert!((comm.get(i, j) - C64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn number_is_raise_times_lower() {
        for n in 0..8 {
            let c = FockCutoff(n);
            let n_op = &ladder(c, LadderKind::Raise) * &ladder(c, LadderKind::Lower);
            assert!(n_op.max_abs_diff(&ladder(c, LadderKind::Number)) < 1e-14);
        }
    }

    #[test]
    fn embed_slots() {
        let sp = SpaceDescriptor::new(vec![2, 2]).unwrap();
        let z = pauli(PauliKind::Z);
        assert_eq!(embed(&z, &sp, 0).unwrap(), CMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]));
        assert_eq!(embed(&z, &sp, 1).unwrap(), CMatrix::from_real_diagonal(&[1.0, -1.0, 1.0, -1.0]));
        assert!(matches!(
            embed(&CMatrix::identity(3), &sp, 0),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn embedded_ops_on_distinct_slots_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sp = SpaceDescriptor::new(vec![2, 3, 2]).unwrap();
        let rand = |rng: &mut ChaCha8Rng, n: usize| {
            CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        for (s0, s1) in [(0, 1), (0, 2), (1, 2)] {
            let a = embed(&rand(&mut rng, sp.factors()[s0]), &sp, s0).unwrap();
            let b = embed(&rand(&mut rng, sp.factors()[s1]), &sp, s1).unwrap();
            assert!(a.commutator(&b).max_abs() < 1e-14);
        }
    }

    #[test]
    fn embed_preserves_hermiticity_and_spectrum() {
        let sp = composite_space(FockCutoff(2));
        let x = embed(&pauli(PauliKind::X), &sp, SPIN2).unwrap();
        assert!(x.is_hermitian(1e-14));
        let e = crate::linops::eigh(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[e.dim() - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_has_zero_phonons() {
        for n in 0..6 {
            let cutoff = FockCutoff(n);
            let sp = composite_space(cutoff);
            for m in 0..2 {
                let n_op = mode_op(LadderKind::Number, m, cutoff, &sp);
                // Composite index 0 is |↑↑, 0, 0⟩.
                assert_eq!(n_op.get(0, 0), C64::new(0.0, 0.0));
            }
        }
    }
}
