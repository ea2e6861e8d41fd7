//! Numeric unitary evolution of composite density matrices on a time grid.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    fock_projector, embed, mode_slot, spin_op, FockCutoff, LadderKind, PauliKind, ladder,
};
use crate::linops::{eigh, CMatrix, Eigh, SpaceDescriptor};
use crate::model::TrapParams;
use crate::states::{ThermalSpec, HBAR, PSD_TOL};

/// Eigenvalues of ρ(0) below this are dropped from the rank factorization.
const RANK_CUTOFF: f64 = 1e-15;

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::GridTooSmall { required: 2, found: n_points });
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::PreconditionViolated(format!(
                "time grid needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(TimeGrid { t_start, t_end, n_points })
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_points)
            .map(|k| if k + 1 == self.n_points { self.t_end } else { self.t_start + k as f64 * h })
            .collect()
    }
}

/// One record of a trajectory. Energies are in units of ħω_e/2, flux in (ħω_e/2)/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q1: f64,
    pub q2: f64,
    pub q12: f64,
    /// Filled by the engine (closed form) or by [`numeric_flux`].
    pub flux: Option<f64>,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub top_fock_population: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub engine: String,
    /// ħω_e/2 in joules.
    pub energy_unit: f64,
    pub omega_eff: f64,
    pub trap: TrapParams,
    pub thermal: ThermalSpec,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// Raw expectation values from [`evolve_numeric`]; `expectations[k][i]` is
/// observable `i` at time `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub expectations: Vec<Vec<f64>>,
    pub traces: Vec<f64>,
    pub purities: Vec<f64>,
}

/// Cached spectral data for repeated evolution of one ρ(0) under one H.
///
/// ρ(0) = W W† with W = [√p_k w_k] over its non-negligible eigenpairs, so
/// ρ(t) = (UW)(UW)† and only `rank` columns are propagated.
pub struct Evolver {
    h: Eigh,
    /// V† W.
    w_eig: DMatrix<C64>,
    rho0: CMatrix,
}

impl Evolver {
    pub fn new(h: &CMatrix, rho0: &CMatrix) -> Result<Self> {
        if !rho0.is_square() || rho0.rows() != h.rows() {
            return Err(Error::DimensionMismatch { expected: h.rows(), found: rho0.rows() });
        }
        let h_eig = eigh(h)?;
        let rho_eig = eigh(rho0)?;
        let tr = rho0.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace of rho0 is {tr}, expected 1")));
        }
        if rho_eig.values[0] < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "rho0 has negative eigenvalue {:e}",
                rho_eig.values[0]
            )));
        }
        let kept: Vec<usize> = (0..rho_eig.dim()).filter(|&k| rho_eig.values[k] > RANK_CUTOFF).collect();
        let vecs = rho_eig.vectors.inner();
        let w = DMatrix::from_fn(vecs.nrows(), kept.len(), |i, c| {
            vecs[(i, kept[c])] * rho_eig.values[kept[c]].sqrt()
        });
        let w_eig = h_eig.vectors.inner().adjoint() * w;
        Ok(Evolver { h: h_eig, w_eig, rho0: rho0.clone() })
    }

    pub fn rank(&self) -> usize {
        self.w_eig.ncols()
    }

    /// U(t) W.
    fn columns_at(&self, t: f64) -> DMatrix<C64> {
        let mut x = self.w_eig.clone();
        for (k, &lam) in self.h.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lam * t);
            for z in x.row_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        self.h.vectors.inner() * x
    }

    /// (Tr ρ, Tr ρ², ⟨O_i⟩) at time t.
    fn sample(&self, t: f64, observables: &[CMatrix]) -> (f64, f64, Vec<f64>) {
        let y = self.columns_at(t);
        let gram = y.adjoint() * &y;
        let trace = gram.trace().re;
        let purity = gram.iter().map(|z| z.norm_sqr()).sum();
        let values = observables
            .iter()
            .map(|o| {
                let oy = o.inner() * &y;
                y.iter().zip(oy.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
            })
            .collect();
        (trace, purity, values)
    }

    /// Full density-matrix path U ρ(0) U†.
    pub fn state_at(&self, t: f64) -> CMatrix {
        let u = self.h.propagator(t);
        &(&u * &self.rho0) * &u.adjoint()
    }

    pub fn run(&self, times: &[f64], observables: &[CMatrix]) -> Result<Evolution> {
        let dim = self.h.dim();
        if let Some(bad) = observables.iter().find(|o| !o.is_square() || o.rows() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.rows() });
        }
        let samples: Vec<_> = times.par_iter().map(|&t| self.sample(t, observables)).collect();
        let mut evo = Evolution {
            times: times.to_vec(),
            expectations: Vec::with_capacity(times.len()),
            traces: Vec::with_capacity(times.len()),
            purities: Vec::with_capacity(times.len()),
        };
        for (trace, purity, values) in samples {
            evo.traces.push(trace);
            evo.purities.push(purity);
            evo.expectations.push(values);
        }
        Ok(evo)
    }
}

/// Evolves ρ(0) under time-independent H (rad/s) and records Tr[ρ(t) O] for every observable.
pub fn evolve_numeric(h: &CMatrix, rho0: &CMatrix, grid: &TimeGrid, observables: &[CMatrix]) -> Result<Evolution> {
    Evolver::new(h, rho0)?.run(&grid.times(), observables)
}

/// Indices into [`pseudo_energy_observables`].
pub const OBS_H1: usize = 0;
pub const OBS_H2: usize = 1;
pub const OBS_N1: usize = 2;
pub const OBS_N2: usize = 3;
pub const OBS_TOP: usize = 4;

/// Local pseudo-energies (ħω_e/2)(1 − σ_z^(j)) in joules, the mode occupations
/// n̂₁, n̂₂, and the projector onto the top Fock level of either mode.
pub fn pseudo_energy_observables(space: &SpaceDescriptor, omega_e: f64) -> Result<Vec<CMatrix>> {
    let f = space.factors();
    if f.len() != 4 || f[0] != 2 || f[1] != 2 || f[2] != f[3] {
        return Err(Error::UnsupportedArgument(format!(
            "expected a [2, 2, d, d] space, got {f:?}"
        )));
    }
    let cutoff = FockCutoff(f[2] - 1);
    let unit = 0.5 * HBAR * omega_e;
    let id = CMatrix::identity(space.dim());
    let local = |j: usize| (&id - &spin_op(PauliKind::Z, j, space)).scale_real(unit);
    let number = |m: usize| embed(&ladder(cutoff, LadderKind::Number), space, mode_slot(m));
    let top = fock_projector(cutoff, cutoff.n_max());
    let top1 = embed(&top, space, mode_slot(0))?;
    let top2 = embed(&top, space, mode_slot(1))?;
    // P(n₁ = top or n₂ = top) = P₁ + P₂ − P₁P₂.
    let both = &top1 * &top2;
    Ok(vec![local(0), local(1), number(0)?, number(1)?, top1 + top2 - both])
}

/// Assembles a trajectory from an evolution under [`pseudo_energy_observables`].
pub fn trajectory_from_evolution(
    evo: &Evolution,
    grid: TimeGrid,
    engine: &str,
    energy_unit: f64,
    omega_eff: f64,
    trap: TrapParams,
    thermal: ThermalSpec,
) -> Trajectory {
    let points = evo
        .times
        .iter()
        .zip(&evo.expectations)
        .map(|(&t, e)| {
            let q1 = e[OBS_H1] / energy_unit;
            let q2 = e[OBS_H2] / energy_unit;
            TrajectoryPoint {
                t,
                q1,
                q2,
                q12: q1 - q2,
                flux: None,
                n1: Some(e[OBS_N1]),
                n2: Some(e[OBS_N2]),
                top_fock_population: Some(e[OBS_TOP].max(0.0)),
            }
        })
        .collect();
    Trajectory { grid, engine: engine.to_string(), energy_unit, omega_eff, trap, thermal, points }
}

/// Second-order finite-difference derivative of uniformly sampled data.
pub fn derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::GridTooSmall { required: 3, found: n });
    }
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h));
    for k in 1..n - 1 {
        out.push((values[k + 1] - values[k - 1]) / (2.0 * h));
    }
    out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h));
    Ok(out)
}

/// Attaches dQ₁₂/dt (centered inside, one-sided at the ends) to every point.
pub fn numeric_flux(mut traj: Trajectory) -> Result<Trajectory> {
    let q12: Vec<f64> = traj.points.iter().map(|p| p.q12).collect();
    let flux = derivative(&q12, traj.grid.step())?;
    for (p, f) in traj.points.iter_mut().zip(flux) {
        p.flux = Some(f);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{q1_norm, q2_norm, AnalyticContext};
    use crate::hilbert::{composite_space, excitation_number, mode_op, pauli};
    use crate::model::{build_h_ld, derive_couplings};
    use crate::states::{build_rho0_composite, build_rho_s0};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn reference_setup(cutoff: FockCutoff, r: f64) -> (TrapParams, ThermalSpec, CMatrix, CMatrix) {
        let p = TrapParams::ytterbium_reference();
        let th = ThermalSpec::reference().with_alpha(r, 0.0);
        let rho = build_rho0_composite(&build_rho_s0(&th, p.omega_e).unwrap(), cutoff).unwrap();
        (p.clone(), th, build_h_ld(&p, cutoff), rho)
    }

    #[test]
    fn grid_validation() {
        assert_eq!(TimeGrid::new(0.0, 1.0, 1), Err(Error::GridTooSmall { required: 2, found: 1 }));
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rabi_oscillation() {
        let om = 3.7;
        let h = pauli(PauliKind::X).scale_real(om / 2.0);
        let rho = CMatrix::from_real_diagonal(&[1.0, 0.0]);
        let grid = TimeGrid::new(0.0, 5.0, 101).unwrap();
        let evo = evolve_numeric(&h, &rho, &grid, &[pauli(PauliKind::Z)]).unwrap();
        for (t, e) in evo.times.iter().zip(&evo.expectations) {
            assert!((e[0] - (om * t).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_and_commuting_cases() {
        let h = CMatrix::from_real_diagonal(&[1.0, -2.0, 0.5, 3.0]);
        let rho = CMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]);
        let z = CMatrix::from_real_diagonal(&[1.0, -1.0, 1.0, -1.0]);
        let grid = TimeGrid::new(0.0, 10.0, 17).unwrap();
        let evo = evolve_numeric(&h, &rho, &grid, &[CMatrix::identity(4), z]).unwrap();
        for e in &evo.expectations {
            assert!((e[0] - 1.0).abs() < 1e-12);
            assert!((e[1] + 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = CMatrix::from_real_diagonal(&[1.0, 2.0]);
        let rho = CMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
        assert!(matches!(Evolver::new(&h, &rho), Err(Error::DimensionMismatch { .. })));
        let rho = CMatrix::from_real_diagonal(&[0.7, 0.7]);
        assert!(matches!(Evolver::new(&h, &rho), Err(Error::InvalidState(_))));
        let rho = CMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(Evolver::new(&h, &rho), Err(Error::InvalidState(_))));
        let bad = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let rho = CMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(Evolver::new(&bad, &rho), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn factorized_path_matches_density_matrix_path() {
        let cutoff = FockCutoff(3);
        let (_, _, h, rho) = reference_setup(cutoff, 0.4);
        let space = composite_space(cutoff);
        let obs = pseudo_energy_observables(&space, 1.0).unwrap();
        let ev = Evolver::new(&h, &rho).unwrap();
        assert_eq!(ev.rank(), 4);
        for t in [0.0, 3e-4, 1.7e-3] {
            let (_, _, vals) = ev.sample(t, &obs);
            let state = ev.state_at(t);
            for (o, v) in obs.iter().zip(vals) {
                let full = state.trace_product(o).re;
                assert!((full - v).abs() < 1e-12, "{full} vs {v}");
            }
        }
    }

    #[test]
    fn conservation_under_h_ld() {
        let cutoff = FockCutoff(3);
        let (p, _, h, rho) = reference_setup(cutoff, 0.05);
        let grid = TimeGrid::new(0.0, 2.0e-3, 41).unwrap();
        let obs = [excitation_number(cutoff)];
        let evo = evolve_numeric(&h, &rho, &grid, &obs).unwrap();
        let purity0 = rho.trace_product(&rho).re;
        let n0 = evo.expectations[0][0];
        for k in 0..grid.n_points {
            assert!((evo.traces[k] - 1.0).abs() < 1e-10);
            assert!((evo.purities[k] - purity0).abs() < 1e-10);
            assert!((evo.expectations[k][0] - n0).abs() < 1e-10);
        }
        let state = Evolver::new(&h, &rho).unwrap().state_at(grid.t_end);
        assert!(state.hermiticity_deviation() < 1e-10);
        let _ = p;
    }

    #[test]
    fn frame_shift_leaves_spin_observables_invariant() {
        let cutoff = FockCutoff(2);
        let (p, _, h, rho) = reference_setup(cutoff, 0.05);
        let shifted = &h + &excitation_number(cutoff).scale_real(p.mode_freqs[0]);
        let space = composite_space(cutoff);
        let obs = pseudo_energy_observables(&space, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 1e-3, 11).unwrap();
        let a = evolve_numeric(&h, &rho, &grid, &obs[..2]).unwrap();
        let b = evolve_numeric(&shifted, &rho, &grid, &obs[..2]).unwrap();
        for (x, y) in a.expectations.iter().zip(&b.expectations) {
            for i in 0..2 {
                assert!((x[i] - y[i]).abs() < 1e-10, "{} vs {}", x[i], y[i]);
            }
        }
    }

    #[test]
    fn observables_are_hermitian_with_expected_traces() {
        let cutoff = FockCutoff(2);
        let space = composite_space(cutoff);
        let obs = pseudo_energy_observables(&space, 2.0 / HBAR).unwrap();
        let d = space.dim() as f64;
        for o in &obs {
            assert!(o.hermiticity_deviation() == 0.0);
        }
        // (1 − σ_z) with unit prefactor has trace dim.
        assert!((obs[OBS_H1].trace().re - d).abs() < 1e-9);
        let n1 = mode_op(LadderKind::Number, 0, cutoff, &space);
        assert!(obs[OBS_N1].max_abs_diff(&n1) == 0.0);
        // 9 Fock pairs, 5 touch the top level of either mode.
        assert!((obs[OBS_TOP].trace().re - 4.0 * 5.0).abs() < 1e-12);
        assert!(pseudo_energy_observables(&SpaceDescriptor::new(vec![2, 2]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn initial_expectations_match_closed_form() {
        let cutoff = FockCutoff(2);
        let (p, th, _, rho) = reference_setup(cutoff, 0.05);
        let ctx = AnalyticContext::from_model(&derive_couplings(&p).unwrap(), &th, p.omega_e).unwrap();
        let obs = pseudo_energy_observables(&composite_space(cutoff), p.omega_e).unwrap();
        let unit = ctx.energy_unit();
        assert!((rho.trace_product(&obs[OBS_H1]).re / unit - q1_norm(&ctx, 0.0)).abs() < 1e-12);
        assert!((rho.trace_product(&obs[OBS_H2]).re / unit - q2_norm(&ctx, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_exact_for_vacuum_modes() {
        let grid = TimeGrid::new(0.0, 2.0e-3, 9).unwrap();
        let run = |n: usize| {
            let (p, _, h, rho) = reference_setup(FockCutoff(n), 0.05);
            let obs = pseudo_energy_observables(&composite_space(FockCutoff(n)), p.omega_e).unwrap();
            evolve_numeric(&h, &rho, &grid, &obs).unwrap()
        };
        let (a, b) = (run(2), run(4));
        let unit = 0.5 * HBAR * TrapParams::ytterbium_reference().omega_e;
        for (x, y) in a.expectations.iter().zip(&b.expectations) {
            assert!((x[OBS_H1] - y[OBS_H1]).abs() < 1e-9 * unit);
            assert!(y[OBS_TOP].abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_flux() {
        assert!(matches!(derivative(&[1.0, 2.0], 0.1), Err(Error::GridTooSmall { required: 3, found: 2 })));
        let d = derivative(&[2.0; 7], 0.3).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));

        let om = 5.0;
        let errors: Vec<f64> = [201usize, 401]
            .iter()
            .map(|&n| {
                let grid = TimeGrid::new(0.0, FRAC_PI_2 / om, n).unwrap();
                let vals: Vec<f64> = grid.times().iter().map(|t| (2.0 * om * t).sin()).collect();
                let d = derivative(&vals, grid.step()).unwrap();
                grid.times()
                    .iter()
                    .zip(d)
                    .map(|(t, x)| (x - 2.0 * om * (2.0 * om * t).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errors[0] < 1e-2);
        // Second order: halving the step quarters the error.
        assert!((errors[0] / errors[1] - 4.0).abs() < 0.5, "{errors:?}");
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            let k = (a * n + b) % seed.len();
            if i == j {
                C64::new(seed[k], 0.0)
            } else if i < j {
                C64::new(seed[k], seed[(k + 1) % seed.len()])
            } else {
                C64::new(seed[k], -seed[(k + 1) % seed.len()])
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn unitary_evolution_preserves_trace_and_purity(
            seed in proptest::collection::vec(-1.0f64..1.0, 40),
            weights in proptest::collection::vec(0.01f64..1.0, 6),
            t in 0.0f64..20.0,
        ) {
            let n = 6;
            let h = random_hermitian(n, &seed);
            let total: f64 = weights.iter().sum();
            let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let mixer = crate::linops::propagator(&random_hermitian(n, &seed[3..]), 1.0).unwrap();
            let rho = &(&mixer * &CMatrix::from_real_diagonal(&diag)) * &mixer.adjoint();
            let purity0 = rho.trace_product(&rho).re;
            let grid = TimeGrid::new(0.0, t + 1e-3, 5).unwrap();
            let evo = evolve_numeric(&h, &rho, &grid, &[]).unwrap();
            for k in 0..5 {
                prop_assert!((evo.traces[k] - 1.0).abs() < 1e-10);
                prop_assert!((evo.purities[k] - purity0).abs() < 1e-10);
            }
        }
    }
}
