//! Evolution engines behind one trait, looked up by name at runtime.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytic::{heat_flux_norm, q12_norm, q1_norm, q2_norm, AnalyticContext};
use crate::dynamics::{
    numeric_flux, pseudo_energy_observables, trajectory_from_evolution, Evolver, TimeGrid,
    Trajectory, TrajectoryPoint,
};
use crate::error::{Error, Result};
use crate::hilbert::{composite_space, FockCutoff};
use crate::linops::CMatrix;
use crate::model::{build_h_ld, build_h_r, derive_couplings, TrapParams};
use crate::states::{build_rho0_composite, build_rho_s0, ThermalSpec, HBAR};

/// Everything an engine needs for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInput {
    pub trap: TrapParams,
    pub thermal: ThermalSpec,
    pub grid: TimeGrid,
    pub cutoff: FockCutoff,
}

pub trait Engine: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, input: &RunInput) -> Result<Trajectory>;
}

/// Closed-form pseudo-energies and flux in the vibrational ground state.
pub struct AnalyticEngine;

impl Engine for AnalyticEngine {
    fn name(&self) -> &'static str {
        "analytic"
    }

    fn description(&self) -> &'static str {
        "closed-form spin-chain evolution"
    }

    fn run(&self, input: &RunInput) -> Result<Trajectory> {
        let couplings = derive_couplings(&input.trap)?;
        let ctx = AnalyticContext::from_model(&couplings, &input.thermal, input.trap.omega_e)?;
        let points = input
            .grid
            .times()
            .into_iter()
            .map(|t| TrajectoryPoint {
                t,
                q1: q1_norm(&ctx, t),
                q2: q2_norm(&ctx, t),
                q12: q12_norm(&ctx, t),
                flux: Some(heat_flux_norm(&ctx, t)),
                n1: None,
                n2: None,
                top_fock_population: None,
            })
            .collect();
        Ok(Trajectory {
            grid: input.grid,
            engine: self.name().to_string(),
            energy_unit: ctx.energy_unit(),
            omega_eff: couplings.omega_eff,
            trap: input.trap.clone(),
            thermal: input.thermal,
            points,
        })
    }
}

fn run_numeric(name: &str, h: &CMatrix, input: &RunInput) -> Result<Trajectory> {
    let couplings = derive_couplings(&input.trap)?;
    let omega_e = input.trap.omega_e;
    let rho0 = build_rho0_composite(&build_rho_s0(&input.thermal, omega_e)?, input.cutoff)?;
    let obs = pseudo_energy_observables(&composite_space(input.cutoff), omega_e)?;
    let evo = Evolver::new(h, &rho0)?.run(&input.grid.times(), &obs)?;
    let traj = trajectory_from_evolution(
        &evo,
        input.grid,
        name,
        0.5 * HBAR * omega_e,
        couplings.omega_eff,
        input.trap.clone(),
        input.thermal,
    );
    if input.grid.n_points >= 3 {
        numeric_flux(traj)
    } else {
        Ok(traj)
    }
}

/// Exact evolution under the Lamb-Dicke Hamiltonian on the truncated Fock space.
pub struct NumericEngine;

impl Engine for NumericEngine {
    fn name(&self) -> &'static str {
        "numeric"
    }

    fn description(&self) -> &'static str {
        "full Lamb-Dicke Hamiltonian, truncated Fock space"
    }

    fn run(&self, input: &RunInput) -> Result<Trajectory> {
        derive_couplings(&input.trap)?;
        run_numeric(self.name(), &build_h_ld(&input.trap, input.cutoff), input)
    }
}

/// Exact evolution under the rotated effective Hamiltonian, phonons included.
pub struct NumericRotatedEngine;

impl Engine for NumericRotatedEngine {
    fn name(&self) -> &'static str {
        "numeric-hr"
    }

    fn description(&self) -> &'static str {
        "effective spin-chain Hamiltonian with Stark and hopping terms"
    }

    fn run(&self, input: &RunInput) -> Result<Trajectory> {
        run_numeric(self.name(), &build_h_r(&input.trap, input.cutoff)?, input)
    }
}

#[derive(Default)]
pub struct EngineRegistry {
    engines: BTreeMap<String, Box<dyn Engine>>,
}

impl EngineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `analytic`, `numeric` and `numeric-hr`.
    pub fn with_builtin() -> Self {
        let mut r = Self::new();
        r.register(Box::new(AnalyticEngine));
        r.register(Box::new(NumericEngine));
        r.register(Box::new(NumericRotatedEngine));
        r
    }

    /// Adds an engine, replacing any previous one of the same name.
    pub fn register(&mut self, engine: Box<dyn Engine>) {
        self.engines.insert(engine.name().to_string(), engine);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Engine> {
        self.engines
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownEngine(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.engines.keys().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::window_for;

    fn input(cutoff: usize, n_points: usize) -> RunInput {
        let trap = TrapParams::ytterbium_reference();
        let c = derive_couplings(&trap).unwrap();
        RunInput {
            grid: TimeGrid::new(0.0, window_for(c.omega_eff).unwrap(), n_points).unwrap(),
            trap,
            thermal: ThermalSpec::reference().with_alpha(0.05, 0.0),
            cutoff: FockCutoff(cutoff),
        }
    }

    #[test]
    fn registry_lookup() {
        let reg = EngineRegistry::with_builtin();
        assert_eq!(reg.names(), vec!["analytic", "numeric", "numeric-hr"]);
        assert_eq!(reg.get("numeric").unwrap().name(), "numeric");
        assert!(matches!(reg.get("nope"), Err(Error::UnknownEngine(_))));
    }

    #[test]
    fn analytic_trajectory_is_consistent() {
        let traj = AnalyticEngine.run(&input(10, 21)).unwrap();
        assert_eq!(traj.points.len(), 21);
        let p0 = traj.points[0];
        let g1 = traj.thermal.gammas(traj.trap.omega_e).unwrap().0;
        assert!((p0.q1 - (1.0 - g1.tanh())).abs() < 1e-14);
        for p in &traj.points {
            assert!((p.q12 - (p.q1 - p.q2)).abs() < 1e-12);
            assert!(p.n1.is_none());
        }
    }

    #[test]
    fn engines_share_the_time_column() {
        let inp = input(2, 11);
        let a = AnalyticEngine.run(&inp).unwrap();
        let n = NumericEngine.run(&inp).unwrap();
        let r = NumericRotatedEngine.run(&inp).unwrap();
        assert_eq!(a.times(), n.times());
        assert_eq!(a.times(), r.times());
        for p in n.points.iter().chain(&r.points) {
            assert!((p.q12 - (p.q1 - p.q2)).abs() < 1e-12);
            assert!(p.flux.is_some());
            assert!(p.top_fock_population.unwrap() >= 0.0);
        }
        // Both numeric engines start from the same state.
        assert!((n.points[0].q1 - a.points[0].q1).abs() < 1e-12);
        assert!((r.points[0].q2 - a.points[0].q2).abs() < 1e-12);
    }

    #[test]
    fn resonant_drive_propagates() {
        let mut inp = input(2, 5);
        inp.trap.delta = inp.trap.mode_freqs[1];
        for e in [&AnalyticEngine as &dyn Engine, &NumericEngine, &NumericRotatedEngine] {
            assert_eq!(e.run(&inp).unwrap_err(), Error::ResonantDrive { mode: 2 });
        }
    }
}
