//! Scenario orchestration: Fig. 1 style comparisons, sweep surfaces and
//! reversal thresholds.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{heat_flux_norm, window_for, AnalyticContext};
use crate::dynamics::{TimeGrid, Trajectory, TrajectoryPoint};
use crate::engine::{EngineRegistry, RunInput};
use crate::error::{Error, Result};
use crate::hilbert::FockCutoff;
use crate::model::{derive_couplings, TrapParams};
use crate::states::{build_rho_s0, validate_state, ThermalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    R,
    DeltaTheta,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::R => "r",
            SweepAxis::DeltaTheta => "delta_theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub time_points: usize,
}

impl SweepSpec {
    /// Δθ ∈ [−π, π] on a 101 × 101 surface.
    pub fn phase_default() -> Self {
        SweepSpec { axis: SweepAxis::DeltaTheta, min: -PI, max: PI, steps: 101, time_points: 101 }
    }

    /// r ∈ [0, 0.5] on a 101 × 101 surface.
    pub fn amplitude_default() -> Self {
        SweepSpec { axis: SweepAxis::R, min: 0.0, max: 0.5, steps: 101, time_points: 101 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.max } else { self.min + k as f64 * h })
            .collect()
    }
}

/// Time grid with an optional end; `None` means the validity window π/(4Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_start: 0.0, t_end: None, n_points: 201 }
    }
}

impl GridSpec {
    pub fn resolve(&self, omega_eff: f64) -> Result<TimeGrid> {
        let end = match self.t_end {
            Some(t) => t,
            None => window_for(omega_eff)?,
        };
        TimeGrid::new(self.t_start, end, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub trap: TrapParams,
    pub thermal: ThermalSpec,
    pub grid: GridSpec,
    pub cutoff: FockCutoff,
    pub engines: Vec<String>,
    pub sweep: Option<SweepSpec>,
    /// Allowed |ΔQ_j| between engines, in units of ħω_e/2.
    pub tolerance: f64,
}

impl Scenario {
    /// Ytterbium trap, 265/255 mK, α = 0.05, both engines, 201 points over the window.
    pub fn reference() -> Self {
        Scenario {
            name: "ytterbium".to_string(),
            trap: TrapParams::ytterbium_reference(),
            thermal: ThermalSpec::reference().with_alpha(0.05, 0.0),
            grid: GridSpec::default(),
            cutoff: FockCutoff::default(),
            engines: vec!["analytic".to_string(), "numeric".to_string()],
            sweep: None,
            tolerance: 0.05,
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        self.grid.resolve(derive_couplings(&self.trap)?.omega_eff)
    }

    pub fn run_input(&self, thermal: ThermalSpec) -> Result<RunInput> {
        Ok(RunInput { trap: self.trap.clone(), thermal, grid: self.time_grid()?, cutoff: self.cutoff })
    }

    pub fn analytic_context(&self) -> Result<AnalyticContext> {
        AnalyticContext::from_model(&derive_couplings(&self.trap)?, &self.thermal, self.trap.omega_e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableDeviation {
    pub observable: String,
    pub max_abs_deviation: f64,
    pub at_time: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Deviations of `candidate` from `reference`, in units of ħω_e/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: String,
    pub candidate: String,
    pub alpha_r: f64,
    pub observables: Vec<ObservableDeviation>,
    pub pass: bool,
}

pub fn compare(reference: &Trajectory, candidate: &Trajectory, tolerance: f64) -> Result<ComparisonReport> {
    if reference.times() != candidate.times() {
        return Err(Error::Config(format!(
            "engines `{}` and `{}` ran on different time grids",
            reference.engine, candidate.engine
        )));
    }
    type Field = fn(&TrajectoryPoint) -> f64;
    let pick: [(&str, Field); 2] = [("Q1", |p| p.q1), ("Q2", |p| p.q2)];
    let observables: Vec<ObservableDeviation> = pick
        .iter()
        .map(|&(name, f)| {
            let (dev, at) = reference
                .points
                .iter()
                .zip(&candidate.points)
                .map(|(a, b)| ((f(a) - f(b)).abs(), a.t))
                .fold((0.0, reference.points[0].t), |best, x| if x.0 > best.0 { x } else { best });
            ObservableDeviation {
                observable: name.to_string(),
                max_abs_deviation: dev,
                at_time: at,
                tolerance,
                pass: dev <= tolerance,
            }
        })
        .collect();
    Ok(ComparisonReport {
        reference: reference.engine.clone(),
        candidate: candidate.engine.clone(),
        alpha_r: candidate.thermal.alpha_r,
        pass: observables.iter().all(|o| o.pass),
        observables,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Case {
    pub alpha_r: f64,
    /// One per requested engine, in request order.
    pub trajectories: Vec<Trajectory>,
    /// Every non-analytic engine against the analytic one.
    pub comparisons: Vec<ComparisonReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignPoint {
    pub t: f64,
    pub baseline_flux: f64,
    pub correlated_flux: f64,
    pub reversed: bool,
}

/// Sign of the correlated flux against the α = 0 baseline for one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    pub engine: String,
    /// First grid point after t_start.
    pub t_probe: f64,
    pub baseline_flux: f64,
    pub correlated_flux: f64,
    pub reversed: bool,
    pub sign_map: Vec<SignPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Result {
    pub baseline: Fig1Case,
    pub correlated: Fig1Case,
    pub reversal: Vec<ReversalReport>,
}

impl Fig1Result {
    pub fn comparisons(&self) -> impl Iterator<Item = &ComparisonReport> {
        self.baseline.comparisons.iter().chain(&self.correlated.comparisons)
    }

    pub fn pass(&self) -> bool {
        self.comparisons().all(|c| c.pass)
    }
}

fn reversal_report(baseline: &Trajectory, correlated: &Trajectory) -> ReversalReport {
    let sign_map: Vec<SignPoint> = baseline
        .points
        .iter()
        .zip(&correlated.points)
        .map(|(b, c)| {
            let (fb, fc) = (b.flux.unwrap_or(f64::NAN), c.flux.unwrap_or(f64::NAN));
            SignPoint { t: b.t, baseline_flux: fb, correlated_flux: fc, reversed: fb * fc < 0.0 }
        })
        .collect();
    let probe = sign_map[1.min(sign_map.len() - 1)];
    ReversalReport {
        engine: baseline.engine.clone(),
        t_probe: probe.t,
        baseline_flux: probe.baseline_flux,
        correlated_flux: probe.correlated_flux,
        reversed: probe.reversed,
        sign_map,
    }
}

/// Runs α = 0 and α = scenario α through every requested engine.
pub fn run_fig1(scenario: &Scenario, registry: &EngineRegistry) -> Result<Fig1Result> {
    let engines = scenario
        .engines
        .iter()
        .map(|name| registry.get(name))
        .collect::<Result<Vec<_>>>()?;
    let thermals = [scenario.thermal.with_alpha(0.0, scenario.thermal.alpha_theta), scenario.thermal];
    let jobs: Vec<(usize, usize)> = (0..2).flat_map(|c| (0..engines.len()).map(move |e| (c, e))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(c, e)| engines[e].run(&scenario.run_input(thermals[c])?))
        .collect::<Result<Vec<_>>>()?;

    let mut cases = Vec::with_capacity(2);
    for (c, trajectories) in runs.chunks(engines.len()).enumerate() {
        let mut comparisons = Vec::new();
        if let Some(reference) = trajectories.iter().find(|t| t.engine == "analytic") {
            for t in trajectories.iter().filter(|t| t.engine != "analytic") {
                comparisons.push(compare(reference, t, scenario.tolerance)?);
            }
        }
        cases.push(Fig1Case { alpha_r: thermals[c].alpha_r, trajectories: trajectories.to_vec(), comparisons });
    }
    let correlated = cases.pop().expect("two cases");
    let baseline = cases.pop().expect("two cases");
    let reversal = baseline
        .trajectories
        .iter()
        .zip(&correlated.trajectories)
        .map(|(b, c)| reversal_report(b, c))
        .collect();
    Ok(Fig1Result { baseline, correlated, reversal })
}

/// flux(t_i; axis_j) from the closed form, in (ħω_e/2)/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSurface {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub times: Vec<f64>,
    /// `flux[j][i]` at axis value j and time i.
    pub flux: Vec<Vec<f64>>,
    /// ρ_s(0) is PSD for column j.
    pub state_valid: Vec<bool>,
    /// r = 0 flux.
    pub baseline: Vec<f64>,
}

/// Sweeps r (printed α amplitude, Δθ fixed) or Δθ (r fixed) over the validity window.
pub fn run_fig2(scenario: &Scenario, sweep: &SweepSpec) -> Result<SweepSurface> {
    if sweep.steps == 0 {
        return Err(Error::Config("sweep needs at least one step".to_string()));
    }
    let ctx = scenario.analytic_context()?;
    let times = TimeGrid::new(0.0, window_for(ctx.omega_eff)?, sweep.time_points)?.times();
    let scale = ctx.coherence_scale();
    let axis_values = sweep.values();

    let columns = axis_values
        .par_iter()
        .map(|&v| -> Result<(Vec<f64>, bool)> {
            let (col_ctx, thermal) = match sweep.axis {
                SweepAxis::R => (
                    ctx.with_coherence(v * scale),
                    scenario.thermal.with_alpha(v, scenario.thermal.alpha_theta),
                ),
                SweepAxis::DeltaTheta => {
                    let c = ctx.with_delta_theta(v);
                    (c, scenario.thermal.with_alpha(scenario.thermal.alpha_r, c.theta))
                }
            };
            let valid = if thermal.alpha_r >= 0.0 {
                let rho = build_rho_s0(&thermal, scenario.trap.omega_e)?;
                validate_state(&rho, &thermal, scenario.trap.omega_e)?.psd
            } else {
                false
            };
            Ok((times.iter().map(|&t| heat_flux_norm(&col_ctx, t)).collect(), valid))
        })
        .collect::<Result<Vec<_>>>()?;

    let base_ctx = ctx.with_coherence(0.0);
    let baseline = times.iter().map(|&t| heat_flux_norm(&base_ctx, t)).collect();
    let (flux, state_valid) = columns.into_iter().unzip();
    Ok(SweepSurface { axis: sweep.axis, axis_values, times, flux, state_valid, baseline })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversalThreshold {
    pub t_probe: f64,
    /// Threshold on the physical coherence |⟨↑↓|ρ|↓↑⟩|.
    pub coherence: f64,
    /// Same threshold expressed as the printed α amplitude.
    pub alpha_amplitude: f64,
}

/// Smallest coherence whose flux at `t_probe` has the opposite sign to the
/// uncorrelated baseline, found by bisection on the closed form.
pub fn reversal_threshold(ctx: &AnalyticContext, t_probe: f64) -> Result<ReversalThreshold> {
    let window = window_for(ctx.omega_eff)?;
    if !(t_probe > 0.0 && t_probe < window) {
        return Err(Error::PreconditionViolated(format!(
            "probe time {t_probe} s outside (0, {window}) s"
        )));
    }
    if ctx.delta_theta().sin() == 0.0 {
        return Err(Error::NoReversalPossible("sin(delta_theta) = 0".to_string()));
    }
    let flux = |r: f64| heat_flux_norm(&ctx.with_coherence(r), t_probe);
    let scale = ctx.coherence_scale();
    let f0 = flux(0.0);
    if f0 == 0.0 {
        return Ok(ReversalThreshold { t_probe, coherence: 0.0, alpha_amplitude: 0.0 });
    }
    let mut hi = 1e-6;
    while flux(hi) * f0 > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoReversalPossible(format!(
                "correlations push the flux further from zero at t = {t_probe} s"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if flux(mid) * f0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ReversalThreshold { t_probe, coherence: hi, alpha_amplitude: hi / scale })
}

/// Reference Δθ used by the default sweeps.
pub const REFERENCE_DELTA_THETA: f64 = -FRAC_PI_2;
