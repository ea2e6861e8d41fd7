//! TOML run configuration. Frequencies carry explicit units and are
//! converted to rad/s here; nothing past this module sees cyclic Hz.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::engine::EngineRegistry;
use crate::error::{Error, Result};
use crate::experiment::{GridSpec, Scenario, SweepAxis, SweepSpec};
use crate::hilbert::FockCutoff;
use crate::model::TrapParams;
use crate::states::{Temperatures, ThermalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "Hz_cyclic")]
    HzCyclic,
    #[serde(rename = "rad_per_s")]
    RadPerS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    pub value: f64,
    pub unit: FrequencyUnit,
}

impl Frequency {
    pub fn rad_per_s(self) -> f64 {
        match self.unit {
            FrequencyUnit::HzCyclic => TAU * self.value,
            FrequencyUnit::RadPerS => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub omega_e: Frequency,
    pub delta: Frequency,
    pub mode_freqs: [Frequency; 2],
    pub rabi: [Frequency; 2],
    /// lamb_dicke[j][m] couples ion j to mode m.
    pub lamb_dicke: [[f64; 2]; 2],
    pub phases_rad: Option<[f64; 2]>,
    pub phases_deg: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSection {
    pub r: Option<f64>,
    pub theta_rad: Option<f64>,
    pub theta_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    pub t1_kelvin: Option<f64>,
    pub t2_kelvin: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    #[serde(default)]
    pub alpha: AlphaSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t_start: f64,
    pub t_end: Option<f64>,
    #[serde(default = "default_points")]
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { t_start: 0.0, t_end: None, n_points: default_points() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_engines")]
    pub engines: Vec<String>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub grid: GridSection,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            name: default_name(),
            cutoff: default_cutoff(),
            engines: default_engines(),
            tolerance: default_tolerance(),
            grid: GridSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub min: Option<f64>,
    pub max: Option<f64>,
    #[serde(default = "default_points_sweep")]
    pub steps: usize,
    #[serde(default = "default_points_sweep")]
    pub time_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_directory(), formats: default_formats() }
    }
}

fn default_points() -> usize {
    201
}
fn default_points_sweep() -> usize {
    101
}
fn default_name() -> String {
    "scenario".to_string()
}
fn default_cutoff() -> usize {
    FockCutoff::default().n_max()
}
fn default_engines() -> Vec<String> {
    vec!["analytic".to_string(), "numeric".to_string()]
}
fn default_tolerance() -> f64 {
    0.05
}
fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub trap: TrapSection,
    pub thermal: ThermalSection,
    #[serde(default)]
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back to a bare string.
fn parse_override_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Applies `a.b.c=value`; numeric segments index into arrays, missing tables are created.
pub fn apply_override(doc: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{spec}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(config_err(format!("override key `{key}` has an empty segment")));
    }
    let value = parse_override_value(raw.trim());
    let (last, parents) = path.split_last().expect("non-empty path");

    let mut cur: &mut Value = doc
        .entry(parents.first().copied().unwrap_or(last).to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    if parents.is_empty() {
        *cur = value;
        return Ok(());
    }
    for seg in parents[1..].iter().chain(std::iter::once(last)) {
        cur = match cur {
            Value::Table(t) => t.entry(seg.to_string()).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| config_err(format!("override `{key}`: `{seg}` is not an array index")))?;
                let len = a.len();
                a.get_mut(idx)
                    .ok_or_else(|| config_err(format!("override `{key}`: index {idx} out of range ({len})")))?
            }
            _ => return Err(config_err(format!("override `{key}`: `{seg}` is below a scalar"))),
        };
    }
    *cur = value;
    Ok(())
}

impl Config {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Config = Config::deserialize(doc).map_err(|e| config_err(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        let t = &self.thermal;
        let pairs = (t.t1_kelvin.is_some(), t.t2_kelvin.is_some(), t.gamma1.is_some(), t.gamma2.is_some());
        if pairs != (true, true, false, false) && pairs != (false, false, true, true) {
            return Err(config_err("thermal: give either t1_kelvin and t2_kelvin, or gamma1 and gamma2"));
        }
        if t.alpha.theta_rad.is_some() && t.alpha.theta_deg.is_some() {
            return Err(config_err("thermal.alpha: theta_rad and theta_deg are mutually exclusive"));
        }
        if self.trap.phases_rad.is_some() == self.trap.phases_deg.is_some() {
            return Err(config_err("trap: give exactly one of phases_rad or phases_deg"));
        }
        if let Some(s) = &self.sweep {
            let fixed = match s.axis {
                SweepAxis::R => t.alpha.r.is_some(),
                SweepAxis::DeltaTheta => t.alpha.theta_rad.is_some() || t.alpha.theta_deg.is_some(),
            };
            if fixed {
                return Err(config_err(format!(
                    "sweep.axis = \"{}\" but thermal.alpha fixes the same quantity",
                    s.axis.as_str()
                )));
            }
            if s.steps == 0 || s.time_points < 2 {
                return Err(config_err("sweep: steps must be >= 1 and time_points >= 2"));
            }
        }
        if self.run.grid.n_points < 2 {
            return Err(config_err("run.grid.n_points must be >= 2"));
        }
        if !(self.run.tolerance >= 0.0) {
            return Err(config_err("run.tolerance must be non-negative"));
        }
        if self.run.engines.is_empty() {
            return Err(config_err("run.engines must name at least one engine"));
        }
        let registry = EngineRegistry::with_builtin();
        for e in &self.run.engines {
            registry.get(e)?;
        }
        Ok(())
    }

    pub fn trap_params(&self) -> TrapParams {
        let t = &self.trap;
        let phases = match (t.phases_rad, t.phases_deg) {
            (Some(p), _) => p,
            (None, Some(d)) => [d[0].to_radians(), d[1].to_radians()],
            (None, None) => unreachable!("checked at load"),
        };
        TrapParams {
            omega_e: t.omega_e.rad_per_s(),
            delta: t.delta.rad_per_s(),
            mode_freqs: t.mode_freqs.map(Frequency::rad_per_s),
            rabi: t.rabi.map(Frequency::rad_per_s),
            lamb_dicke: t.lamb_dicke,
            phases,
        }
    }

    pub fn thermal_spec(&self) -> ThermalSpec {
        let t = &self.thermal;
        let temperatures = match (t.t1_kelvin, t.t2_kelvin, t.gamma1, t.gamma2) {
            (Some(t1), Some(t2), None, None) => Temperatures::Kelvin { t1, t2 },
            (None, None, Some(gamma1), Some(gamma2)) => Temperatures::Gamma { gamma1, gamma2 },
            _ => unreachable!("checked at load"),
        };
        let a = &t.alpha;
        ThermalSpec {
            temperatures,
            alpha_r: a.r.unwrap_or(0.0),
            alpha_theta: a.theta_rad.or(a.theta_deg.map(f64::to_radians)).unwrap_or(0.0),
        }
    }

    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep.as_ref().map(|s| {
            let (lo, hi) = match s.axis {
                SweepAxis::R => (0.0, 0.5),
                SweepAxis::DeltaTheta => (-PI, PI),
            };
            SweepSpec {
                axis: s.axis,
                min: s.min.unwrap_or(lo),
                max: s.max.unwrap_or(hi),
                steps: s.steps,
                time_points: s.time_points,
            }
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let thermal = self.thermal_spec();
        let trap = self.trap_params();
        thermal.gammas(trap.omega_e).map_err(|e| config_err(format!("thermal: {e}")))?;
        Ok(Scenario {
            name: self.run.name.clone(),
            trap,
            thermal,
            grid: GridSpec {
                t_start: self.run.grid.t_start,
                t_end: self.run.grid.t_end,
                n_points: self.run.grid.n_points,
            },
            cutoff: FockCutoff(self.run.cutoff),
            engines: self.run.engines.clone(),
            sweep: self.sweep_spec(),
            tolerance: self.run.tolerance,
        })
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}
