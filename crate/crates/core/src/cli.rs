//! Command-line front end. Every command is a pure function of the config
//! file and flags; output files are byte-for-byte reproducible.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analytic::window_for;
use crate::config::{Config, OutputFormat};
use crate::dynamics::Trajectory;
use crate::engine::EngineRegistry;
use crate::error::{Error, Result};
use crate::experiment::{run_fig1, run_fig2, ComparisonReport, Fig1Result, Scenario, SweepSurface};
use crate::model::derive_couplings;
use crate::states::{build_rho_s0, validate_state, StateReport};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        if cfg!(test) {
            println!($($arg)*);
        } else {
            use std::io::Write as _;
            let _ = writeln!(std::io::stdout().lock(), $($arg)*);
        }
    }};
}

/// Exit code for a failed comparison.
pub const EXIT_COMPARISON_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ion-heatflow", version, about = "Two-ion heat-flow reversal simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print derived couplings and regime warnings.
    Params(CommonArgs),
    /// Write one trajectory CSV per configured engine.
    Evolve(CommonArgs),
    /// Write the flux surface for the configured sweep axis.
    Sweep(CommonArgs),
    /// Compare engines on the uncorrelated and correlated cases.
    Compare(CommonArgs),
    /// Check positivity of the configured initial state.
    ValidateState(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (overrides output.directory).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Dotted-key override, e.g. thermal.alpha.r=0.1 (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Comparison tolerance in units of hbar*omega_e/2 (overrides run.tolerance).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
}

struct Context {
    config: Config,
    scenario: Scenario,
    out_dir: PathBuf,
}

impl Context {
    fn load(args: &CommonArgs) -> Result<Self> {
        let config = Config::load(&args.config, &args.overrides)?;
        let mut scenario = config.scenario()?;
        if let Some(tol) = args.tolerance {
            if !(tol >= 0.0) {
                return Err(Error::Config(format!("--tolerance must be non-negative, got {tol}")));
            }
            scenario.tolerance = tol;
        }
        let out_dir = args.out.clone().unwrap_or_else(|| config.output.directory.clone());
        Ok(Context { config, scenario, out_dir })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<Option<PathBuf>> {
        if !self.config.wants(OutputFormat::Json) {
            return Ok(None);
        }
        self.write(name, &(to_json(value) + "\n")).map(Some)
    }

    fn write_csv(&self, name: &str, contents: &str) -> Result<Option<PathBuf>> {
        if !self.config.wants(OutputFormat::Csv) {
            return Ok(None);
        }
        self.write(name, contents).map(Some)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

/// 17 significant digits, round-trip exact.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

/// '#'-prefixed parameter snapshot shared by every CSV.
fn provenance(command: &str, scenario: &Scenario) -> Result<String> {
    let p = &scenario.trap;
    let c = derive_couplings(p)?;
    let (g1, g2) = scenario.thermal.gammas(p.omega_e)?;
    let mut h = String::new();
    let _ = writeln!(h, "# ion-heatflow {} {command}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(h, "# scenario: {}", scenario.name);
    let _ = writeln!(h, "# omega_e_rad_per_s: {}", num(p.omega_e));
    let _ = writeln!(h, "# delta_rad_per_s: {}", num(p.delta));
    let _ = writeln!(h, "# mode_freqs_rad_per_s: {} {}", num(p.mode_freqs[0]), num(p.mode_freqs[1]));
    let _ = writeln!(h, "# rabi_rad_per_s: {} {}", num(p.rabi[0]), num(p.rabi[1]));
    let eta = p.lamb_dicke;
    let _ = writeln!(
        h,
        "# lamb_dicke: {} {} {} {}",
        num(eta[0][0]),
        num(eta[0][1]),
        num(eta[1][0]),
        num(eta[1][1])
    );
    let _ = writeln!(h, "# phases_rad: {} {}", num(p.phases[0]), num(p.phases[1]));
    let _ = writeln!(h, "# gamma1: {}", num(g1));
    let _ = writeln!(h, "# gamma2: {}", num(g2));
    let _ = writeln!(h, "# alpha_r: {}", num(scenario.thermal.alpha_r));
    let _ = writeln!(h, "# alpha_theta_rad: {}", num(scenario.thermal.alpha_theta));
    let _ = writeln!(h, "# J_rad_per_s: {}", num(c.j_total));
    let _ = writeln!(h, "# V_plus_rad_per_s: {}", num(c.v_plus));
    let _ = writeln!(h, "# V_minus_rad_per_s: {}", num(c.v_minus));
    let _ = writeln!(h, "# Omega_eff_rad_per_s: {}", num(c.omega_eff));
    let _ = writeln!(h, "# fock_cutoff: {}", scenario.cutoff.n_max());
    Ok(h)
}

pub fn trajectory_csv(header: &str, traj: &Trajectory) -> String {
    let mut s = String::from(header);
    let _ = writeln!(s, "# engine: {}", traj.engine);
    let _ = writeln!(s, "# energy_unit_J: {}", num(traj.energy_unit));
    s.push_str("t_s,two_Omega_t_rad,Q1_norm,Q2_norm,Q12_norm,flux_norm,Q1_J,Q2_J,n1,n2,top_fock_pop\n");
    for p in &traj.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(p.t),
            num(2.0 * traj.omega_eff * p.t),
            num(p.q1),
            num(p.q2),
            num(p.q12),
            opt(p.flux),
            num(p.q1 * traj.energy_unit),
            num(p.q2 * traj.energy_unit),
            opt(p.n1),
            opt(p.n2),
            opt(p.top_fock_population),
        );
    }
    s
}

pub fn sweep_csv(header: &str, surface: &SweepSurface) -> String {
    let mut s = String::from(header);
    let _ = writeln!(s, "# axis: {}", surface.axis.as_str());
    s.push_str("axis_value,t_s,flux_norm,state_valid\n");
    for (j, v) in surface.axis_values.iter().enumerate() {
        for (i, t) in surface.times.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", num(*v), num(*t), num(surface.flux[j][i]), surface.state_valid[j]);
        }
    }
    s
}

fn cmd_params(ctx: &Context) -> Result<i32> {
    let p = &ctx.scenario.trap;
    let c = derive_couplings(p)?;
    let t_max = window_for(c.omega_eff).ok();
    say!("Trap parameters (rad/s)");
    say!("  omega_e      = {:.6e}", p.omega_e);
    say!("  delta        = {:.6e}", p.delta);
    say!("  mode_freqs   = {:.6e}, {:.6e}", p.mode_freqs[0], p.mode_freqs[1]);
    say!("  rabi         = {:.6e}, {:.6e}", p.rabi[0], p.rabi[1]);
    say!("  lamb_dicke   = {:?}", p.lamb_dicke);
    say!("  phases (rad) = {:?}", p.phases);
    say!("Derived couplings (rad/s)");
    for m in 0..2 {
        say!("  g[mode {}]    = {:.6}, {:.6}", m + 1, c.g[m][0], c.g[m][1]);
    }
    for j in 0..2 {
        say!("  V[ion {}]     = {:.6}, {:.6}", j + 1, c.v[j][0], c.v[j][1]);
    }
    say!("  J12          = {:.6}", c.j12);
    say!("  J21          = {:.6}", c.j21);
    say!("  J            = {:.6}", c.j_total);
    say!("  V+           = {:.6}", c.v_plus);
    say!("  V-           = {:.6}", c.v_minus);
    say!("  Omega_eff    = {:.6}", c.omega_eff);
    match t_max {
        Some(t) => say!("  t_max        = {t:.6e} s"),
        None => say!("  t_max        = unbounded (Omega_eff = 0)"),
    }
    let warnings = p.validity_warnings();
    if warnings.is_empty() {
        say!("Regime: no warnings");
    }
    for w in &warnings {
        say!("warning: {w}");
    }

    #[derive(Serialize)]
    struct ParamsReport<'a> {
        scenario: &'a str,
        trap: &'a crate::model::TrapParams,
        couplings: &'a crate::model::DerivedCouplings,
        t_max_s: Option<f64>,
        warnings: &'a [String],
    }
    ctx.write_json(
        "params.json",
        &ParamsReport { scenario: &ctx.scenario.name, trap: p, couplings: &c, t_max_s: t_max, warnings: &warnings },
    )?;
    Ok(0)
}

fn cmd_evolve(ctx: &Context) -> Result<i32> {
    let registry = EngineRegistry::with_builtin();
    let input = ctx.scenario.run_input(ctx.scenario.thermal)?;
    let header = provenance("evolve", &ctx.scenario)?;
    for name in &ctx.scenario.engines {
        let traj = registry
            .get(name)?
            .run(&input)
            .map_err(|e| with_context(e, &format!("engine `{name}`")))?;
        if let Some(path) = ctx.write_csv(&format!("trajectory_{name}.csv"), &trajectory_csv(&header, &traj))? {
            say!("wrote {}", path.display());
        }
    }
    Ok(0)
}

fn cmd_sweep(ctx: &Context) -> Result<i32> {
    let spec = ctx
        .scenario
        .sweep
        .ok_or_else(|| Error::Config("the sweep command needs a [sweep] section".to_string()))?;
    let surface = run_fig2(&ctx.scenario, &spec)?;
    let header = provenance("sweep", &ctx.scenario)?;
    let name = format!("sweep_{}.csv", spec.axis.as_str());
    if let Some(path) = ctx.write_csv(&name, &sweep_csv(&header, &surface))? {
        say!("wrote {}", path.display());
    }
    Ok(0)
}

#[derive(Serialize)]
struct ReversalSummary {
    engine: String,
    t_probe: f64,
    baseline_flux: f64,
    correlated_flux: f64,
    reversed: bool,
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    scenario: &'a str,
    tolerance: f64,
    pass: bool,
    comparisons: Vec<&'a ComparisonReport>,
    reversal: Vec<ReversalSummary>,
}

fn summarize<'a>(scenario: &'a Scenario, res: &'a Fig1Result) -> CompareSummary<'a> {
    CompareSummary {
        scenario: &scenario.name,
        tolerance: scenario.tolerance,
        pass: res.pass(),
        comparisons: res.comparisons().collect(),
        reversal: res
            .reversal
            .iter()
            .map(|r| ReversalSummary {
                engine: r.engine.clone(),
                t_probe: r.t_probe,
                baseline_flux: r.baseline_flux,
                correlated_flux: r.correlated_flux,
                reversed: r.reversed,
            })
            .collect(),
    }
}

fn cmd_compare(ctx: &Context) -> Result<i32> {
    let s = &ctx.scenario;
    if !s.engines.iter().any(|e| e == "analytic") || s.engines.len() < 2 {
        return Err(Error::Config(
            "compare needs `analytic` and at least one other engine in run.engines".to_string(),
        ));
    }
    let res = run_fig1(s, &EngineRegistry::with_builtin())?;
    let header = provenance("compare", s)?;
    for (label, case) in [("baseline", &res.baseline), ("correlated", &res.correlated)] {
        for traj in &case.trajectories {
            ctx.write_csv(&format!("fig1_{label}_{}.csv", traj.engine), &trajectory_csv(&header, traj))?;
        }
    }
    for r in &res.reversal {
        let mut csv = header.clone();
        let _ = writeln!(csv, "# engine: {}", r.engine);
        csv.push_str("t_s,baseline_flux_norm,correlated_flux_norm,reversed\n");
        for p in &r.sign_map {
            let _ = writeln!(csv, "{},{},{},{}", num(p.t), num(p.baseline_flux), num(p.correlated_flux), p.reversed);
        }
        ctx.write_csv(&format!("reversal_{}.csv", r.engine), &csv)?;
    }
    let summary = summarize(s, &res);
    say!("{}", to_json(&summary));
    ctx.write_json("comparison.json", &summary)?;
    Ok(if summary.pass { 0 } else { EXIT_COMPARISON_FAILED })
}

fn cmd_validate_state(ctx: &Context) -> Result<i32> {
    let s = &ctx.scenario;
    let rho = build_rho_s0(&s.thermal, s.trap.omega_e)?;
    let report: StateReport = validate_state(&rho, &s.thermal, s.trap.omega_e)?;
    say!("{}", to_json(&report));
    ctx.write_json("state.json", &report)?;
    if report.psd {
        Ok(0)
    } else {
        eprintln!("error: initial state is not positive semidefinite (min eigenvalue {:e})", report.min_eigenvalue);
        Ok(2)
    }
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::PreconditionViolated(m) => Error::PreconditionViolated(format!("{what}: {m}")),
        Error::InvalidState(m) => Error::InvalidState(format!("{what}: {m}")),
        other => other,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let (args, f): (&CommonArgs, fn(&Context) -> Result<i32>) = match &cli.command {
        Command::Params(a) => (a, cmd_params),
        Command::Evolve(a) => (a, cmd_evolve),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Compare(a) => (a, cmd_compare),
        Command::ValidateState(a) => (a, cmd_validate_state),
    };
    f(&Context::load(args)?)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return 1;
            }
            say!("{e}");
            return 0;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
