//! Command-line front end: configs, telemetry files and reports.

use crate::attitude_math::{Mat3, Mrp};
use crate::baseline_smc::SmcParams;
use crate::dynamics::{DisturbanceModel, InertiaMatrix, StepConfig};
use crate::simharness::{
    compare_runs, compute_metrics, monitor_invariants, nearest_equilibrium, run_simulation,
    Comparison, Controller, Metrics, MonitorReport, RunSummary, Scenario, SimError, SimRecord,
};
use crate::ufsmc::UfsmcParams;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable that replaces the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MRP_SIM_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "mrp_sim_out";

pub const CSV_HEADER: &str =
    "t,se1,se2,se3,we1,we2,we3,theta,u1,u2,u3,s1,s2,s3,rho,g,h,gamma2,v,V1,V2,roll,pitch,yaw";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown scenario '{0}' (expected A, B or a path to a JSON config)")]
    UnknownScenario(String),
    #[error("config parse error at '{path}': {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for '{key}': {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("nothing to write: the run produced no records")]
    EmptyRecords,
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceConfig {
    scale: Option<f64>,
    freq: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UfsmcConfig {
    alpha: Option<f64>,
    gamma1: Option<f64>,
    eps1: Option<f64>,
    eps2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmcConfig {
    k: Option<f64>,
    lambda: Option<f64>,
    eps: Option<f64>,
}

/// On-disk scenario config. Every key is optional; absent keys keep the base
/// scenario's values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    base: Option<String>,
    name: Option<String>,
    sigma0: Option<[f64; 3]>,
    sigma_d: Option<[f64; 3]>,
    #[serde(rename = "J_diag")]
    j_diag: Option<[f64; 3]>,
    #[serde(rename = "J_full")]
    j_full: Option<[[f64; 3]; 3]>,
    disturbance: Option<DisturbanceConfig>,
    dt: Option<f64>,
    duration: Option<f64>,
    ufsmc: Option<UfsmcConfig>,
    smc: Option<SmcConfig>,
}

/// A validated scenario together with both controllers' gains.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub ufsmc: UfsmcParams,
    pub smc: SmcParams,
}

impl SimConfig {
    pub fn builtin(name: &str) -> Result<Self, CliError> {
        Scenario::builtin(name)
            .map(Self::from_scenario)
            .ok_or_else(|| CliError::UnknownScenario(name.to_owned()))
    }

    fn from_scenario(scenario: Scenario) -> Self {
        Self {
            scenario,
            ufsmc: UfsmcParams::default(),
            smc: SmcParams::default(),
        }
    }
}

fn invalid(key: &str, message: impl ToString) -> CliError {
    CliError::Invalid {
        key: key.to_owned(),
        message: message.to_string(),
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn deserialize_file(text: &str) -> Result<FileConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parses a JSON config on top of `base`.
///
/// Recognised keys: `name`, `sigma0`, `sigma_d`, `J_diag` or `J_full`,
/// `disturbance {scale, freq}`, `dt`, `duration`,
/// `ufsmc {alpha, gamma1, eps1, eps2}`, `smc {k, lambda, eps}`.
pub fn parse_config(text: &str, base: &SimConfig) -> Result<SimConfig, CliError> {
    apply_file_config(deserialize_file(text)?, base.clone())
}

fn apply_file_config(file: FileConfig, mut cfg: SimConfig) -> Result<SimConfig, CliError> {
    let sc = &mut cfg.scenario;
    if let Some(name) = file.name {
        sc.name = name;
    }
    if let Some(v) = file.sigma0 {
        sc.sigma0 = Mrp::from(v);
    }
    if let Some(v) = file.sigma_d {
        sc.sigma_d = Mrp::from(v);
    }
    match (file.j_diag, file.j_full) {
        (Some(_), Some(_)) => {
            return Err(invalid("J_diag", "give either J_diag or J_full, not both"))
        }
        (Some(d), None) => {
            sc.inertia =
                InertiaMatrix::diagonal(d[0], d[1], d[2]).map_err(|e| invalid("J_diag", e))?
        }
        (None, Some(m)) => {
            let j = Mat3::from_fn(|r, c| m[r][c]);
            sc.inertia = InertiaMatrix::new(j).map_err(|e| invalid("J_full", e))?
        }
        (None, None) => {}
    }
    if let Some(d) = file.disturbance {
        let scale = finite("disturbance.scale", d.scale.unwrap_or(sc.disturbance.scale))?;
        let freq = finite(
            "disturbance.freq",
            d.freq.unwrap_or(sc.disturbance.frequency),
        )?;
        sc.disturbance = DisturbanceModel::with_scale(scale, freq);
    }
    if file.dt.is_some() || file.duration.is_some() {
        let dt = file.dt.unwrap_or(sc.step.dt());
        let duration = file.duration.unwrap_or(sc.step.duration());
        let key = if file.dt.is_some() { "dt" } else { "duration" };
        sc.step = StepConfig::new(dt, duration).map_err(|e| invalid(key, e))?;
    }
    if let Some(u) = file.ufsmc {
        let p = &mut cfg.ufsmc;
        p.alpha = u.alpha.unwrap_or(p.alpha);
        p.gamma1 = u.gamma1.unwrap_or(p.gamma1);
        p.epsilon1 = u.eps1.unwrap_or(p.epsilon1);
        p.epsilon2 = u.eps2.unwrap_or(p.epsilon2);
    }
    if let Some(s) = file.smc {
        let p = &mut cfg.smc;
        p.k = s.k.unwrap_or(p.k);
        p.lambda = s.lambda.unwrap_or(p.lambda);
        p.epsilon = s.eps.unwrap_or(p.epsilon);
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &SimConfig) -> Result<(), CliError> {
    let sc = &cfg.scenario;
    for (key, v) in [("sigma0", &sc.sigma0), ("sigma_d", &sc.sigma_d)] {
        if !v.is_finite() {
            return Err(invalid(key, "attitude must be finite"));
        }
    }
    sc.validate().map_err(|e| invalid("scenario", e))?;
    let u = &cfg.ufsmc;
    let s = &cfg.smc;
    for (key, v) in [
        ("ufsmc.alpha", u.alpha),
        ("ufsmc.gamma1", u.gamma1),
        ("ufsmc.eps1", u.epsilon1),
        ("ufsmc.eps2", u.epsilon2),
        ("smc.k", s.k),
        ("smc.eps", s.epsilon),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(key, format!("{v} must be positive and finite")));
        }
    }
    if !(s.lambda < 0.0 && s.lambda.is_finite()) {
        return Err(invalid(
            "smc.lambda",
            format!("{} must be negative", s.lambda),
        ));
    }
    u.validate(&sc.disturbance)
        .map_err(|e| invalid("ufsmc.gamma1", e))?;
    s.validate().map_err(|e| invalid("smc", e))
}

/// Loads a config file. The base scenario comes from its `base` key (default A).
pub fn load_config_file(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = deserialize_file(&text)?;
    let base = SimConfig::builtin(file.base.as_deref().unwrap_or("A"))?;
    apply_file_config(file, base)
}

/// Formats with 9 significant digits, fixed-point for moderate exponents.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn csv_row(r: &SimRecord) -> String {
    let d = &r.diag;
    let fields = [
        r.t,
        r.sigma_e.0.x,
        r.sigma_e.0.y,
        r.sigma_e.0.z,
        r.omega_e.x,
        r.omega_e.y,
        r.omega_e.z,
        r.theta,
        r.u.x,
        r.u.y,
        r.u.z,
        d.s.x,
        d.s.y,
        d.s.z,
        d.rho,
        d.g,
        d.h,
        d.gamma2,
        r.v,
        r.v1,
        r.v2,
        r.euler.roll,
        r.euler.pitch,
        r.euler.yaw,
    ];
    fields
        .iter()
        .map(|&x| format_sig9(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_csv<W: Write>(records: &[SimRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", csv_row(r))?;
    }
    out.flush()
}

pub fn emit_csv(records: &[SimRecord], path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(records, BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

struct Panel {
    file: &'static str,
    title: &'static str,
    y_label: &'static str,
    columns: &'static [&'static str],
    values: fn(&SimRecord) -> Vec<f64>,
}

const PANELS: [Panel; 4] = [
    Panel {
        file: "theta.dat",
        title: "Rotation angle",
        y_label: "theta [rad]",
        columns: &["t", "theta"],
        values: |r| vec![r.theta],
    },
    Panel {
        file: "omega.dat",
        title: "Angular velocity error",
        y_label: "omega_e [rad/s]",
        columns: &["t", "we1", "we2", "we3"],
        values: |r| r.omega_e.iter().copied().collect(),
    },
    Panel {
        file: "euler.dat",
        title: "Euler angles (3-2-1)",
        y_label: "angle [rad]",
        columns: &["t", "roll", "pitch", "yaw"],
        values: |r| vec![r.euler.roll, r.euler.pitch, r.euler.yaw],
    },
    Panel {
        file: "torque.dat",
        title: "Control torque",
        y_label: "u [N m]",
        columns: &["t", "u1", "u2", "u3"],
        values: |r| r.u.iter().copied().collect(),
    },
];

/// Writes one whitespace-separated data file per panel plus `manifest.json`
/// into `dir`. Returns the written paths, manifest last.
pub fn emit_plot_data(records: &[SimRecord], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if records.is_empty() {
        return Err(CliError::EmptyRecords);
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::with_capacity(PANELS.len() + 1);
    let mut manifest = Vec::with_capacity(PANELS.len());
    for panel in &PANELS {
        let path = dir.join(panel.file);
        let write = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "# {}", panel.columns.join(" "))?;
            for r in records {
                let row: Vec<String> = std::iter::once(r.t)
                    .chain((panel.values)(r))
                    .map(format_sig9)
                    .collect();
                writeln!(w, "{}", row.join(" "))?;
            }
            w.flush()
        };
        write().map_err(|e| CliError::io(&path, e))?;
        manifest.push(serde_json::json!({
            "file": panel.file,
            "title": panel.title,
            "x_label": "t [s]",
            "y_label": panel.y_label,
            "columns": panel.columns,
        }));
        written.push(path);
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&serde_json::json!({ "panels": manifest }))
        .expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// `--out` wins over the environment, which wins over the default.
pub fn resolve_output_dir(flag: Option<PathBuf>, env: Option<OsString>) -> PathBuf {
    flag.or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Debug, Parser)]
#[command(
    name = "mrp-sim",
    version,
    about = "Rest-to-rest MRP attitude maneuver simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write CSV telemetry and plot data.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = ControllerChoice::Ufsmc)]
        controller: ControllerChoice,
        /// Output directory (default: $MRP_SIM_OUT or ./mrp_sim_out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both controllers on one scenario and print a comparison table.
    Compare {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the invariant monitors on both built-in scenarios.
    Verify {
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerChoice {
    Ufsmc,
    Smc,
    Both,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Built-in scenario (A or B) or path to a JSON config.
    #[arg(long, default_value = "A")]
    scenario: String,
    /// JSON config applied on top of the chosen scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long = "smc-eps")]
    smc_eps: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<SimConfig, CliError> {
        let mut cfg = match Scenario::builtin(&self.scenario) {
            Some(s) => SimConfig::from_scenario(s),
            None if Path::new(&self.scenario).is_file() => {
                load_config_file(Path::new(&self.scenario))?
            }
            None => return Err(CliError::UnknownScenario(self.scenario.clone())),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg = parse_config(&text, &cfg)?;
        }
        let overrides = FileConfig {
            dt: self.dt,
            duration: self.duration,
            ufsmc: Some(UfsmcConfig {
                alpha: self.alpha,
                gamma1: self.gamma1,
                eps1: self.eps1,
                eps2: self.eps2,
            }),
            smc: Some(SmcConfig {
                k: self.k,
                lambda: self.lambda,
                eps: self.smc_eps,
            }),
            ..FileConfig::default()
        };
        apply_file_config(overrides, cfg)
    }
}

/// Completed run with its metrics.
pub struct Run {
    pub controller: Controller,
    pub records: Vec<SimRecord>,
    pub metrics: Metrics,
}

/// Runs and scores one controller. The metric target is the equilibrium the
/// run actually settles toward.
pub fn execute(scenario: &Scenario, controller: Controller) -> Result<Run, SimError> {
    let records = run_simulation(scenario, &controller)?;
    let last = records.last().ok_or(SimError::EmptyRecords)?;
    let metrics = compute_metrics(&records, nearest_equilibrium(last.theta))?;
    Ok(Run {
        controller,
        records,
        metrics,
    })
}

/// Runs the given controllers concurrently, preserving order.
pub fn execute_all(scenario: &Scenario, controllers: &[Controller]) -> Result<Vec<Run>, SimError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = controllers
            .iter()
            .map(|&c| scope.spawn(move || execute(scenario, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

fn write_metrics(out: &mut dyn Write, scenario: &str, run: &Run) -> io::Result<()> {
    let m = &run.metrics;
    let conv = m
        .convergence_time
        .map_or_else(|| "unconverged".to_owned(), |t| format!("{t:.3} s"));
    writeln!(
        out,
        "scenario {scenario} / controller {}",
        run.controller.name()
    )?;
    writeln!(out, "  theta(0)         {:.6} rad", m.theta_initial)?;
    writeln!(out, "  theta(final)     {:.6} rad", m.theta_final)?;
    writeln!(out, "  theta_target     {:.6} rad", m.theta_target)?;
    writeln!(out, "  convergence_time {conv}")?;
    writeln!(out, "  total_rotation   {:.6} rad", m.total_rotation)?;
    writeln!(out, "  effort           {:.6} N m s", m.effort)?;
    writeln!(out, "  max_torque       {:.6} N m", m.max_torque)?;
    writeln!(out, "  unwound          {}", m.unwound)
}

pub fn write_comparison(out: &mut dyn Write, cmp: &Comparison) -> io::Result<()> {
    writeln!(
        out,
        "scenario {}: {} vs {}",
        cmp.scenario, cmp.controller_a, cmp.controller_b
    )?;
    writeln!(
        out,
        "{:<18} {:>14} {:>14} {:>14} {:>10}",
        "metric", cmp.controller_a, cmp.controller_b, "delta", "ratio"
    )?;
    for row in &cmp.rows {
        let cell = |v: f64| {
            if v.is_finite() {
                format!("{v:.6}")
            } else {
                "-".to_owned()
            }
        };
        let ratio = row
            .ratio
            .filter(|r| r.is_finite())
            .map_or_else(|| "-".to_owned(), |r| format!("{r:.4}"));
        writeln!(
            out,
            "{:<18} {:>14} {:>14} {:>14} {:>10}",
            row.metric,
            cell(row.a),
            cell(row.b),
            cell(row.delta),
            ratio
        )?;
    }
    writeln!(
        out,
        "{:<18} {:>14} {:>14}",
        "unwound", cmp.unwound_a, cmp.unwound_b
    )
}

pub fn write_monitor_report(
    out: &mut dyn Write,
    scenario: &str,
    r: &MonitorReport,
) -> io::Result<()> {
    writeln!(out, "scenario {scenario} / ufsmc monitors")?;
    writeln!(
        out,
        "  lemma1_max_residual          {:.3e} rad/s ({})",
        r.lemma1_max_residual,
        if r.lemma1_ok() { "ok" } else { "VIOLATED" }
    )?;
    writeln!(out, "  reaching_time                {} s", r.reaching_time)?;
    writeln!(out, "  v2_violations                {}", r.v2_violations)?;
    writeln!(
        out,
        "  v1_violations_after_reaching {}",
        r.v1_violations_after_reaching
    )?;
    writeln!(
        out,
        "  theta_monotonicity_violations {}",
        r.theta_monotonicity_violations
    )
}

fn simulate(
    cfg: &SimConfig,
    choice: ControllerChoice,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let controllers: Vec<Controller> = match choice {
        ControllerChoice::Ufsmc => vec![Controller::Ufsmc(cfg.ufsmc)],
        ControllerChoice::Smc => vec![Controller::Smc(cfg.smc)],
        ControllerChoice::Both => vec![Controller::Ufsmc(cfg.ufsmc), Controller::Smc(cfg.smc)],
    };
    let runs = execute_all(&cfg.scenario, &controllers)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for run in &runs {
        let stem = format!("{}_{}", cfg.scenario.name, run.controller.name());
        let csv = dir.join(format!("{stem}.csv"));
        emit_csv(&run.records, &csv)?;
        emit_plot_data(&run.records, &dir.join(&stem))?;
        write_metrics(out, &cfg.scenario.name, run)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        writeln!(out, "  csv              {}", csv.display())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    Ok(())
}

fn compare(cfg: &SimConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let runs = execute_all(
        &cfg.scenario,
        &[Controller::Ufsmc(cfg.ufsmc), Controller::Smc(cfg.smc)],
    )?;
    let summary = |r: &Run| RunSummary {
        scenario: cfg.scenario.name.clone(),
        controller: r.controller.name().to_owned(),
        metrics: r.metrics,
    };
    let cmp = compare_runs(&summary(&runs[0]), &summary(&runs[1]))?;
    write_comparison(out, &cmp).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Returns the number of violated checks.
fn verify(dt: Option<f64>, duration: Option<f64>, out: &mut dyn Write) -> Result<usize, CliError> {
    let stdout_err = |e| CliError::io(Path::new("<stdout>"), e);
    let mut violations = 0;
    for name in ["A", "B"] {
        let base = SimConfig::builtin(name)?;
        let cfg = apply_file_config(
            FileConfig {
                dt,
                duration,
                ..FileConfig::default()
            },
            base,
        )?;
        let records = run_simulation(&cfg.scenario, &Controller::Ufsmc(cfg.ufsmc))?;
        let report = monitor_invariants(&records, &cfg.ufsmc);
        write_monitor_report(out, name, &report).map_err(stdout_err)?;
        violations += report.total_violations();

        // rest start: v(0) = −α·h(0) and V₂(0) = ½v(0)²
        let first = &records[0];
        let v0_ok = (first.v + cfg.ufsmc.alpha * first.diag.h).abs() < 1e-12
            && (first.v2 - 0.5 * first.v * first.v).abs() < 1e-12;
        writeln!(
            out,
            "  initial v(0) = {:.9}, identities {}",
            first.v,
            if v0_ok { "ok" } else { "VIOLATED" }
        )
        .map_err(stdout_err)?;
        violations += usize::from(!v0_ok);
    }
    Ok(violations)
}

/// Entry point shared by the binary and tests. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };

    let result = match cli.command {
        Command::Simulate {
            run,
            controller,
            out: dir,
        } => run.resolve().and_then(|cfg| {
            let dir = resolve_output_dir(dir, std::env::var_os(OUTPUT_DIR_ENV));
            simulate(&cfg, controller, &dir, out)
        }),
        Command::Compare { run } => run.resolve().and_then(|cfg| compare(&cfg, out)),
        Command::Verify { dt, duration } => match verify(dt, duration, out) {
            Ok(0) => Ok(()),
            Ok(n) => {
                let _ = writeln!(err, "verify: {n} invariant check(s) violated");
                return EXIT_VIOLATION;
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
