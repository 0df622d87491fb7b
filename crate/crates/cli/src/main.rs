//! `solenoid`: evaluate cross sections, trajectories and scans to CSV or JSON.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use solenoid_core::classical::{self, FieldOrientation};
use solenoid_core::climit;
use solenoid_core::curve::DcsCurve;
use solenoid_core::export;
use solenoid_core::quantum::QuantumSetup;
use solenoid_core::trajectory;
use solenoid_core::verify::{self, VerifyOptions};

const OUTPUT_DIR_ENV: &str = "SOLENOID_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "solenoid",
    version,
    about = "Electron scattering by a finite-radius solenoid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; `verify` defaults to json, everything else to csv
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output file. Relative paths resolve against $SOLENOID_OUTPUT_DIR when set.
    /// With csv output, any summary goes next to it with a .json extension.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classical cross section on a uniform angle grid
    ClassicalDcs(ClassicalArgs),
    /// First-order quantum cross section on a uniform angle grid
    QuantumDcs(QuantumArgs),
    /// Zero-radius (Aharonov-Bohm) cross section on a uniform angle grid
    AbDcs(QuantumArgs),
    /// Path of a single trajectory and its deflection
    Trajectory(TrajectoryArgs),
    /// Monte Carlo histogram of deflections over uniform impact parameters
    OracleDcs(OracleArgs),
    /// Monte Carlo histogram scored bin by bin against the classical cross section
    CompareClassical(OracleArgs),
    /// Envelope of the quantum cross section along the classical-limit scaling
    ScalingScan(ScanArgs),
    /// Run the invariant suite
    Verify(VerifyArgs),
}

#[derive(Args, Serialize)]
struct GridArgs {
    /// Lowest angle, radians
    #[arg(long, default_value_t = -PI, allow_hyphen_values = true)]
    theta_min: f64,
    /// Highest angle, radians
    #[arg(long, default_value_t = PI, allow_hyphen_values = true)]
    theta_max: f64,
    /// Grid points before singular angles are dropped
    #[arg(long, default_value_t = 256)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Orientation {
    Standard,
    Mirrored,
}

#[derive(Args, Serialize)]
struct ClassicalArgs {
    /// Larmor radius over R
    #[arg(long)]
    rho_l: f64,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    /// Sense of rotation of the interior orbit
    #[arg(long, value_enum, default_value = "standard")]
    orientation: Orientation,
}

#[derive(Args, Serialize)]
struct QuantumArgs {
    /// pR/hbar
    #[arg(long)]
    s_p: f64,
    /// e Phi / (hbar c)
    #[arg(long)]
    s_phi: f64,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    /// Excluded cone around theta = 0, radians
    #[arg(long, default_value_t = solenoid_core::quantum::DEFAULT_FORWARD_EPS)]
    forward_eps: f64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Arc,
    Rk4,
}

#[derive(Args, Serialize)]
struct TrajectoryArgs {
    /// Larmor radius over R
    #[arg(long)]
    rho_l: f64,
    /// Impact parameter in units of R
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, value_enum, default_value = "arc")]
    method: Method,
    /// RK4 step, as a fraction of a radian of arc
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Points on the interior arc (arc method)
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Length of the straight legs drawn outside the solenoid
    #[arg(long, default_value_t = 2.0)]
    leg: f64,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    /// Larmor radius over R
    #[arg(long)]
    rho_l: f64,
    #[arg(long, default_value_t = 10_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 128)]
    bins: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Bins this close to 0, ±pi or a caustic are not scored (compare-classical)
    #[arg(long, default_value_t = 3)]
    margin_bins: usize,
}

#[derive(Args, Serialize)]
struct ScanArgs {
    /// Larmor radius over R
    #[arg(long)]
    rho_l: f64,
    /// Scattering angle, radians
    #[arg(long)]
    theta: f64,
    /// s_p at lambda = 1
    #[arg(long, default_value_t = 100.0)]
    s_p_base: f64,
    /// Decades of lambda, sampled at ratio sqrt(10)
    #[arg(long, default_value_t = 4)]
    decades: u32,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 10_000_000)]
    mc_samples: u64,
    #[arg(long, default_value_t = 42)]
    mc_seed: u64,
}

#[derive(Serialize)]
struct Echo<'a, T> {
    command: &'a str,
    #[serde(flatten)]
    args: &'a T,
}

fn echo<T: Serialize>(command: &str, args: &T) -> String {
    serde_json::to_string(&Echo { command, args }).expect("arguments serialize")
}

/// What a subcommand produced, before it is written anywhere.
struct Artifact {
    name: &'static str,
    csv: Vec<u8>,
    document: Value,
    summary: Option<Value>,
    failed: bool,
}

enum Failure {
    Validation(String),
    Numerical(String),
    Verification,
}

impl From<solenoid_core::Error> for Failure {
    fn from(e: solenoid_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

fn curve_artifact(
    name: &'static str,
    header: String,
    curve: &DcsCurve,
) -> Result<Artifact, Failure> {
    let mut csv = Vec::new();
    export::write_curve(&mut csv, &header, curve)?;
    Ok(Artifact {
        name,
        csv,
        document: json!({ "parameters": serde_json::from_str::<Value>(&header).unwrap(), "curve": curve }),
        summary: None,
        failed: false,
    })
}

fn classical_dcs(a: &ClassicalArgs) -> Result<Artifact, Failure> {
    let orientation = match a.orientation {
        Orientation::Standard => FieldOrientation::Standard,
        Orientation::Mirrored => FieldOrientation::Mirrored,
    };
    let curve = DcsCurve::classical_oriented(
        a.rho_l,
        a.grid.theta_min,
        a.grid.theta_max,
        a.grid.n,
        orientation,
    )?;
    curve_artifact("classical-dcs", echo("classical-dcs", a), &curve)
}

fn quantum_dcs(a: &QuantumArgs, ab: bool) -> Result<Artifact, Failure> {
    let setup = QuantumSetup::with_forward_eps(a.s_p, a.s_phi, a.forward_eps)?;
    let g = &a.grid;
    if ab {
        let curve = DcsCurve::aharonov_bohm(&setup, g.theta_min, g.theta_max, g.n)?;
        curve_artifact("ab-dcs", echo("ab-dcs", a), &curve)
    } else {
        let curve = DcsCurve::quantum(&setup, g.theta_min, g.theta_max, g.n)?;
        curve_artifact("quantum-dcs", echo("quantum-dcs", a), &curve)
    }
}

fn trajectory(a: &TrajectoryArgs) -> Result<Artifact, Failure> {
    let header = echo("trajectory", a);
    let (traj, interior) = match a.method {
        Method::Arc => {
            if a.points < 2 {
                return Err(Failure::Validation(format!(
                    "points must be >= 2, got {}",
                    a.points
                )));
            }
            let t = trajectory::arc_deflection(a.rho_l, a.b)?;
            let interior = t.interior_arc(a.rho_l, a.points);
            (t, interior)
        }
        Method::Rk4 => trajectory::rk4_path(a.rho_l, a.b, a.step)?,
    };
    if !(a.leg.is_finite() && a.leg >= 0.0) {
        return Err(Failure::Validation(format!(
            "leg must be >= 0, got {}",
            a.leg
        )));
    }
    let path = traj.full_path(&interior, a.leg);
    let mut csv = Vec::new();
    export::write_path(&mut csv, &header, &path)?;
    let summary = json!({
        "parameters": serde_json::from_str::<Value>(&header).unwrap(),
        "trajectory": traj,
        "deflection_formula": classical::deflection_angle(a.rho_l, a.b)?,
    });
    Ok(Artifact {
        name: "trajectory",
        csv,
        document: json!({ "summary": summary.clone(), "path": path }),
        summary: Some(summary),
        failed: false,
    })
}

fn oracle_dcs(a: &OracleArgs) -> Result<Artifact, Failure> {
    let header = echo("oracle-dcs", a);
    let hist = trajectory::monte_carlo_dcs(a.rho_l, a.samples, a.bins, a.seed)?;
    let mut csv = Vec::new();
    hist.write_csv(&mut csv, &header)?;
    Ok(Artifact {
        name: "oracle-dcs",
        csv,
        document: json!({ "parameters": serde_json::from_str::<Value>(&header).unwrap(), "histogram": hist }),
        summary: None,
        failed: false,
    })
}

fn compare_classical(a: &OracleArgs) -> Result<Artifact, Failure> {
    let header = echo("compare-classical", a);
    let hist = trajectory::monte_carlo_dcs(a.rho_l, a.samples, a.bins, a.seed)?;
    let cmp = trajectory::compare_with_classical(&hist, a.margin_bins)?;
    let mut csv = Vec::new();
    export::write_comparison(&mut csv, &header, &cmp)?;
    let summary = json!({
        "parameters": serde_json::from_str::<Value>(&header).unwrap(),
        "rng_algorithm": hist.rng_algorithm,
        "scored_bins": cmp.scored_bins,
        "fraction_within_2_sigma": cmp.fraction_within_2_sigma,
        "fraction_within_4_sigma": cmp.fraction_within_4_sigma,
        "passed": cmp.passed,
    });
    Ok(Artifact {
        name: "compare-classical",
        csv,
        document: json!({ "summary": summary.clone(), "bins": cmp.bins }),
        summary: Some(summary),
        failed: !cmp.passed,
    })
}

fn scaling_scan(a: &ScanArgs) -> Result<Artifact, Failure> {
    let header = echo("scaling-scan", a);
    let lambdas = climit::standard_lambda_grid(a.decades);
    let scan = climit::scaling_scan(a.rho_l, a.theta, a.s_p_base, &lambdas)?;
    let fit = climit::fit_loglog_slope(&scan)?;
    let classical = climit::classical_counterpart(&scan)?;
    let classical_slope = if classical.iter().all(|v| *v > 0.0) {
        Some(climit::fit_loglog(&scan.lambdas, &classical)?.slope)
    } else {
        None
    };
    let mut csv = Vec::new();
    export::write_scan(&mut csv, &header, &scan)?;
    let summary = json!({
        "parameters": serde_json::from_str::<Value>(&header).unwrap(),
        "fit": fit,
        "classical_dcs": classical[0],
        "classical_slope": classical_slope,
    });
    Ok(Artifact {
        name: "scaling-scan",
        csv,
        document: json!({ "summary": summary.clone(), "scan": scan }),
        summary: Some(summary),
        failed: false,
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Artifact, Failure> {
    let header = echo("verify", a);
    let report = verify::run_all(&VerifyOptions {
        mc_samples: a.mc_samples,
        mc_seed: a.mc_seed,
        ..VerifyOptions::default()
    });
    let mut csv = Vec::new();
    let rows = report.checks.iter().map(|c| {
        [
            c.module.clone(),
            c.name.clone(),
            c.passed.to_string(),
            c.measured.to_string(),
            c.tolerance.to_string(),
            c.detail.clone(),
        ]
    });
    export::write_table(
        &mut csv,
        &header,
        &[
            "module",
            "check",
            "passed",
            "measured",
            "tolerance",
            "detail",
        ],
        rows,
    )?;
    let failed = !report.passed;
    Ok(Artifact {
        name: "verify",
        csv,
        document: serde_json::to_value(&report).unwrap(),
        summary: None,
        failed,
    })
}

fn sibling(path: &Path) -> PathBuf {
    let json = path.with_extension("json");
    if json == path {
        path.with_extension("summary.json")
    } else {
        json
    }
}

fn pretty(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("json values serialize");
    out.push(b'\n');
    out
}

fn emit(artifact: &Artifact, format: Format, output: Option<&Path>) -> io::Result<()> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let target = match (output, &dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(format!("{}.{ext}", artifact.name))),
        (None, None) => None,
    };
    let body = match format {
        Format::Csv => artifact.csv.clone(),
        Format::Json => pretty(&artifact.document),
    };
    let summary = match format {
        Format::Csv => artifact.summary.as_ref(),
        Format::Json => None,
    };
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, body)?;
            if let Some(s) = summary {
                fs::write(sibling(&path), pretty(s))?;
            }
        }
        None => {
            io::stdout().write_all(&body)?;
            if let Some(s) = summary {
                io::stderr().write_all(&pretty(s))?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let artifact = match &cli.command {
        Command::ClassicalDcs(a) => classical_dcs(a)?,
        Command::QuantumDcs(a) => quantum_dcs(a, false)?,
        Command::AbDcs(a) => quantum_dcs(a, true)?,
        Command::Trajectory(a) => trajectory(a)?,
        Command::OracleDcs(a) => oracle_dcs(a)?,
        Command::CompareClassical(a) => compare_classical(a)?,
        Command::ScalingScan(a) => scaling_scan(a)?,
        Command::Verify(a) => run_verify(a)?,
    };
    let default_format = match cli.command {
        Command::Verify(_) => Format::Json,
        _ => Format::Csv,
    };
    emit(
        &artifact,
        cli.format.unwrap_or(default_format),
        cli.output.as_deref(),
    )?;
    if artifact.failed {
        return Err(Failure::Verification);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
