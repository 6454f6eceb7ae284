//! `franka-ik`: analytic IK, forward kinematics, round-trip verification and
//! timing for the Franka arm.
//!
//! Exit codes: 0 solved, 2 no solution, 1 usage or input error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use franka_ik::cli::{bench, read_input, run_ik, verify, CliError, FkDocument, IkRequest, LockTarget, PoseDocument};
use franka_ik::model::{default_geometry, FrankaGeometry};

#[derive(Parser)]
#[command(name = "franka-ik", version, about = "Analytic inverse kinematics for the Franka 7-DOF arm")]
struct Cli {
    /// Geometry JSON (d1, d3, d5, a4, a5, a7, dE, limits); built-in values otherwise
    #[arg(long, global = true, value_name = "FILE")]
    geometry: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one pose for all configurations with the locked parameter
    Ik(IkArgs),
    /// Forward kinematics and joint axes
    Fk(FkArgs),
    /// Round-trip check on seeded random configurations
    Verify(VerifyArgs),
    /// Time solver calls on seeded random poses
    Bench(BenchArgs),
}

#[derive(Args)]
struct IkArgs {
    /// Pose JSON file, or - for stdin
    #[arg(long, value_name = "FILE")]
    pose: String,

    #[arg(long, value_enum)]
    lock: LockTarget,

    /// Locked value in degrees
    #[arg(long, allow_negative_numbers = true)]
    value: f64,

    /// q1 in degrees used at a type-1 singular shoulder
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    emergency_q1: f64,

    /// Report q1 and q3 as null at a type-1 singular shoulder
    #[arg(long, conflicts_with = "emergency_q1")]
    no_emergency_q1: bool,

    /// q7 in degrees used when a q6 or q4 query hits a type-2 singularity
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    emergency_q7: f64,

    /// Include the 6x7 Jacobian of every solution
    #[arg(long)]
    jacobian: bool,

    /// JSON output (default)
    #[arg(long, conflicts_with = "table")]
    json: bool,

    /// Human-readable table
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct FkArgs {
    /// Seven joint angles in degrees
    #[arg(long, num_args = 7, required = true, allow_negative_numbers = true)]
    q: Vec<f64>,

    /// JSON output
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLock {
    Q7,
    Q6,
    Q4,
    Swivel,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = VerifyLock::All)]
    lock: VerifyLock,

    /// JSON output
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = LockTarget::Q7)]
    lock: LockTarget,

    /// Stop at the Jacobians instead of extracting joint angles
    #[arg(long)]
    jacobian: bool,

    /// JSON output
    #[arg(long)]
    json: bool,
}

fn load_geometry(path: Option<&str>) -> Result<FrankaGeometry, CliError> {
    match path {
        Some(p) => Ok(FrankaGeometry::from_json(&read_input(p)?)?),
        None => Ok(default_geometry()),
    }
}

fn cmd_ik(args: &IkArgs, geom: &FrankaGeometry) -> Result<ExitCode, CliError> {
    let parsed = PoseDocument::parse(&read_input(&args.pose)?)?.to_pose()?;
    if let Some(w) = parsed.warning() {
        eprintln!("{w}");
    }
    let req = IkRequest {
        lock: args.lock,
        value: args.value.to_radians(),
        emergency_q1: (!args.no_emergency_q1).then(|| args.emergency_q1.to_radians()),
        emergency_q7: args.emergency_q7.to_radians(),
        jacobian: args.jacobian,
    };
    let doc = run_ik(&parsed.pose, &req, geom)?;
    if args.table {
        print!("{}", doc.to_table());
    } else {
        println!("{}", doc.to_json());
    }
    Ok(if doc.solutions.is_empty() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_fk(args: &FkArgs, geom: &FrankaGeometry) -> Result<ExitCode, CliError> {
    if args.q.iter().any(|v| !v.is_finite()) {
        return Err(franka_ik::error::IkError::NonFinite("joint angles").into());
    }
    let q: [f64; 7] = std::array::from_fn(|i| args.q[i].to_radians());
    let doc = FkDocument::new(&q, geom);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print!("{}", doc.to_text());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs, geom: &FrankaGeometry) -> Result<ExitCode, CliError> {
    let locks: &[LockTarget] = match args.lock {
        VerifyLock::Q7 => &[LockTarget::Q7],
        VerifyLock::Q6 => &[LockTarget::Q6],
        VerifyLock::Q4 => &[LockTarget::Q4],
        VerifyLock::Swivel => &[LockTarget::Swivel],
        VerifyLock::All => &LockTarget::ALL,
    };
    let reports: Vec<_> = locks.iter().map(|&l| verify(l, args.n as usize, args.seed, geom)).collect();
    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            println!("{}", r.line());
        }
    }
    Ok(if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_bench(args: &BenchArgs, geom: &FrankaGeometry) -> Result<ExitCode, CliError> {
    let report = bench(args.lock, args.n as usize, args.seed, args.jacobian, geom);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{}", report.line());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = load_geometry(cli.geometry.as_deref()).and_then(|geom| match &cli.command {
        Command::Ik(a) => cmd_ik(a, &geom),
        Command::Fk(a) => cmd_fk(a, &geom),
        Command::Verify(a) => cmd_verify(a, &geom),
        Command::Bench(a) => cmd_bench(a, &geom),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
