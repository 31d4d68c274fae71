//! Command-line interface for two-mode Gaussian state classification and
//! measurement-feedback work extraction.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or parameter
//! domain errors, 3 nonphysical input where a physical state is required,
//! 4 numerical failure (degenerate conditioning, empty boundary, or no
//! transition in the scanned interval).

use clap::{Args, Parser, Subcommand, ValueEnum};
use gausswork::classify::{classify, BoundaryKind, ClassifyError};
use gausswork::gaussian::{GaussianError, StandardFormParams};
use gausswork::montecarlo::{mc_work, McError};
use gausswork::nalgebra::Vector2;
use gausswork::protocols::{run_protocol, work, ProtocolError, ProtocolKind, Trajectory};
use gausswork::sweep::{
    boundary_work_max, find_steer_vanish_b, find_transition_a, find_transition_b, sweep_quadrant,
    sweep_symmetric, verify_rows, write_csv, write_json, SweepError,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gausswork",
    version,
    about = "Classify two-mode Gaussian states and compute extractable work"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    /// x-quadrature homodyne on mode B
    Homx,
    /// p-quadrature homodyne on mode B
    Homp,
    /// average of the two homodyne protocols
    Hom,
    /// heterodyne on mode B
    Het,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> ProtocolKind {
        match p {
            ProtocolArg::Homx => ProtocolKind::HomodyneX,
            ProtocolArg::Homp => ProtocolKind::HomodyneP,
            ProtocolArg::Hom => ProtocolKind::HomodyneAverage,
            ProtocolArg::Het => ProtocolKind::Heterodyne,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    /// separability boundary
    Sep,
    /// B-to-A nonsteerability boundary
    Steer,
    /// physicality boundary
    Phys,
}

impl From<BoundaryArg> for BoundaryKind {
    fn from(k: BoundaryArg) -> BoundaryKind {
        match k {
            BoundaryArg::Sep => BoundaryKind::Separability,
            BoundaryArg::Steer => BoundaryKind::NonsteerabilityBtoA,
            BoundaryArg::Phys => BoundaryKind::Physicality,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    /// x and p variance of mode A
    #[arg(long)]
    a: f64,
    /// x and p variance of mode B
    #[arg(long)]
    b: f64,
    /// x-x correlation
    #[arg(long, allow_hyphen_values = true)]
    c1: f64,
    /// p-p correlation
    #[arg(long, allow_hyphen_values = true)]
    c2: f64,
}

impl ParamArgs {
    fn params(&self) -> StandardFormParams {
        StandardFormParams::new(self.a, self.b, self.c1, self.c2)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Report physicality, separability, and steering flags of a state
    Classify {
        #[command(flatten)]
        state: ParamArgs,
        /// Emit the flags as a JSON object
        #[arg(long)]
        json: bool,
    },
    /// Compute the extractable work of a protocol on a state
    Work {
        #[command(flatten)]
        state: ParamArgs,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Measurement outcome "X,P" (default 0,0); irrelevant for the work
        #[arg(long, allow_hyphen_values = true)]
        outcome: Option<String>,
        /// Print the full trajectory (conditional state, squeeze, energies)
        #[arg(long)]
        trace: bool,
        /// Emit the result as a JSON object
        #[arg(long)]
        json: bool,
    },
    /// Sweep a parameter grid and write rows to a file
    Sweep {
        #[command(flatten)]
        grid: SweepArgs,
    },
    /// Locate the work maximum on a classification boundary
    Boundary {
        /// x and p variance of mode A
        #[arg(long)]
        a: f64,
        /// x and p variance of mode B
        #[arg(long)]
        b: f64,
        #[arg(long, value_enum)]
        kind: BoundaryArg,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        #[arg(long)]
        json: bool,
    },
    /// Find where the boundary work maximum jumps between interior and edge
    Transition {
        /// Mode-A variance; the scan runs over b unless --fix-b is given
        #[arg(long)]
        a: f64,
        /// Fix b to this value and scan over a instead
        #[arg(long)]
        fix_b: Option<f64>,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        #[arg(long)]
        json: bool,
    },
    /// Find the b below which no B-to-A steerable states exist
    SteerVanish {
        /// Mode-A variance
        #[arg(long)]
        a: f64,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo check of a protocol's work against the closed form
    Mc {
        #[command(flatten)]
        state: ParamArgs,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Number of sampled outcomes
        #[arg(long)]
        samples: usize,
        /// RNG seed; identical seeds give bit-identical results
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Grid family: "symmetric" (a, a, c, -c) or "quadrant" (fixed a, b)
    #[arg(long)]
    mode: String,
    /// Symmetric mode: range of a
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    /// Symmetric mode: range of c
    #[arg(long, allow_hyphen_values = true)]
    c_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c_max: Option<f64>,
    /// Quadrant mode: fixed mode variances
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Quadrant mode: range of c1 (must stay <= 0)
    #[arg(long, allow_hyphen_values = true)]
    c1_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c1_max: Option<f64>,
    /// Quadrant mode: range of c2 (must stay >= 0)
    #[arg(long, allow_hyphen_values = true)]
    c2_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c2_max: Option<f64>,
    /// Grid points per axis, "N" or "N,M" (outer,inner)
    #[arg(long, default_value = "41")]
    grid: String,
    /// Output file path
    #[arg(long)]
    out: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Re-derive 1% of the rows through explicit trajectories as a cross-check
    #[arg(long)]
    verify: bool,
}

/// Process exit status chosen per the error taxonomy in the module docs.
enum Failure {
    Io(String),
    Args(String),
    NonPhysical(String),
    Numerical(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Io(m) => (1, m),
            Failure::Args(m) => (2, m),
            Failure::NonPhysical(m) => (3, m),
            Failure::Numerical(m) => (4, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Failure {
        match e {
            ClassifyError::NotPhysical => Failure::NonPhysical(e.to_string()),
            ClassifyError::DomainError => Failure::Args(e.to_string()),
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Failure {
        match e {
            ProtocolError::NotPhysical => Failure::NonPhysical(e.to_string()),
            ProtocolError::NotSingleShot => Failure::Args(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Failure {
        match e {
            McError::NotPhysical => Failure::NonPhysical(e.to_string()),
            McError::InsufficientSamples => Failure::Args(e.to_string()),
            McError::Protocol(p) => p.into(),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Failure {
        match e {
            SweepError::BadRange => Failure::Args(e.to_string()),
            SweepError::EmptyBoundary | SweepError::NoTransition => {
                Failure::Numerical(e.to_string())
            }
            SweepError::VerifyMismatch { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<GaussianError> for Failure {
    fn from(e: GaussianError) -> Failure {
        match e {
            GaussianError::NotPositiveDefinite => Failure::NonPhysical(e.to_string()),
            GaussianError::SingularConditioning => Failure::Numerical(e.to_string()),
            _ => Failure::Args(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { state, json } => cmd_classify(&state, json),
        Command::Work {
            state,
            protocol,
            outcome,
            trace,
            json,
        } => cmd_work(&state, protocol.into(), outcome.as_deref(), trace, json),
        Command::Sweep { grid } => cmd_sweep(&grid),
        Command::Boundary {
            a,
            b,
            kind,
            protocol,
            json,
        } => cmd_boundary(a, b, kind, protocol.into(), json),
        Command::Transition {
            a,
            fix_b,
            protocol,
            json,
        } => cmd_transition(a, fix_b, protocol.into(), json),
        Command::SteerVanish { a, json } => cmd_steer_vanish(a, json),
        Command::Mc {
            state,
            protocol,
            samples,
            seed,
            json,
        } => cmd_mc(&state, protocol.into(), samples, seed, json),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn cmd_classify(state: &ParamArgs, json: bool) -> Result<(), Failure> {
    let rec = classify(&state.params());
    if json {
        print_json(&rec)
    } else {
        println!(
            "physical={} separable={} steer_b_to_a={} steer_a_to_b={}",
            rec.physical, rec.separable, rec.steerable_b_to_a, rec.steerable_a_to_b
        );
        Ok(())
    }
}

fn parse_outcome(text: &str) -> Result<Vector2<f64>, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Failure::Args(format!("outcome must be \"X,P\", got {text:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let p: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok(Vector2::new(x, p))
}

fn print_trajectory(label: &str, t: &Trajectory) {
    println!("[{label}]");
    println!(
        "  outcome              = ({}, {})",
        t.outcome[0], t.outcome[1]
    );
    println!(
        "  conditional mean     = ({}, {})",
        t.post_measurement.mean[0], t.post_measurement.mean[1]
    );
    let c = t.post_measurement.cov;
    println!(
        "  conditional cov      = [[{}, {}], [{}, {}]]",
        c[(0, 0)],
        c[(0, 1)],
        c[(1, 0)],
        c[(1, 1)]
    );
    println!(
        "  after displacement   = ({}, {})",
        t.post_displacement.mean[0], t.post_displacement.mean[1]
    );
    println!("  squeeze parameter s  = {}", t.squeeze_s);
    let f = t.final_state.cov;
    println!(
        "  final cov            = [[{}, {}], [{}, {}]]",
        f[(0, 0)],
        f[(0, 1)],
        f[(1, 0)],
        f[(1, 1)]
    );
    println!("  initial local energy = {}", t.initial_energy);
    println!("  final local energy   = {}", t.final_energy);
    println!("  extracted work       = {}", t.work);
}

fn cmd_work(
    state: &ParamArgs,
    kind: ProtocolKind,
    outcome: Option<&str>,
    trace: bool,
    json: bool,
) -> Result<(), Failure> {
    let params = state.params();
    let outcome = match outcome {
        Some(text) => parse_outcome(text)?,
        None => Vector2::zeros(),
    };
    let w = work(&params, kind)?;
    if trace {
        // The average-homodyne protocol is a pair of single-shot protocols;
        // trace both branches.
        match kind {
            ProtocolKind::HomodyneAverage => {
                let tx = run_protocol(&params, ProtocolKind::HomodyneX, outcome)?;
                let tp = run_protocol(&params, ProtocolKind::HomodyneP, outcome)?;
                print_trajectory("homodyne x", &tx);
                print_trajectory("homodyne p", &tp);
            }
            _ => {
                let t = run_protocol(&params, kind, outcome)?;
                print_trajectory("trajectory", &t);
            }
        }
    }
    if json {
        print_json(&serde_json::json!({
            "a": params.a, "b": params.b, "c1": params.c1, "c2": params.c2,
            "protocol": kind, "work": w,
        }))
    } else {
        println!("work = {w}");
        Ok(())
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Args(format!("grid must be \"N\" or \"N,M\", got {text:?}"));
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [n] => {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
        [n, m] => {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            let m: usize = m.trim().parse().map_err(|_| bad())?;
            Ok((n, m))
        }
        _ => Err(bad()),
    }
}

fn require(opt: Option<f64>, name: &str, mode: &str) -> Result<f64, Failure> {
    opt.ok_or_else(|| Failure::Args(format!("--{name} is required in {mode} mode")))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let (n_outer, n_inner) = parse_grid(&args.grid)?;
    let rows = match args.mode.as_str() {
        "symmetric" => {
            let a_min = require(args.a_min, "a-min", "symmetric")?;
            let a_max = require(args.a_max, "a-max", "symmetric")?;
            let c_min = require(args.c_min, "c-min", "symmetric")?;
            let c_max = require(args.c_max, "c-max", "symmetric")?;
            sweep_symmetric(a_min, a_max, n_outer, c_min, c_max, n_inner)?
        }
        "quadrant" => {
            let a = require(args.a, "a", "quadrant")?;
            let b = require(args.b, "b", "quadrant")?;
            let c1_min = require(args.c1_min, "c1-min", "quadrant")?;
            let c1_max = require(args.c1_max, "c1-max", "quadrant")?;
            let c2_min = require(args.c2_min, "c2-min", "quadrant")?;
            let c2_max = require(args.c2_max, "c2-max", "quadrant")?;
            sweep_quadrant(a, b, c1_min, c1_max, n_outer, c2_min, c2_max, n_inner)?
        }
        other => {
            return Err(Failure::Args(format!(
                "--mode must be \"symmetric\" or \"quadrant\", got {other:?}"
            )))
        }
    };
    if args.verify {
        let checked = verify_rows(&rows, rows.len() / 100)?;
        eprintln!("verified {checked} rows against trajectories");
    }
    let file = File::create(&args.out).map_err(|e| Failure::Io(e.to_string()))?;
    let mut out = BufWriter::new(file);
    match args.format {
        FormatArg::Csv => write_csv(&rows, &mut out),
        FormatArg::Json => write_json(&rows, &mut out),
    }
    .map_err(|e| Failure::Io(e.to_string()))?;
    out.flush().map_err(|e| Failure::Io(e.to_string()))?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out);
    Ok(())
}

fn cmd_boundary(
    a: f64,
    b: f64,
    kind: BoundaryArg,
    protocol: ProtocolKind,
    json: bool,
) -> Result<(), Failure> {
    let boundary: BoundaryKind = kind.into();
    let m = boundary_work_max(boundary, protocol, a, b)?;
    if json {
        print_json(&serde_json::json!({
            "boundary": boundary, "protocol": protocol,
            "c1": m.c1, "c2": m.c2, "work": m.work, "at_edge": m.at_edge,
        }))
    } else {
        println!(
            "c1 = {}\nc2 = {}\nwork = {}\nat_edge = {}",
            m.c1, m.c2, m.work, m.at_edge
        );
        Ok(())
    }
}

fn cmd_transition(
    a: f64,
    fix_b: Option<f64>,
    protocol: ProtocolKind,
    json: bool,
) -> Result<(), Failure> {
    let kind = BoundaryKind::Separability;
    let (scan_axis, value) = match fix_b {
        // Scan a at fixed b; --a is ignored in this variant.
        Some(b) => {
            let hi = (2.0 * b).max(8.0);
            ("a", find_transition_a(kind, protocol, b, 1.05, hi)?)
        }
        None => {
            let hi = (2.0 * a).max(8.0);
            ("b", find_transition_b(kind, protocol, a, 1.05, hi)?)
        }
    };
    if json {
        print_json(&serde_json::json!({
            "scan_axis": scan_axis, "protocol": protocol, "transition": value,
        }))
    } else {
        println!("transition {scan_axis} = {value}");
        Ok(())
    }
}

fn cmd_steer_vanish(a: f64, json: bool) -> Result<(), Failure> {
    if a.is_nan() || a <= 1.0 {
        return Err(Failure::Args(format!(
            "steerable states require a > 1, got a = {a}"
        )));
    }
    let b = find_steer_vanish_b(a, 1.01, a + 1.0)?;
    if json {
        print_json(&serde_json::json!({ "a": a, "steer_vanish_b": b }))
    } else {
        println!("steer_vanish_b = {b}");
        Ok(())
    }
}

fn cmd_mc(
    state: &ParamArgs,
    protocol: ProtocolKind,
    samples: usize,
    seed: u64,
    json: bool,
) -> Result<(), Failure> {
    let params = state.params();
    let (w_mc, stderr) = mc_work(&params, protocol, samples, seed)?;
    let w_closed = work(&params, protocol)?;
    if json {
        print_json(&serde_json::json!({
            "protocol": protocol, "samples": samples, "seed": seed,
            "work_mc": w_mc, "stderr": stderr, "work_closed": w_closed,
        }))
    } else {
        println!("work_mc = {w_mc} (stderr {stderr})");
        println!("work_closed = {w_closed}");
        Ok(())
    }
}
