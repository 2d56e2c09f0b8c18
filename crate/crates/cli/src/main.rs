//! `cutstack`: scans, theorem demos, and probes for rank-one schemes.

mod demos;
mod output;
mod runs;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutstack_core::scalar::{self, Scalar};
use cutstack_core::scheme::{parse_scheme, SchemeSpec};
use cutstack_core::{Engine, Error};

use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "cutstack", version, about = "Exact rank-one cutting-and-stacking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scheme and print its canonical form and base width
    Scheme {
        #[command(subcommand)]
        action: SchemeAction,
    },
    /// Inspect a tower stage
    Tower {
        #[command(subcommand)]
        action: TowerAction,
    },
    /// Certified correlation rows over a shift range
    Scan(ScanArgs),
    /// Compare correlations along stage heights with a target joining
    Joining(JoiningArgs),
    /// Finite-horizon minimum of certified correlation lower bounds
    Liminf(ScanArgs),
    /// Run a named construction demo and verify its exact invariants
    Demo(DemoArgs),
    /// Cumulative coverage of a set along a shift sequence
    Sweep(SweepArgs),
    /// Worst observed coverage over sampled shift tuples
    Uso(UsoArgs),
}

#[derive(Subcommand)]
enum SchemeAction {
    Parse {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Subcommand)]
enum TowerAction {
    Show {
        #[command(flatten)]
        common: CommonArgs,
        /// Stage to materialize
        #[arg(long)]
        stage: u32,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Preset name (chacon3, staircase4), a scheme file path, or inline text
    #[arg(long, default_value = "chacon3")]
    scheme: String,
    /// Unresolved-mass budget as a rational p/q
    #[arg(long, default_value = "1/1000000", value_parser = parse_eps)]
    eps: Scalar,
    /// Maximum refinement stage
    #[arg(long)]
    stage_cap: Option<u32>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn parse_eps(text: &str) -> Result<Scalar, String> {
    let v = scalar::parse(text).map_err(|e| e.to_string())?;
    if v <= scalar::zero() {
        return Err("epsilon must be positive".into());
    }
    Ok(v)
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Left set expression
    #[arg(long = "A")]
    a: String,
    /// Right set expression
    #[arg(long = "B")]
    b: String,
    /// First shift
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    from: i64,
    /// Last shift (inclusive)
    #[arg(long, default_value_t = 50, allow_negative_numbers = true)]
    to: i64,
}

#[derive(Args)]
struct JoiningArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "A")]
    a: String,
    #[arg(long = "B")]
    b: String,
    /// Joining coefficients a_0,a_1,... as rationals
    #[arg(long, default_value = "1/2,1/2")]
    coeffs: String,
    /// First stage (shifts are the stage heights h_n)
    #[arg(long, default_value_t = 4)]
    from: u32,
    /// Last stage (inclusive)
    #[arg(long, default_value_t = 12)]
    to: u32,
}

#[derive(Args)]
struct DemoArgs {
    /// One of: thm1, thm3, thm4, thm5, thm6, ex3-sweep, residual
    name: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Tower height for thm1/thm4
    #[arg(long, default_value_t = 4)]
    h: u128,
    /// Coefficient count N for thm6, class index n for residual
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Set expression for thm6's target set A
    #[arg(long = "A", default_value = "interval(0,1/5)")]
    a: String,
    /// Generator count for thm5
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Index cap for thm5
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Shift range checked by thm1/thm4 (stage range for thm6)
    #[arg(long, allow_negative_numbers = true)]
    from: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<i64>,
}

impl DemoArgs {
    /// Demo-specific default ranges: shifts for thm1/thm4, stages for thm6.
    fn range(&self, default_from: i64, default_to: i64) -> (i64, i64) {
        (self.from.unwrap_or(default_from), self.to.unwrap_or(default_to))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "A")]
    a: String,
    /// Sequence: heights:COUNT | arith:START:STEP:COUNT |
    /// seeded:COUNT:MAX | explicit:k1,k2,...
    #[arg(long)]
    seq: String,
    /// Seed for seeded sequences
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct UsoArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long = "A")]
    a: String,
    /// Tuple length N
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, default_value_t = 64)]
    trials: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Shifts are drawn from 1..=max-shift
    #[arg(long, default_value_t = 500)]
    max_shift: i64,
}

fn load_scheme(text: &str) -> Result<SchemeSpec, Error> {
    if let Some(spec) = SchemeSpec::preset(text) {
        return Ok(spec);
    }
    let path = std::path::Path::new(text);
    if path.exists() {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {text}: {e}")))?;
        return parse_scheme(&body);
    }
    parse_scheme(text)
}

fn engine_for(common: &CommonArgs) -> Result<Engine, Error> {
    let spec = load_scheme(&common.scheme)?;
    Ok(match common.stage_cap {
        Some(cap) => Engine::with_caps(
            spec,
            cap,
            cutstack_core::engine::DEFAULT_HEIGHT_CAP,
        ),
        None => Engine::new(spec),
    })
}

fn eval_set(engine: &Engine, text: &str) -> Result<cutstack_core::IntervalSet, Error> {
    cutstack_core::parse_set_expr(text)?.eval(engine)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Scheme { action: SchemeAction::Parse { common } } => {
            let spec = load_scheme(&common.scheme)?;
            let mut sink = Sink::open(&common)?;
            runs::scheme_parse(&spec, &common, &mut sink)
        }
        Command::Tower { action: TowerAction::Show { common, stage } } => {
            let engine = engine_for(&common)?;
            let mut sink = Sink::open(&common)?;
            runs::tower_show(&engine, stage, &common, &mut sink)
        }
        Command::Scan(args) => {
            let engine = engine_for(&args.common)?;
            let a = eval_set(&engine, &args.a)?;
            let b = eval_set(&engine, &args.b)?;
            let mut sink = Sink::open(&args.common)?;
            runs::scan(&engine, &a, &b, &args, &mut sink)
        }
        Command::Liminf(args) => {
            let engine = engine_for(&args.common)?;
            let a = eval_set(&engine, &args.a)?;
            let b = eval_set(&engine, &args.b)?;
            let mut sink = Sink::open(&args.common)?;
            runs::liminf(&engine, &a, &b, &args, &mut sink)
        }
        Command::Joining(args) => {
            let engine = engine_for(&args.common)?;
            let a = eval_set(&engine, &args.a)?;
            let b = eval_set(&engine, &args.b)?;
            let mut sink = Sink::open(&args.common)?;
            runs::joining(&engine, &a, &b, &args, &mut sink)
        }
        Command::Demo(args) => {
            let mut sink = Sink::open(&args.common)?;
            demos::run(&args, &mut sink)
        }
        Command::Sweep(args) => {
            let engine = engine_for(&args.common)?;
            let a = eval_set(&engine, &args.a)?;
            let mut sink = Sink::open(&args.common)?;
            runs::sweep(&engine, &a, &args, &mut sink)
        }
        Command::Uso(args) => {
            let engine = engine_for(&args.common)?;
            let a = eval_set(&engine, &args.a)?;
            let mut sink = Sink::open(&args.common)?;
            runs::uso(&engine, &a, &args, &mut sink)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse { .. } | Error::Validation(_) => 1,
                Error::Precondition(_) => 2,
                Error::Resource { .. } => 3,
            };
            ExitCode::from(code)
        }
    }
}
