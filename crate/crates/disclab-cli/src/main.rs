//! `disclab`: reproducible batch commands over the discrepancy toolkit.
//!
//! Data goes to stdout (or `--out`), human-readable summaries and
//! diagnostics to stderr. Exit codes: 0 success, 1 parameter error,
//! 2 computation error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use disclab_core::{
    assemble_extremal, bound_report, check_condition_a, chi_lower_bound, count_below,
    disc_function, envelope_f, envelope_g, generate, jump_census, max_ratio, optimal_delta,
    optimal_slope_selector, oracle_minimize, p_chain_check, profile, q1_integral, q2_integral,
    star_discrepancy, strong_q_integral, verify_bound_with, AdmissibleParams, EnvelopeMode, Error,
    ExtremalMode, GeneratorSpec, OracleFamily, PointSet, Schedule, WindowScheme,
};

#[derive(Parser)]
#[command(
    name = "disclab",
    about = "Star discrepancy lower-bound toolkit",
    version
)]
struct Cli {
    /// Worker thread cap (defaults to the available parallelism).
    #[arg(long, global = true, env = "DISCLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point sequence.
    Gen(GenArgs),
    /// Exact star discrepancy of a point file.
    Star(StarArgs),
    /// Per-prefix n·D_n* profile as CSV.
    Profile(ProfileArgs),
    /// Windowed envelope functions as segment CSV.
    Envelope(EnvelopeArgs),
    /// Spread integrals P(t) against t·χ_a.
    Ptee(PteeArgs),
    /// Extremal-function assembly, admissibility checks, and oracles.
    Variational(VariationalArgs),
    /// The constant c(a) and its maximization.
    Bound(BoundArgs),
    /// Finite-N bound verification on a point file.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SequenceKind {
    Vdc,
    Kronecker,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    Points,
    Json,
}

#[derive(Args)]
struct GenArgs {
    /// Which generator to run.
    #[arg(long, value_enum)]
    sequence: SequenceKind,
    /// Radix for the van der Corput sequence.
    #[arg(long, default_value_t = 2)]
    base: u32,
    /// Multiplier in (0,1) for the Kronecker sequence.
    #[arg(long)]
    alpha: Option<f64>,
    /// Input point file (sequence = file).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Number of points to emit.
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "points")]
    format: GenFormat,
}

#[derive(Args)]
struct StarArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Evaluate the counting and discrepancy functions at this x instead of
    /// the supremum.
    #[arg(long)]
    at: Option<f64>,
    /// Prefix length for --at (defaults to the full set).
    #[arg(long)]
    prefix: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    All,
    Checkpointed,
    Default,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "default")]
    schedule: ScheduleKind,
    /// Geometric checkpoint ratio (> 1).
    #[arg(long, default_value_t = 1.01)]
    ratio: f64,
    /// Dense head length for the default schedule.
    #[arg(long, default_value_t = 4096)]
    dense_limit: usize,
    /// Also report max n·D_n*/log n over entries with n ≥ this floor.
    #[arg(long)]
    ratio_floor: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvelopeKind {
    /// max-envelope(A2) − max-envelope(A0)
    F,
    /// min-envelope(A2) − min-envelope(A0)
    G,
    /// max-envelope of the window
    Max,
    /// min-envelope of the window
    Min,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowKind {
    A0,
    A1,
    A2,
    Full,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum, default_value = "f")]
    function: EnvelopeKind,
    /// Index window for max/min envelopes.
    #[arg(long, value_enum, default_value = "full")]
    window: WindowKind,
    /// Jump census threshold reported on stderr.
    #[arg(long, default_value_t = 1.0)]
    census_threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PteeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    t_max: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeKind {
    Admissible,
    Strong,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunKind {
    Assemble,
    Check,
    Oracle,
    /// Evaluate the closed-form part integrals and selectors at --chi.
    Forms,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Structured,
    Perturbed,
}

#[derive(Args)]
struct VariationalArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum, default_value = "strong")]
    mode: ModeKind,
    #[arg(long, value_enum, default_value = "assemble")]
    run: RunKind,
    #[arg(long, value_enum, default_value = "structured")]
    family: FamilyKind,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Part length for --run forms.
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct BoundArgs {
    /// Evaluate c(a) at this a (defaults to the maximizer).
    #[arg(long)]
    a: Option<f64>,
    /// Run the golden-section maximization (always cheap; kept for
    /// pipeline clarity).
    #[arg(long, default_value_t = true)]
    optimize: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Include the (a, c(a)) scan table.
    #[arg(long)]
    scan: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: BoundFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long, value_enum, default_value = "default")]
    schedule: ScheduleKind,
    #[arg(long, default_value_t = 1.01)]
    ratio: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders usage errors with the offending flag
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 for parameter errors, 2 for computation/environment errors.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Range(_) => 1,
        Error::Ingestion { .. } | Error::Construction { .. } | Error::Io(_) => 2,
    }
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, data)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(data.as_bytes())?;
        }
    }
    Ok(())
}

fn schedule_of(kind: ScheduleKind, ratio: f64, dense_limit: usize) -> Schedule {
    match kind {
        ScheduleKind::All => Schedule::All,
        ScheduleKind::Checkpointed => Schedule::Checkpointed { ratio },
        ScheduleKind::Default => Schedule::DenseThenCheckpointed { dense_limit, ratio },
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen(args) => run_gen(args),
        Command::Star(args) => run_star(args),
        Command::Profile(args) => run_profile(args),
        Command::Envelope(args) => run_envelope(args),
        Command::Ptee(args) => run_ptee(args),
        Command::Variational(args) => run_variational(args),
        Command::Bound(args) => run_bound(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn run_gen(args: GenArgs) -> Result<(), Error> {
    let spec = match args.sequence {
        SequenceKind::Vdc => GeneratorSpec::VanDerCorput { base: args.base },
        SequenceKind::Kronecker => GeneratorSpec::Kronecker {
            alpha: args.alpha.ok_or_else(|| {
                Error::InvalidParameter("--alpha is required for --sequence kronecker".into())
            })?,
        },
        SequenceKind::File => GeneratorSpec::File {
            path: args.input.ok_or_else(|| {
                Error::InvalidParameter("--in is required for --sequence file".into())
            })?,
        },
    };
    let points = generate(&spec, args.count)?;
    let data = match args.format {
        GenFormat::Points => points.to_point_file(),
        GenFormat::Json => points.to_json(&spec) + "\n",
    };
    emit(&args.out, &data)?;
    eprintln!("generated {} points", points.len());
    Ok(())
}

fn run_star(args: StarArgs) -> Result<(), Error> {
    let points = PointSet::read_file(&args.input)?;
    match args.at {
        Some(x) => {
            let n = args.prefix.unwrap_or(points.len());
            let count = count_below(&points, n, x)?;
            let disc = disc_function(&points, n, x)?;
            emit(
                &args.out,
                &format!("n,x,count_below,disc_function\n{n},{x},{count},{disc}\n"),
            )?;
        }
        None => {
            let d = star_discrepancy(&points)?;
            emit(&args.out, &format!("{d}\n"))?;
        }
    }
    eprintln!("N = {}", points.len());
    Ok(())
}

fn run_profile(args: ProfileArgs) -> Result<(), Error> {
    let points = PointSet::read_file(&args.input)?;
    let schedule = schedule_of(args.schedule, args.ratio, args.dense_limit);
    let prof = profile(&points, schedule)?;
    emit(&args.out, &prof.to_csv())?;
    eprintln!(
        "{} profile entries up to N = {}",
        prof.entries.len(),
        points.len()
    );
    if let Some(floor_n) = args.ratio_floor {
        eprintln!(
            "max n·D_n*/log n over n ≥ {floor_n}: {}",
            max_ratio(&prof, floor_n)?
        );
    }
    Ok(())
}

fn run_envelope(args: EnvelopeArgs) -> Result<(), Error> {
    let points = PointSet::read_file(&args.input)?;
    let scheme = WindowScheme::new(args.a, args.t)?;
    if points.len() < scheme.n {
        return Err(Error::InvalidParameter(format!(
            "need at least N = {} points for t = {}, file holds {}",
            scheme.n,
            args.t,
            points.len()
        )));
    }
    let env = match args.function {
        EnvelopeKind::F => envelope_f(&points, &scheme)?,
        EnvelopeKind::G => envelope_g(&points, &scheme)?,
        EnvelopeKind::Max | EnvelopeKind::Min => {
            let window = match args.window {
                WindowKind::A0 => scheme.a0(),
                WindowKind::A1 => scheme.a1(),
                WindowKind::A2 => scheme.a2(),
                WindowKind::Full => scheme.full(),
            };
            let mode = match args.function {
                EnvelopeKind::Max => EnvelopeMode::Max,
                _ => EnvelopeMode::Min,
            };
            disclab_core::window_envelope(&points, window, mode)?
        }
    };
    emit(&args.out, &env.to_csv())?;
    let census = jump_census(&env, args.census_threshold);
    eprintln!(
        "N = {}, m = {}, segments = {}, positive jumps = {}, jumps ≥ {} = {}, ∫|f| = {:.12}",
        scheme.n,
        scheme.m,
        env.segments().len(),
        census.positive,
        args.census_threshold,
        census.at_least_threshold,
        env.integrate_abs()
    );
    Ok(())
}

fn run_ptee(args: PteeArgs) -> Result<(), Error> {
    let points = PointSet::read_file(&args.input)?;
    let rows = p_chain_check(&points, args.a, args.t_max)?;
    let mut csv = String::from("t,p_integral,t_chi_a,pass\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{}\n",
            row.t, row.p_value, row.t_chi_a, row.pass
        ));
    }
    emit(&args.out, &csv)?;
    eprintln!(
        "χ_a = {:.12}, all pass: {}",
        chi_lower_bound(args.a)?,
        rows.iter().all(|r| r.pass)
    );
    Ok(())
}

fn run_variational(args: VariationalArgs) -> Result<(), Error> {
    let p = AdmissibleParams::new(args.a, args.t)?;
    let mode = match args.mode {
        ModeKind::Admissible => ExtremalMode::Admissible,
        ModeKind::Strong => ExtremalMode::Strong,
    };
    match args.run {
        RunKind::Assemble => {
            let assembled = assemble_extremal(&p, mode)?;
            emit(&args.out, &assembled.function.as_envelope().to_csv())?;
            eprintln!(
                "parts: {}×Q'({:.6}) + {}×Q\"({:.6}); ∫|f| = {:.12}; real-count total = {:.12}; rounding gap = {:.4}%",
                assembled.q_prime_count,
                assembled.q_prime_len,
                assembled.q_second_count,
                assembled.q_second_len,
                assembled.integral,
                assembled.real_count_total,
                100.0 * assembled.rounding_gap()
            );
        }
        RunKind::Check => {
            let assembled = assemble_extremal(&p, mode)?;
            let report = check_condition_a(&assembled.function, &p);
            let json = serde_json::json!({
                "report": report,
                "admissible": report.admissible(),
                "strongly_admissible": report.strongly_admissible(),
            });
            emit(&args.out, &format!("{json:#}\n"))?;
        }
        RunKind::Oracle => {
            let family = match args.family {
                FamilyKind::Structured => OracleFamily::Structured,
                FamilyKind::Perturbed => OracleFamily::Perturbed,
            };
            let outcome = oracle_minimize(&p, family, args.resolution)?;
            let json = serde_json::json!({
                "minimum": outcome.minimum,
                "improving_perturbations": outcome.improving_perturbations,
                "chi_a": chi_lower_bound(args.a)?,
            });
            emit(&args.out, &format!("{json:#}\n"))?;
        }
        RunKind::Forms => {
            let chi = args.chi.ok_or_else(|| {
                Error::InvalidParameter("--chi is required for --run forms".into())
            })?;
            let selector = optimal_slope_selector(0.0, chi / 2.0, 0.5, &p)?;
            let json = serde_json::json!({
                "chi": chi,
                "q1_integral": q1_integral(chi, &p)?,
                "q2_integral": q2_integral(chi, &p)?,
                "strong_q_integral": strong_q_integral(chi, &p).ok(),
                "chi_a": chi_lower_bound(args.a)?,
                "centered_optimal_delta": optimal_delta(0.0, chi, chi / 2.0, &p)?,
                "optimal_selector_unclamped": selector.unclamped,
                "optimal_selector": selector.clamped,
            });
            emit(&args.out, &format!("{json:#}\n"))?;
        }
    }
    Ok(())
}

fn run_bound(args: BoundArgs) -> Result<(), Error> {
    let _ = args.optimize;
    let report = bound_report(args.a, args.tol, args.scan)?;
    let data = match args.format {
        BoundFormat::Json => format!(
            "{:#}\n",
            serde_json::to_value(&report).expect("report serializes")
        ),
        BoundFormat::Csv => {
            let mut csv = String::from("key,value\n");
            csv.push_str(&format!("a,{:.16e}\n", report.a));
            csv.push_str(&format!("chi_a,{:.16e}\n", report.chi_a));
            csv.push_str(&format!("c_of_a,{:.16e}\n", report.c_of_a));
            csv.push_str(&format!("a_star,{:.16e}\n", report.a_star));
            csv.push_str(&format!("chi_a_star,{:.16e}\n", report.chi_a_star));
            csv.push_str(&format!("c_star_lower,{:.16e}\n", report.c_star_lower));
            if let Some(scan) = &report.scan {
                for (a, c) in scan {
                    csv.push_str(&format!("scan,{a:.16e}:{c:.16e}\n"));
                }
            }
            csv
        }
    };
    emit(&args.out, &data)?;
    eprintln!("a* = {:.6}, c* ≥ {:.7}", report.a_star, report.c_star_lower);
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), Error> {
    let points = PointSet::read_file(&args.input)?;
    let schedule = schedule_of(args.schedule, args.ratio, 4096);
    let v = verify_bound_with(&points, args.a, schedule)?;
    let json = serde_json::to_value(v).expect("verification serializes");
    emit(&args.out, &format!("{json:#}\n"))?;
    eprintln!(
        "holds = {}, witness n = {}, margin = {:.6}",
        v.holds, v.witness_n, v.margin
    );
    Ok(())
}
