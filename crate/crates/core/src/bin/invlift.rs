//! Command line front end: job files or inline flags in, JSON artifacts out.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use invlift::error::{Error, Result};
use invlift::invariants::Family;
use invlift::jobs::{
    render_output, run_corpus, run_job_with, JobKind, JobOutput, JobSpec,
};

#[derive(Parser)]
#[command(
    name = "invlift",
    version,
    about = "Lifts invariant-valued curves and surfaces through finite group quotients",
    after_help = "Numbers in JSON artifacts are exact rational strings; set \
                  INVLIFT_MAX_PRECISION to cap the precision-doubling retries \
                  (default 4096 bits)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Job description JSON file; inline flags override its fields.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Group family: symmetric_complex, signed_perm_real, or
    /// symmetric_real_trace_zero.
    #[arg(long)]
    family: Option<String>,
    /// Number of coordinates the group acts on.
    #[arg(long)]
    n: Option<usize>,
    /// Ball precision in bits.
    #[arg(long)]
    precision: Option<u32>,
    /// Working truncation order for series data.
    #[arg(long)]
    trunc: Option<u32>,
    /// Recursion budget (steps per branch; charts scale with it).
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated dyadic grid levels for diagnostics, e.g. 6,8,10,12.
    #[arg(long)]
    grid_levels: Option<String>,
    /// Relative Cauchy tolerance for the gradient integral ladder.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format; csv emits the sample grid of verify-lift.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Input payload: series literals, tracked polynomials, or invariant
    /// coordinates, depending on the subcommand.
    #[arg(allow_hyphen_values = true)]
    components: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generator set and degrees of a group family.
    Describe(CommonOpts),
    /// Lift invariant series in one parameter to per-chart root curves.
    LiftCurve(CommonOpts),
    /// Lift invariant series in two parameters through desingularization.
    LiftSurface(CommonOpts),
    /// Desingularize tracked plane polynomials by point blow-ups.
    Resolve {
        #[command(flatten)]
        common: CommonOpts,
        /// Half-width of the base box, as a rational literal.
        #[arg(long)]
        radius: Option<String>,
    },
    /// Test whether an invariant point lies in the image of the orbit map.
    CheckMembership(CommonOpts),
    /// Build a measurable section of the orbit map on a grid.
    Section {
        #[command(flatten)]
        common: CommonOpts,
        /// Half-width of the invariant box, as a rational literal.
        #[arg(long)]
        radius: Option<String>,
        /// Dyadic grid level (2^level cells per axis).
        #[arg(long)]
        level: Option<u32>,
    },
    /// Lift, glue, and run the full verification report.
    VerifyLift {
        #[command(flatten)]
        common: CommonOpts,
        /// Base dimension of the parameter space (1 or 2).
        #[arg(long)]
        nvars: Option<u8>,
    },
    /// Run a directory of job files against their expectations.
    RunCorpus {
        /// Directory of JobSpec JSON files.
        dir: PathBuf,
        /// Worker pool size.
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
}

fn parse_family(text: &str) -> Result<Family> {
    match text {
        "symmetric_complex" => Ok(Family::SymmetricComplex),
        "signed_perm_real" => Ok(Family::SignedPermReal),
        "symmetric_real_trace_zero" => Ok(Family::SymmetricRealTraceZero),
        other => Err(Error::Input(format!(
            "unknown family {other:?}; choose symmetric_complex, signed_perm_real, \
             or symmetric_real_trace_zero"
        ))),
    }
}

fn parse_levels(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| Error::Input(format!("bad grid level {p:?}: {e}")))
        })
        .collect()
}

fn build_spec(kind: JobKind, c: &CommonOpts) -> Result<JobSpec> {
    let mut spec = match &c.job {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot read job file {path:?}: {e}")))?;
            let mut s = JobSpec::from_json(&text)?;
            s.subcommand = kind;
            s
        }
        None => JobSpec::new(kind),
    };
    if let Some(f) = &c.family {
        spec.family = Some(parse_family(f)?);
    }
    if let Some(n) = c.n {
        spec.n = Some(n);
    }
    if !c.components.is_empty() {
        spec.components = c.components.clone();
    }
    if let Some(p) = c.precision {
        spec.precision = Some(p);
    }
    if let Some(t) = c.trunc {
        spec.trunc = Some(t);
    }
    if let Some(b) = c.budget {
        spec.budget = Some(b);
    }
    if let Some(g) = &c.grid_levels {
        spec.grid_levels = Some(parse_levels(g)?);
    }
    if let Some(t) = c.tol {
        spec.tol = Some(t);
    }
    Ok(spec)
}

fn emit(out: &JobOutput, common: &CommonOpts) -> Result<()> {
    let text = if common.format == "csv" {
        out.csv.clone().ok_or_else(|| {
            Error::Input("this subcommand has no CSV view; use --format json".into())
        })?
    } else {
        render_output(out)
    };
    match &common.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| Error::Input(format!("cannot write {path:?}: {e}")))?,
        None => print!("{text}"),
    }
    eprintln!("{}", out.summary);
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let (spec, common) = match &cli.command {
        Command::Describe(c) => (build_spec(JobKind::Describe, c)?, c),
        Command::LiftCurve(c) => (build_spec(JobKind::LiftCurve, c)?, c),
        Command::LiftSurface(c) => (build_spec(JobKind::LiftSurface, c)?, c),
        Command::Resolve { common, radius } => {
            let mut spec = build_spec(JobKind::Resolve, common)?;
            if let Some(r) = radius {
                spec.radius = Some(r.clone());
            }
            (spec, common)
        }
        Command::CheckMembership(c) => (build_spec(JobKind::CheckMembership, c)?, c),
        Command::Section {
            common,
            radius,
            level,
        } => {
            let mut spec = build_spec(JobKind::Section, common)?;
            if let Some(r) = radius {
                spec.radius = Some(r.clone());
            }
            if let Some(l) = level {
                spec.level = Some(*l);
            }
            (spec, common)
        }
        Command::VerifyLift { common, nvars } => {
            let mut spec = build_spec(JobKind::VerifyLift, common)?;
            if let Some(v) = nvars {
                spec.nvars = Some(*v);
            }
            (spec, common)
        }
        Command::RunCorpus { dir, workers } => {
            let summary = run_corpus(dir, *workers)?;
            print!("{}", summary.table());
            return Ok(if summary.all_pass() { 0 } else { 1 });
        }
    };
    let out = run_job_with(&spec, common.format == "csv")?;
    emit(&out, common)?;
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
