//! `properaff`: command-line front end for the properness toolkit.
//!
//! Every subcommand prints one report (JSON by default, aligned text with
//! `--text`) and exits 0 on pass, 1 on a property violation, 2 on bad input
//! and 3 when the question does not apply. Thread count follows
//! `RAYON_NUM_THREADS`.

mod commands;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use properaff::group::BuildOptions;
use properaff::Error;
use report::{Report, Status};
use spec::RepArgs;

#[derive(Parser, Debug)]
#[command(name = "properaff", version, about = "Root-system, Margulis-invariant and free-group experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Emit aligned two-column text.
    #[arg(long, global = true)]
    text: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Log-modulus gap below which eigenvalues form one cluster.
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weight set, dimension and classification of a representation.
    ClassifyRep(RepArgs),
    /// Search for (or check) a generically symmetric, extreme X₀.
    FindX0(FindX0Args),
    /// Whether the longest Weyl element moves a vector fixed by L.
    CheckCriterion(RepArgs),
    /// Jordan and Cartan projections, Margulis invariants and contraction.
    Margulis(MargulisArgs),
    /// Build a generating family satisfying the four hypotheses.
    BuildGroup(BuildArgs),
    /// Survey every cyclically reduced word of a built family.
    WordSurvey(SurveyArgs),
}

#[derive(Args, Debug)]
pub struct FindX0Args {
    #[command(flatten)]
    rep: RepArgs,
    /// Certify this vector instead of searching (comma-separated rationals).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    check: Option<Vec<String>>,
    /// Also evaluate the regularity predicates of this vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    predicates: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct MargulisArgs {
    #[command(flatten)]
    rep: RepArgs,
    /// JSON array of row-major (d+1)² affine matrices, or a single one.
    #[arg(long)]
    elements: Option<PathBuf>,
    /// Sample this many random regular elements as well.
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Norm of the Jordan projection of random elements.
    #[arg(long, default_value_t = 1.0)]
    jd_norm: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Number of generators.
    #[arg(long, default_value_t = BuildOptions::default().k)]
    k: usize,
    /// Power applied to the linear parts.
    #[arg(long, default_value_t = BuildOptions::default().power)]
    power: u32,
    #[arg(long, default_value_t = BuildOptions::default().m_norm)]
    m_norm: f64,
    #[arg(long, default_value_t = BuildOptions::default().jd_norm)]
    jd_norm: f64,
    #[arg(long, default_value_t = BuildOptions::default().c_bound)]
    c_bound: f64,
    #[arg(long, default_value_t = BuildOptions::default().s_threshold)]
    s_threshold: f64,
    #[arg(long, default_value_t = BuildOptions::default().retries)]
    retries: usize,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    rep: RepArgs,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
pub struct SurveyArgs {
    #[command(flatten)]
    rep: RepArgs,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 6)]
    max_len: usize,
    /// Write the per-word table as CSV; `-` sends it to stdout and the
    /// report to stderr.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also run the displacement probe on reduced words.
    #[arg(long)]
    properness: bool,
    /// Word length of the displacement probe.
    #[arg(long, default_value_t = 5)]
    probe_len: usize,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Replace the Margulis invariant of this generator by −M_C first.
    #[arg(long)]
    sabotage: Option<usize>,
}

/// A failed run: the status to exit with and why.
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidInput(_) | Error::Unsupported(..) | Error::NotDominant(_) | Error::TooLarge { .. } => {
                Status::BadInput
            }
            Error::NotApplicable(_) | Error::TriviallyFails(_) | Error::NonSplit => Status::NotApplicable,
            _ => Status::Fail,
        };
        Failure { status, message: e.to_string() }
    }
}

/// What a command hands back: the echo of its flags, a status and the payload.
pub struct Outcome {
    pub spec: serde_json::Value,
    pub status: Status,
    pub message: Option<String>,
    pub results: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.tol_rank {
        properaff::linalg::set_rank_tol(t);
    }
    if let Some(t) = cli.tol_cluster {
        properaff::dynamics::set_cluster_tol(t);
    }
    let start = Instant::now();
    let seed = cli.seed;
    let mut csv_to_stdout = false;
    let (name, res) = match &cli.command {
        Command::ClassifyRep(a) => ("classify-rep", commands::classify(a)),
        Command::FindX0(a) => ("find-x0", commands::find_x0(a, seed)),
        Command::CheckCriterion(a) => ("check-criterion", commands::check_criterion(a)),
        Command::Margulis(a) => ("margulis", commands::margulis(a, seed)),
        Command::BuildGroup(a) => ("build-group", commands::build_group(a, seed)),
        Command::WordSurvey(a) => {
            csv_to_stdout = a.csv.as_deref().is_some_and(|p| p.as_os_str() == "-");
            ("word-survey", commands::word_survey(a, seed))
        }
    };
    let (spec, status, message, results) = match res {
        Ok(o) => (o.spec, o.status, o.message, o.results),
        Err((spec, f)) => (spec, f.status, Some(f.message), serde_json::Value::Null),
    };
    let report = Report {
        command: name,
        spec,
        seed,
        status,
        message,
        results,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let out = report.render(cli.text);
    if csv_to_stdout {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    ExitCode::from(status.exit_code() as u8)
}
