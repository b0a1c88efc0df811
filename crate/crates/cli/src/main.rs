mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pf_lattice::commutant::{
    commutant_equality_gap, is_super_commutant_irreducible, sample_semi_commuting,
    super_commutant_relation, Side,
};
use pf_lattice::lattice::io::{read_matrix, MatrixFile};
use pf_lattice::perron::{
    is_ideal_irreducible, peripheral_cycle_structure, IrreducibilityCertificate,
};
use pf_lattice::spectral::spectrum;
use pf_lattice::triangularize::commutator_nilpotency;
use pf_lattice::verify::{run_theorem_suite, SuiteConfig};
use pf_lattice::{Error, PosMatrix, Tolerances};
use serde::Serialize;

const TOL_ENV: &str = "PF_LATTICE_TOL";

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_REDUCIBLE: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_PRECONDITION: u8 = 5;
const EXIT_SUITE_FAIL: u8 = 6;

#[derive(Parser)]
#[command(
    name = "pf-lattice",
    version,
    about = "Perron-Frobenius certificates for nonnegative matrices"
)]
struct Cli {
    /// Zero threshold for matrix entries (overrides PF_LATTICE_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum and peripheral permutation structure of K.
    Analyze { k: PathBuf },
    /// Ideal irreducibility of matrices or of one super-commutant side.
    Irreducible(IrreducibleArgs),
    /// Super-commutant gaps, relation or samples of K.
    Commutant(CommutantArgs),
    /// Nilpotency certificate for the commutator of a semi-commuting pair.
    Triangularize { t: PathBuf, k: PathBuf },
    /// Seeded property suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct IrreducibleArgs {
    /// Irreducibility of the collection of all given matrices (default).
    #[arg(long, conflicts_with_all = ["super_right", "super_left"])]
    plain: bool,
    /// Irreducibility of the super right-commutant of one matrix.
    #[arg(long, conflicts_with = "super_left")]
    super_right: bool,
    /// Irreducibility of the super left-commutant of one matrix.
    #[arg(long)]
    super_left: bool,
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Right => Side::Right,
            SideArg::Left => Side::Left,
        }
    }
}

#[derive(Args)]
struct CommutantArgs {
    /// Largest commutator mass on each side.
    #[arg(long, conflicts_with_all = ["relation", "sample"])]
    gap: bool,
    /// Positivity pattern of the chosen side.
    #[arg(long, conflicts_with = "sample")]
    relation: bool,
    /// Number of members of the chosen side to sample.
    #[arg(long, value_name = "N")]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "sample")]
    seed: u64,
    #[arg(long, value_enum, default_value = "right")]
    side: SideArg,
    k: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    /// Dimensions: one value, a range `lo-hi`, or a comma list.
    #[arg(long, default_value = "4")]
    n: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated property names or aliases.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn io_failure(e: std::io::Error) -> Failure {
    Failure::new(EXIT_ERROR, format!("cannot write report: {e}"))
}

fn tolerances(flag: Option<f64>) -> Result<Tolerances, Failure> {
    let zero = match (flag, std::env::var(TOL_ENV)) {
        (Some(t), _) => Some(t),
        (None, Ok(text)) => Some(text.trim().parse::<f64>().map_err(|_| {
            Failure::new(EXIT_ERROR, format!("{TOL_ENV}={text:?} is not a number"))
        })?),
        (None, Err(_)) => None,
    };
    let tol = match zero {
        Some(z) => Tolerances::default().with_zero(z),
        None => Tolerances::default(),
    };
    tol.validate()
        .map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
    Ok(tol)
}

fn load(path: &Path, tol: &Tolerances) -> Result<PosMatrix, Failure> {
    read_matrix(path, tol).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let code = match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("pf-lattice: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Outcome {
    let tol = tolerances(cli.tol)?;
    let report = cli.report.as_deref();
    match &cli.command {
        Command::Analyze { k } => analyze(k, &tol, report),
        Command::Irreducible(args) => irreducible(args, &tol, report),
        Command::Commutant(args) => commutant(args, &tol, report),
        Command::Triangularize { t, k } => triangularize(t, k, &tol, report),
        Command::Suite(args) => suite(args, &tol, report),
    }
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    status: &'static str,
    kind: &'static str,
    reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<&'a pf_lattice::spectral::SpectrumReport>,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidMatrix(_) => "invalid_matrix",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::NonConvergence { .. } => "non_convergence",
        Error::QuasiNilpotentInput { .. } => "quasi_nilpotent_input",
        Error::BandSeparationFailure { .. } => "band_separation_failure",
        Error::DichotomyUndetected(_) => "dichotomy_undetected",
        Error::HypothesisViolated(_) => "hypothesis_violated",
        Error::PreconditionViolation(_) => "precondition_violation",
        Error::SolverFailure(_) => "solver_failure",
        Error::QuotientNotScalarZero { .. } => "quotient_not_scalar_zero",
    }
}

/// Emits diagnostics for a violated hypothesis and returns `code`.
fn diagnose(
    e: &Error,
    code: u8,
    spectrum: Option<&pf_lattice::spectral::SpectrumReport>,
    report: Option<&Path>,
) -> Outcome {
    let d = Diagnostics {
        status: "hypothesis_violated",
        kind: error_kind(e),
        reason: e.to_string(),
        spectrum,
    };
    output::emit(&d, report).map_err(io_failure)?;
    Err(Failure::new(code, e.to_string()))
}

#[derive(Serialize)]
struct AnalyzeReport {
    status: &'static str,
    spectrum: pf_lattice::spectral::SpectrumReport,
    peripheral_structure: pf_lattice::perron::PeripheralStructure,
    /// Cycles of the permutation, 1-based.
    cycles: Vec<Vec<usize>>,
}

fn analyze(path: &Path, tol: &Tolerances, report: Option<&Path>) -> Outcome {
    let k = load(path, tol)?;
    let spec = match spectrum(&k, tol) {
        Ok(s) => s,
        Err(e) => return diagnose(&e, EXIT_ERROR, None, report),
    };
    match peripheral_cycle_structure(&k, tol) {
        Ok(ps) => {
            let cycles = ps
                .cycles()
                .iter()
                .map(|c| c.iter().map(|i| i + 1).collect())
                .collect();
            let r = AnalyzeReport {
                status: "ok",
                spectrum: spec,
                peripheral_structure: ps,
                cycles,
            };
            output::emit(&r, report).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Err(
            e @ (Error::Io(_)
            | Error::Parse(_)
            | Error::InvalidMatrix(_)
            | Error::NonConvergence { .. }),
        ) => diagnose(&e, EXIT_ERROR, Some(&spec), report),
        Err(e) => diagnose(&e, EXIT_HYPOTHESIS, Some(&spec), report),
    }
}

#[derive(Serialize)]
struct IrreducibleReport {
    mode: &'static str,
    #[serde(flatten)]
    certificate: IrreducibilityCertificate,
}

fn irreducible(args: &IrreducibleArgs, tol: &Tolerances, report: Option<&Path>) -> Outcome {
    let side = match (args.super_right, args.super_left) {
        (true, _) => Some(Side::Right),
        (_, true) => Some(Side::Left),
        _ => None,
    };
    let matrices = args
        .paths
        .iter()
        .map(|p| load(p, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let (mode, cert) = match side {
        None => {
            let n = matrices[0].n();
            if matrices.iter().any(|m| m.n() != n) {
                return Err(Failure::new(EXIT_ERROR, "matrices differ in dimension"));
            }
            let cert = is_ideal_irreducible(matrices.iter(), tol)
                .map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
            ("plain", cert)
        }
        Some(side) => {
            if matrices.len() != 1 {
                return Err(Failure::new(
                    EXIT_ERROR,
                    "super-commutant modes take exactly one matrix",
                ));
            }
            let cert = is_super_commutant_irreducible(&matrices[0], side, tol)
                .map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
            let mode = match side {
                Side::Right => "super_right",
                Side::Left => "super_left",
            };
            (mode, cert)
        }
    };
    let code = if cert.irreducible {
        EXIT_OK
    } else {
        EXIT_REDUCIBLE
    };
    output::emit(
        &IrreducibleReport {
            mode,
            certificate: cert,
        },
        report,
    )
    .map_err(io_failure)?;
    Ok(code)
}

#[derive(Serialize)]
struct GapReport {
    gap_right: f64,
    gap_left: f64,
}

#[derive(Serialize)]
struct RelationReport {
    side: Side,
    n: usize,
    edges: Vec<Vec<bool>>,
    /// Off-diagonal edges `[i, j]`, 1-based.
    off_diagonal: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct SampleReport {
    side: Side,
    seed: u64,
    degenerate: bool,
    samples: Vec<MatrixFile>,
}

fn lp_failure(e: Error) -> Failure {
    match e {
        Error::SolverFailure(_) => Failure::new(EXIT_SOLVER, e.to_string()),
        _ => Failure::new(EXIT_ERROR, e.to_string()),
    }
}

fn commutant(args: &CommutantArgs, tol: &Tolerances, report: Option<&Path>) -> Outcome {
    let k = load(&args.k, tol)?;
    let side = Side::from(args.side);
    if args.gap {
        let (gap_right, gap_left) = commutant_equality_gap(&k, tol).map_err(lp_failure)?;
        output::emit(
            &GapReport {
                gap_right,
                gap_left,
            },
            report,
        )
        .map_err(io_failure)?;
    } else if args.relation {
        let rel = super_commutant_relation(&k, side, tol).map_err(lp_failure)?;
        let mut off_diagonal = Vec::new();
        for i in 0..rel.n {
            for j in 0..rel.n {
                if i != j && rel.edges[i][j] {
                    off_diagonal.push([i + 1, j + 1]);
                }
            }
        }
        let r = RelationReport {
            side,
            n: rel.n,
            edges: rel.edges,
            off_diagonal,
        };
        output::emit(&r, report).map_err(io_failure)?;
    } else if let Some(count) = args.sample {
        let s = sample_semi_commuting(&k, side, args.seed, count, tol).map_err(lp_failure)?;
        let r = SampleReport {
            side,
            seed: args.seed,
            degenerate: s.degenerate,
            samples: s.matrices.iter().map(MatrixFile::from).collect(),
        };
        output::emit(&r, report).map_err(io_failure)?;
    } else {
        return Err(Failure::new(
            EXIT_ERROR,
            "one of --gap, --relation or --sample is required",
        ));
    }
    Ok(EXIT_OK)
}

fn triangularize(t: &Path, k: &Path, tol: &Tolerances, report: Option<&Path>) -> Outcome {
    let t = load(t, tol)?;
    let k = load(k, tol)?;
    match commutator_nilpotency(&t, &k, tol) {
        Ok(cert) => {
            output::emit(&cert, report).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Err(
            e @ (Error::Io(_)
            | Error::Parse(_)
            | Error::InvalidMatrix(_)
            | Error::NonConvergence { .. }),
        ) => Err(Failure::new(EXIT_ERROR, e.to_string())),
        Err(e) => diagnose(&e, EXIT_PRECONDITION, None, report),
    }
}

/// `"4"`, `"3-8"` or `"3,5,7"`.
fn parse_dims(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::new(EXIT_ERROR, format!("invalid dimension list {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, hi)) = text.split_once('-') {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(num).collect()
}

fn suite(args: &SuiteArgs, tol: &Tolerances, report: Option<&Path>) -> Outcome {
    let mut config = SuiteConfig::new(parse_dims(&args.n)?, args.trials, args.seed);
    config.tolerances = *tol;
    if !args.only.is_empty() {
        config.only = Some(args.only.clone());
    }
    let r = run_theorem_suite(&config).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
    output::emit(&r, report).map_err(io_failure)?;
    Ok(if r.all_pass() {
        EXIT_OK
    } else {
        EXIT_SUITE_FAIL
    })
}
