//! Command-line front end: validate/decompose correlation matrices, generate
//! sample batches, compare against the Gaussian-copula construction, and
//! verify generated data.
//!
//! Exit codes: 0 success, 1 verification failed, 2 domain error (invalid
//! matrix or parameter), 64 usage error, 65 malformed data file.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use tricop::gaussian::{
    self, gaussian_attainable, gaussian_copula_matrix, sample_gaussian_copula, GaussianCorrelation,
};
use tricop::sampler::{read_xyz_csv, BatchError};
use tricop::{
    decompose_with_tol, sample_2d, sample_mixture, verify_batch, BetaParameter, CorrelationMatrix3,
    RngStream, SampleBatch,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(
    name = "tricop",
    version,
    about = "Triples with symmetric-beta marginals and a prescribed correlation matrix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The three off-diagonal entries of the target correlation matrix.
#[derive(Args)]
struct TargetArgs {
    /// Correlation of coordinates 2 and 3
    #[arg(short, allow_negative_numbers = true)]
    p: f64,
    /// Correlation of coordinates 1 and 3
    #[arg(short, allow_negative_numbers = true)]
    q: f64,
    /// Correlation of coordinates 1 and 2
    #[arg(short, allow_negative_numbers = true)]
    r: f64,
}

impl TargetArgs {
    fn matrix(&self) -> Result<CorrelationMatrix3, CliError> {
        CorrelationMatrix3::new(self.p, self.q, self.r).map_err(domain)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print determinant, validity, and classification of a matrix
    Check {
        #[command(flatten)]
        target: TargetArgs,
        /// Validity tolerance on the determinant
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Decompose a valid matrix into extremal components with weights
    Decompose {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Generate triples hitting the target matrix; writes CSV + metadata
    Sample {
        #[command(flatten)]
        target: TargetArgs,
        /// Marginal shape parameter (1 = uniform marginals)
        #[arg(short, default_value_t = 1.0)]
        k: f64,
        /// Number of triples
        #[arg(short)]
        n: usize,
        #[arg(long, env = "TRICOP_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path; metadata goes to <path>.meta.json
        #[arg(short, long = "out")]
        out: PathBuf,
    },
    /// Generate pairs with one prescribed correlation
    Sample2d {
        /// Correlation of the pair
        #[arg(short, allow_negative_numbers = true)]
        r: f64,
        #[arg(short, default_value_t = 1.0)]
        k: f64,
        #[arg(short)]
        n: usize,
        #[arg(long, env = "TRICOP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long = "out")]
        out: PathBuf,
    },
    /// Gaussian-copula comparison operations
    Gaussian {
        #[command(subcommand)]
        sub: GaussianCommand,
    },
    /// Check a generated CSV against a target matrix and shape k
    Verify {
        /// CSV file with header x,y,z
        csv: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(short, default_value_t = 1.0)]
        k: f64,
    },
    /// Emit a (p,q,r,delta) lattice of the validity region
    Region {
        /// Grid points per axis
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Output path (stdout when omitted)
        #[arg(short, long = "out")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GaussianCommand {
    /// Correlation of the transformed pair for a Gaussian correlation r
    Map {
        #[arg(short, allow_negative_numbers = true)]
        r: f64,
    },
    /// Gaussian correlation producing a given transformed correlation
    Invert {
        #[arg(short, allow_negative_numbers = true)]
        r: f64,
    },
    /// Can a Gaussian copula realize the target matrix?
    Attainable {
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Sample a Gaussian copula (uniform marginals) from a Gaussian matrix
    Sample {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(short)]
        n: usize,
        #[arg(long, env = "TRICOP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long = "out")]
        out: PathBuf,
    },
}

enum CliError {
    Domain(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Data(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn shape(k: f64) -> Result<BetaParameter, CliError> {
    BetaParameter::new(k).map_err(domain)
}

fn main() -> ExitCode {
    // Die quietly when a pipe consumer (head, less) closes early instead of
    // panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Check { target, tol } => {
            let m = target.matrix()?;
            let report = serde_json::json!({
                "delta": m.delta(),
                "valid": m.is_valid(tol),
                "class": m.classify(tol),
            });
            println!("{report}");
            Ok(if m.is_valid(tol) { 0 } else { EXIT_DOMAIN })
        }
        Command::Decompose { target, tol } => {
            let m = target.matrix()?;
            let d = decompose_with_tol(&m, tol).map_err(domain)?;
            println!("{}", serde_json::to_string_pretty(&d).map_err(data)?);
            Ok(0)
        }
        Command::Sample {
            target,
            k,
            n,
            seed,
            out,
        } => {
            let m = target.matrix()?;
            let kk = shape(k)?;
            let d = decompose_with_tol(&m, 1e-9).map_err(domain)?;
            let mut rng = RngStream::new(seed);
            let batch = sample_mixture(&d, kk, n, &mut rng).map_err(domain)?;
            let sidecar = batch.write_files(&out).map_err(data)?;
            print_written(&out, &sidecar, n)
        }
        Command::Sample2d { r, k, n, seed, out } => {
            let kk = shape(k)?;
            let mut rng = RngStream::new(seed);
            let batch = sample_2d(r, kk, n, &mut rng).map_err(domain)?;
            let sidecar = batch.write_files(&out).map_err(data)?;
            print_written(&out, &sidecar, n)
        }
        Command::Gaussian { sub } => run_gaussian(sub),
        Command::Verify { csv, target, k } => {
            let m = target.matrix()?;
            let kk = shape(k)?;
            let file = File::open(&csv).map_err(data)?;
            let (xs, ys, zs) = read_xyz_csv(BufReader::new(file)).map_err(|e| match e {
                BatchError::Io(io) => data(io),
                other => data(other),
            })?;
            let batch = SampleBatch::from_columns(xs, ys, zs, kk, m, 0);
            let report = verify_batch(&batch).map_err(domain)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(data)?);
            Ok(if report.pass { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Region { steps, out } => {
            if steps < 2 {
                return Err(CliError::Domain("need at least 2 grid steps".into()));
            }
            let mut body = String::from("p,q,r,delta\n");
            let coord = |i: usize| -1.0 + 2.0 * i as f64 / (steps - 1) as f64;
            for i in 0..steps {
                for j in 0..steps {
                    for l in 0..steps {
                        let (p, q, r) = (coord(i), coord(j), coord(l));
                        let m = CorrelationMatrix3::new(p, q, r).expect("grid is in range");
                        body.push_str(&format!("{p},{q},{r},{}\n", m.delta()));
                    }
                }
            }
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path).map_err(data)?);
                    w.write_all(body.as_bytes()).map_err(data)?;
                    w.flush().map_err(data)?;
                }
                None => print!("{body}"),
            }
            Ok(0)
        }
    }
}

fn run_gaussian(sub: GaussianCommand) -> Result<u8, CliError> {
    match sub {
        GaussianCommand::Map { r } => {
            let g = GaussianCorrelation::new(r).map_err(domain)?;
            println!("{}", gaussian::corr_transfer(g));
            Ok(0)
        }
        GaussianCommand::Invert { r } => {
            let g = gaussian::corr_transfer_inverse(r).map_err(domain)?;
            println!("{}", g.get());
            Ok(0)
        }
        GaussianCommand::Attainable { target } => {
            let m = target.matrix()?;
            let verdict = gaussian_attainable(&m).map_err(domain)?;
            println!("{}", serde_json::to_string_pretty(&verdict).map_err(data)?);
            Ok(0)
        }
        GaussianCommand::Sample {
            target,
            n,
            seed,
            out,
        } => {
            let m = target.matrix()?;
            // Validates positive semidefiniteness of the Gaussian input.
            gaussian_copula_matrix(&m).map_err(domain)?;
            let mut rng = RngStream::new(seed);
            let batch = sample_gaussian_copula(&m, n, &mut rng).map_err(domain)?;
            let sidecar = batch.write_files(&out).map_err(data)?;
            print_written(&out, &sidecar, n)
        }
    }
}

fn print_written(csv: &PathBuf, sidecar: &PathBuf, n: usize) -> Result<u8, CliError> {
    let report = serde_json::json!({
        "csv": csv,
        "meta": sidecar,
        "n": n,
    });
    println!("{report}");
    Ok(0)
}
