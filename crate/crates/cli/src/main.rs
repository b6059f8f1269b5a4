//! `salsa`: command-line driver for channel-estimation sweeps, Kronecker
//! factorization studies and the invariant self-test.
//!
//! Data goes to the output file or stdout; progress and errors go to stderr.
//! Failures print one JSON object on stderr and exit with status 2.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use salsa_core::experiment::{
    enumerate_divisions, factorize_csv, factorize_matrix, matrix_from_csv, run_sweep, ExperimentConfig, SEED_ENV,
};
use salsa_core::kron::FactorShape;
use salsa_core::parallel::{with_jobs, Execution};
use salsa_core::selftest;

#[derive(Parser)]
#[command(name = "salsa", version, about = "Kronecker-structured MIMO-OFDM channel estimation experiments")]
#[command(after_help = format!("Environment:\n  {SEED_ENV}  master seed used when a sweep config sets none"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep described by a JSON config and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; falls back to the config's `output`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for concurrent trials.
        #[arg(long)]
        jobs: Option<usize>,
        /// Run trials one after another on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Sequential nearest-Kronecker factorization of a complex matrix.
    Factorize {
        /// CSV of `re,im` lines in column-major order.
        #[arg(long = "in")]
        input: PathBuf,
        /// `i1,i2,j1,j2`; the matrix is `i1·i2 × j1·j2`.
        #[arg(long)]
        shape: FactorShape,
        #[arg(long)]
        terms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every division of an `I × J` matrix into Kronecker factors.
    Scenarios {
        #[arg(long = "I", default_value_t = 64)]
        i: usize,
        #[arg(long = "J", default_value_t = 64)]
        j: usize,
    },
    /// Run the deterministic invariant suite.
    Selftest,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            jobs,
            sequential,
        } => {
            let cfg = ExperimentConfig::from_path(&config).with_context(|| format!("loading {}", config.display()))?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            eprintln!(
                "sweep: {} t_bs x {} snr points, {} trials each",
                cfg.t_bs.len(),
                cfg.snr_db.len(),
                cfg.trials
            );
            let table = with_jobs(jobs, || run_sweep(&cfg, exec))??;
            let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            emit(out.as_ref(), &table.to_csv())?;
            eprintln!("sweep: {} rows", table.rows.len());
            Ok(true)
        }
        Command::Factorize {
            input,
            shape,
            terms,
            out,
        } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let x = matrix_from_csv(&text, shape.rows(), shape.cols())?;
            let rows = factorize_matrix(&x, shape, terms)?;
            emit(out.as_ref(), &factorize_csv(&rows))?;
            Ok(true)
        }
        Command::Scenarios { i, j } => {
            if i == 0 || j == 0 {
                return Err(salsa_core::Error::InvalidShape("I and J must be positive".into()).into());
            }
            let mut text = String::from("scenario,i1,i2,j1,j2\n");
            for (n, s) in enumerate_divisions(i, j).iter().enumerate() {
                text.push_str(&format!("{},{},{},{},{}\n", n + 1, s.i1, s.i2, s.j1, s.j2));
            }
            emit(None, &text)?;
            Ok(true)
        }
        Command::Selftest => {
            let checks = selftest::run();
            let mut text = String::from("name,status,detail\n");
            for c in &checks {
                text.push_str(&format!("{c}\n"));
            }
            emit(None, &text)?;
            Ok(selftest::all_passed(&checks))
        }
    }
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "kind": kind, "error": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_line("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", error_line("selftest", "one or more checks failed"));
            ExitCode::from(1)
        }
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<salsa_core::Error>())
                .map(|c| c.kind())
                .unwrap_or("io");
            eprintln!("{}", error_line(kind, &format!("{e:#}")));
            ExitCode::from(2)
        }
    }
}
