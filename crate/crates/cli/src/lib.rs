//! Command-line front end of the `tskit` sketching library.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 dimension or validation,
//! 5 verification failure.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod verify;

use std::io::Write;
use std::time::Instant;

pub use args::{Cli, Command};
pub use error::CliError;

/// Runs a parsed command line, honoring `--threads`.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let start = Instant::now();
    let name = match command {
        Command::Sketch(a) => {
            commands::sketch(a)?;
            "sketch"
        }
        Command::GaussianFeatures(a) => {
            commands::gaussian_features(a)?;
            "gaussian-features"
        }
        Command::Krr(a) => {
            let report = commands::krr(a)?;
            print_stdout(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            "krr"
        }
        Command::Verify(a) => {
            let report = verify::run_suite(a.suite, a.trials, a.seed)?;
            let value = serde_json::to_value(&report)?;
            if let Some(path) = &a.output {
                commands::write_json(path, &value)?;
            }
            print_stdout(&format!("{}\n", serde_json::to_string_pretty(&value)?))?;
            if !report.passed {
                let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
                return Err(CliError::Verification(format!(
                    "suite {} failed: {}",
                    report.suite,
                    names.join("; ")
                )));
            }
            "verify"
        }
        Command::Bench(a) => {
            let cfg = bench::BenchConfig {
                d: a.d,
                n: a.n,
                p: a.p,
                m: a.m,
                sparse_d: a.sparse_d,
                sparse_n: a.sparse_n,
                reps: a.reps,
                seed: a.seed,
            };
            let report = bench::run_bench(&cfg)?;
            let csv = report.to_csv()?;
            match &a.output {
                Some(path) => io::write_bytes(path, &csv)?,
                None => print_stdout(&String::from_utf8_lossy(&csv))?,
            }
            eprintln!(
                "tskit: guarded materializations during bench: {} ({} elements)",
                report.materializations.0, report.materializations.1
            );
            "bench"
        }
    };
    eprintln!("tskit: {name} finished in {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    Ok(())
}
