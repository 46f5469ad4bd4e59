//! Command-line driver: loads scenario files, runs the check batteries,
//! and writes machine-readable reports.
//!
//! Exit codes: 0 when no asserted check failed (diagnostics never affect
//! the code), 1 when at least one asserted check failed, 2 on parse or
//! I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use histpeg::report::{CheckRecord, Report};
use histpeg::scenario::ScenarioFile;
use histpeg::suite::{
    compare_report, entropy_report, gleason_report, peg_report, suite_report_from_file,
    suite_report_random, SuiteOptions,
};

#[derive(Parser)]
#[command(
    name = "histpeg",
    version,
    about = "Complex-valued peg calculus for quantum history propositions",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; defaults to the scenario file's seed (0 for --random)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the default tolerance of asserted checks
    #[arg(long)]
    tol: Option<f64>,
    /// Partial order on pegs: "flux" or "real-total"
    #[arg(long)]
    order: Option<String>,
    /// Write the report to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Append a wall-time record (breaks byte-identical reports)
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pegs for every listed history
    Peg {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the absorbed operators, verify their conditions, reconstruct
    /// and decompose them
    Gleason {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Entropy, grouping, conditional and strong-additivity checks
    Entropy {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decoherence functional, linear positivity, consistency, classical
    /// reduction
    Compare {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// The full property battery over a file or generated scenarios
    Suite {
        file: Option<PathBuf>,
        /// Generate this many scenarios from the seed instead of loading a file
        #[arg(long)]
        random: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn options(common: &CommonArgs, file: Option<&ScenarioFile>) -> SuiteOptions {
    let file_seed = file.map(|f| f.seed).unwrap_or(0);
    let file_order = file.map(|f| f.order.clone());
    let file_ks = file.map(|f| f.k_s).unwrap_or(1.0);
    SuiteOptions {
        seed: common.seed.unwrap_or(file_seed),
        order: common
            .order
            .clone()
            .or(file_order)
            .unwrap_or_else(|| "flux".into()),
        k_s: file_ks,
        tol: common.tol,
        timings: common.timings,
    }
}

fn emit(mut report: Report, common: &CommonArgs, started: Instant) -> anyhow::Result<ExitCode> {
    if common.timings {
        report.push(
            CheckRecord::diagnostic("meta.runtime", "-", report.seed)
                .with_residual("wall_time_ms", started.elapsed().as_secs_f64() * 1e3),
        );
        report.finalize();
    }
    let text = match common.format {
        Format::Json => report.to_canonical_json(),
        Format::Csv => report.to_csv()?,
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(if report.has_failures() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.command {
        Command::Peg { file, common } => {
            let sf = ScenarioFile::from_path(&file)?;
            let report = peg_report(&sf, &options(&common, Some(&sf)))?;
            emit(report, &common, started)
        }
        Command::Gleason { file, common } => {
            let sf = ScenarioFile::from_path(&file)?;
            let report = gleason_report(&sf, &options(&common, Some(&sf)))?;
            emit(report, &common, started)
        }
        Command::Entropy { file, common } => {
            let sf = ScenarioFile::from_path(&file)?;
            let report = entropy_report(&sf, &options(&common, Some(&sf)))?;
            emit(report, &common, started)
        }
        Command::Compare { file, common } => {
            let sf = ScenarioFile::from_path(&file)?;
            let report = compare_report(&sf, &options(&common, Some(&sf)))?;
            emit(report, &common, started)
        }
        Command::Suite {
            file,
            random,
            common,
        } => match (file, random) {
            (Some(path), None) => {
                let sf = ScenarioFile::from_path(&path)?;
                let report = suite_report_from_file(&sf, &options(&common, Some(&sf)))?;
                emit(report, &common, started)
            }
            (None, Some(n)) => {
                let report = suite_report_random(n, &options(&common, None))?;
                emit(report, &common, started)
            }
            (Some(_), Some(_)) => anyhow::bail!("pass either a file or --random, not both"),
            (None, None) => anyhow::bail!("suite needs a scenario file or --random <N>"),
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
