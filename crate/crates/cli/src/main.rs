use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use uq_cli::config::{DataSource, RiskConfig, StudyConfig};
use uq_cli::dyke::{render_dyke_csv, render_sample_csv, run_dyke_replicates, DykeStudy};
use uq_cli::report::{emit_report, ReportFormat};
use uq_cli::riskrun::{render_risk_json, run_risk};
use uq_cli::study::run_study;
use uq_cli::verify::verify_theorems;
use uq_cli::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "uq",
    version,
    about = "Decision-aware uncertainty quantification: estimation studies, \
             a flood-protection benchmark, estimator risk comparisons, and self-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an estimation study from a JSON config
    Estimate {
        /// Study configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the config's data source with a one-column CSV
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output report path
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Report format: json or csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Replicate benchmark of flood-probability estimators
    Dyke {
        /// Number of replicate datasets
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        /// Observations per replicate
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path for the replicate table
        #[arg(long)]
        out: PathBuf,
        /// Posterior draws per replicate
        #[arg(long, default_value_t = 20_000)]
        posterior_draws: usize,
        /// Also write one simulated discharge record with water levels
        #[arg(long)]
        sample_out: Option<PathBuf>,
    },
    /// Benchmark estimator risk from a JSON config
    Risk {
        #[arg(long)]
        config: PathBuf,
        /// Output JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in self-checks
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Estimate {
            config,
            data,
            out,
            seed,
            format,
        } => {
            let started = Instant::now();
            let mut cfg = StudyConfig::load(&config)?;
            if let Some(path) = data {
                cfg.data = DataSource::File(path.display().to_string());
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let format: ReportFormat = format.parse()?;
            let report = run_study(&cfg)?;
            emit_report(&report, &out, format)?;
            eprintln!(
                "study complete in {:.2}s: {} entries, posterior via {}",
                started.elapsed().as_secs_f64(),
                report.entries.len(),
                report.posterior
            );
            Ok(0)
        }
        Command::Dyke {
            replicates,
            n,
            seed,
            out,
            posterior_draws,
            sample_out,
        } => {
            let started = Instant::now();
            let mut study = DykeStudy::standard(replicates, n, seed)?;
            study.posterior_draws = posterior_draws;
            let table = run_dyke_replicates(&study)?;
            write_text(&out, &render_dyke_csv(&table))?;
            if let Some(path) = sample_out {
                write_text(&path, &render_sample_csv(&study)?)?;
            }
            eprintln!(
                "dyke benchmark complete in {:.2}s: {} rows, {} failures",
                started.elapsed().as_secs_f64(),
                table.rows.len(),
                table.failures.len()
            );
            Ok(0)
        }
        Command::Risk { config, out } => {
            let started = Instant::now();
            let cfg = RiskConfig::load(&config)?;
            let report = run_risk(&cfg)?;
            write_text(&out, &render_risk_json(&report))?;
            eprintln!(
                "risk benchmark complete in {:.2}s: {} estimators",
                started.elapsed().as_secs_f64(),
                report.entries.len()
            );
            Ok(0)
        }
        Command::Verify { seed } => {
            let report = verify_theorems(seed)?;
            print!("{}", report.render());
            Ok(if report.all_passed() { 0 } else { 3 })
        }
    }
}
