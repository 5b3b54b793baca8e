use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dtd_core::harness::{self, ExperimentConfig, HarnessError, Method, Overrides};
use dtd_core::theory;

/// Drift-detection experiments with fixed and dynamically determined thresholds.
#[derive(Parser)]
#[command(name = "dtd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run(RunArgs),
    /// Run every `*.toml` config in a directory and write a combined report.
    Suite(RunArgs),
    /// Summarize results stored under a results directory.
    Report {
        /// Results directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the theory checks and print a JSON report.
    ValidateTheory {
        /// Also write the report to DIR/theory.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file (`run`) or directory of config files (`suite`).
    #[arg(long)]
    config: PathBuf,
    /// Results directory [default: the config's `output`, else `results`].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use seeds 0..N instead of the configured list.
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Run only this method.
    #[arg(long)]
    method: Option<Method>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides, HarnessError> {
        if self.seeds == Some(0) {
            return Err(HarnessError::Config("--seeds must be at least 1".into()));
        }
        if self.parallel == Some(0) {
            return Err(HarnessError::Config("--parallel must be at least 1".into()));
        }
        Ok(Overrides {
            seeds: self.seeds,
            method: self.method,
        })
    }

    fn out_dir(&self, config: Option<&ExperimentConfig>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.and_then(|c| c.output.clone()))
            .unwrap_or_else(|| PathBuf::from("results"))
    }
}

fn write_all(
    out: &Path,
    results: &[harness::ExperimentResult],
) -> Result<harness::Report, HarnessError> {
    for r in results {
        harness::write_result(out, r)?;
    }
    harness::summarize(results)
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let overrides = args.overrides()?;
    let mut config = ExperimentConfig::load(&args.config)?;
    overrides.apply(&mut config);
    config.validate()?;
    let out = args.out_dir(Some(&config));
    let results = harness::with_threads(args.parallel, || harness::run_config(&config))??;
    let report = write_all(&out, &results)?;
    print!("{}", report.table());
    Ok(())
}

fn suite(args: RunArgs) -> Result<(), HarnessError> {
    let overrides = args.overrides()?;
    let mut configs = harness::load_suite(&args.config)?;
    for c in &mut configs {
        overrides.apply(c);
        c.validate()?;
    }
    let out = args.out_dir(None);
    let results = harness::with_threads(args.parallel, || harness::run_suite(&configs))??;
    let report = write_all(&out, &results)?;
    let path = harness::write_report(&out, &report)?;
    print!("{}", report.table());
    eprintln!("report written to {}", path.display());
    Ok(())
}

fn report(out: &Path) -> Result<(), HarnessError> {
    let results = harness::load_results(out)?;
    let report = harness::summarize(&results)?;
    harness::write_report(out, &report)?;
    print!("{}", report.table());
    Ok(())
}

fn validate_theory(out: Option<PathBuf>, parallel: Option<usize>) -> Result<bool, HarnessError> {
    let report = harness::with_threads(parallel, theory::run_checks)?.map_err(|e| match e {
        theory::TheoryError::Harness(h) => h,
        other => HarnessError::Output(other.to_string()),
    })?;
    let json = report.to_json();
    if let Some(dir) = out {
        harness::write_json(&dir.join("theory.json"), &json)?;
    }
    print!("{json}");
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args).map(|_| true),
        Command::Suite(args) => suite(args).map(|_| true),
        Command::Report { out } => report(&out).map(|_| true),
        Command::ValidateTheory { out, parallel } => validate_theory(out, parallel),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some theory checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
