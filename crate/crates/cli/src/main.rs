use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eby_cli::output::read_json;
use eby_cli::plot::{parse_chart, render_svg};
use eby_cli::report::{report_csv, run_report, Procedure, ReportInput};
use eby_cli::selfcheck::run_checks;
use eby_cli::simulate::{simulate, Overrides, PValueArg, SimKind};
use eby_cli::{CliError, CliResult};

/// Post-selection confidence intervals with false coverage rate control.
#[derive(Parser)]
#[command(name = "eby", version)]
struct Cli {
    /// Worker threads for Monte-Carlo replications.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply e-BY, weighted e-BY or BY to families described in a JSON file.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        procedure: Option<Procedure>,
        #[arg(long)]
        delta: Option<f64>,
        /// CSV destination; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write its CSV and a manifest.
    Simulate {
        #[arg(value_enum)]
        kind: SimKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_enum)]
        pvalue_mode: Option<PValueArg>,
    },
    /// Render a simulate CSV as an SVG line chart.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Column to plot; defaults to fcr_mean (or mean).
        #[arg(long)]
        metric: Option<String>,
    },
    /// Run a quick invariant suite.
    Selfcheck,
}

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Report {
            config,
            procedure,
            delta,
            out,
        } => {
            let input: ReportInput = read_json(&config)?;
            let report = run_report(&input, procedure, delta)?;
            if report.procedure_label.contains("warning") {
                eprintln!("{}", report.procedure_label);
            }
            write_or_print(out.as_deref(), &report_csv(&report)?)
        }
        Command::Simulate {
            kind,
            config,
            out,
            seed,
            reps,
            pvalue_mode,
        } => simulate(
            kind,
            &config,
            &out,
            Overrides {
                seed,
                reps,
                pvalue_mode: pvalue_mode.map(Into::into),
            },
        ),
        Command::Plot { csv, out, metric } => {
            let text = fs::read_to_string(&csv)
                .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", csv.display())))?;
            let chart = parse_chart(&text, metric.as_deref())?;
            fs::write(out, render_svg(&chart))?;
            Ok(())
        }
        Command::Selfcheck => {
            let checks = run_checks();
            for c in &checks {
                println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(CliError::Internal(format!("{n} self-checks failed"))),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(CliError::Internal(e.to_string())),
        },
        None => run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eby: {e}");
            e.exit_code()
        }
    }
}
