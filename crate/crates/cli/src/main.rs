use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use regime_ffnn::dataset::synthetic::LevelShock;
use regime_ffnn_cli::commands::{cmd_plot, cmd_predict, cmd_stats, cmd_synth, SynthOptions};
use regime_ffnn_cli::{run_experiment, CliError, ExperimentConfig, Overrides};

/// Log filter variable, e.g. `REGIME_FFNN_LOG=info`.
const LOG_ENV: &str = "REGIME_FFNN_LOG";

#[derive(Parser)]
#[command(
    name = "regime-ffnn",
    version,
    about = "Feed-forward network experiments over regime-split daily series"
)]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for weight initialization and shuffling; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics of the configured columns
    Stats,
    /// Train and evaluate one network set per regime
    Run {
        /// Fit the scaler on each whole regime instead of its training block
        #[arg(long)]
        fit_global: bool,
    },
    /// Predict with a saved model and scaler
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scaler: PathBuf,
        /// CSV with a date column and the model's input columns
        #[arg(long)]
        input: PathBuf,
        /// Output CSV; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Chart a prediction CSV (date, actual, predicted) as SVG
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Output SVG; the input path with an .svg extension when omitted
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Write a synthetic daily-market CSV
    Synth {
        #[arg(long, default_value_t = 1845)]
        rows: usize,
        #[arg(long, default_value = "2008-12-01")]
        start: NaiveDate,
        /// Row index from which a level shock applies
        #[arg(long, requires = "shock_magnitude")]
        shock_at: Option<usize>,
        /// Shock size as a fraction of each column's mean
        #[arg(long, allow_hyphen_values = true)]
        shock_magnitude: Option<f64>,
        /// Columns the shock applies to (default: all)
        #[arg(long, value_delimiter = ',')]
        shock_columns: Vec<String>,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_config(cli: &Cli, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    config.apply(overrides);
    Ok(config)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let mut overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        fit_global: false,
    };
    match &cli.command {
        Command::Stats => {
            let config = load_config(&cli, &overrides)?;
            print!("{}", cmd_stats(&config)?);
            Ok(0)
        }
        Command::Run { fit_global } => {
            overrides.fit_global = *fit_global;
            let config = load_config(&cli, &overrides)?;
            let summary = run_experiment(&config)?;
            for (name, e) in summary.failures() {
                eprintln!("regime {name}: {e}");
            }
            println!("{}", summary.out_dir.display());
            Ok(summary.exit_code())
        }
        Command::Predict {
            model,
            scaler,
            input,
            output,
        } => {
            let csv = cmd_predict(model, scaler, input)?;
            write_output(output.as_ref(), &csv)?;
            Ok(0)
        }
        Command::Plot {
            input,
            output,
            title,
        } => {
            let title = title.clone().unwrap_or_else(|| {
                input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let svg = cmd_plot(input, &title)?;
            let output = output
                .clone()
                .unwrap_or_else(|| input.with_extension("svg"));
            write_output(Some(&output), &svg)?;
            Ok(0)
        }
        Command::Synth {
            rows,
            start,
            shock_at,
            shock_magnitude,
            shock_columns,
            output,
        } => {
            let shocks = match (shock_at, shock_magnitude) {
                (Some(index), Some(magnitude)) => vec![LevelShock {
                    index: *index,
                    magnitude: *magnitude,
                    columns: shock_columns.clone(),
                }],
                _ => Vec::new(),
            };
            let options = SynthOptions {
                rows: *rows,
                seed: cli.seed.unwrap_or(0),
                start: *start,
                shocks,
            };
            cmd_synth(&options, output)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
