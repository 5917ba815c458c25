//! The `run` command: one independent pipeline per regime.
//!
//! Output layout under the output directory:
//!
//! ```text
//! report.csv  report.txt  manifest.toml
//! <regime>/scaler.txt
//! <regime>/model.txt                 (joint targets)
//! <regime>/model_<target>.txt        (separate targets)
//! <regime>/loss_history[_<target>].csv
//! <regime>/predictions_<target>.csv  date,block,actual,predicted
//! <regime>/predictions_<target>.svg
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};

use regime_ffnn::dataset::{
    chronological_split, load_csv, slice_regime, RegimeSpec, SplitFrame, TimeSeriesFrame,
};
use regime_ffnn::metrics::{evaluate, predict_frame, EvaluationReport};
use regime_ffnn::trainer::{train, StopReason};
use regime_ffnn::{build_network, hidden_neuron_count, MinMaxScaler, Network};

use crate::config::{Experiment, ExperimentConfig, ScalerPolicy, TargetMode};
use crate::{svg, CliError};

#[derive(Debug, Clone)]
pub struct ModelOutcome {
    pub targets: Vec<String>,
    pub file: String,
    pub inputs: usize,
    pub hidden: usize,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub best_epoch: usize,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone)]
pub struct RegimeOutcome {
    pub name: String,
    pub rows: usize,
    pub sizes: (usize, usize, usize),
    pub models: Vec<ModelOutcome>,
    /// Test-block reads between splitting and the start of evaluation.
    pub test_reads_before_evaluation: usize,
    pub report: EvaluationReport,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub regimes: Vec<(String, Result<RegimeOutcome, CliError>)>,
    pub report: EvaluationReport,
}

impl RunSummary {
    /// 0 when every regime completed, else the code of the first failure.
    pub fn exit_code(&self) -> i32 {
        self.regimes
            .iter()
            .find_map(|(_, r)| r.as_ref().err().map(CliError::exit_code))
            .unwrap_or(0)
    }

    pub fn failures(&self) -> Vec<(&str, &CliError)> {
        self.regimes
            .iter()
            .filter_map(|(n, r)| r.as_ref().err().map(|e| (n.as_str(), e)))
            .collect()
    }
}

/// File-name-safe form of a column or regime name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Validates the config, loads the data, runs every regime (in parallel) and
/// writes the artifacts. Per-regime failures are collected in the summary;
/// only config and load failures return `Err`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let exp = config.validate()?;
    let frame = load_csv(&exp.data_path, &exp.schema)?;
    std::fs::create_dir_all(&exp.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", exp.out_dir.display())))?;

    let results: Vec<Result<RegimeOutcome, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = exp
            .regimes
            .iter()
            .map(|regime| s.spawn(|| run_regime(&exp, &frame, regime)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Training("regime worker panicked".into())))
            })
            .collect()
    });

    let mut report = EvaluationReport::new(exp.hit_epsilon);
    let mut regimes = Vec::new();
    for (regime, result) in exp.regimes.iter().zip(results) {
        match &result {
            Ok(outcome) => report.extend(outcome.report.clone()),
            Err(e) => warn!("regime '{}' failed: {e}", regime.name),
        }
        regimes.push((regime.name.clone(), result));
    }
    let summary = RunSummary {
        out_dir: exp.out_dir.clone(),
        regimes,
        report,
    };

    write(&exp.out_dir.join("report.csv"), summary.report.to_csv())?;
    write(
        &exp.out_dir.join("report.txt"),
        summary
            .report
            .to_table(&report_header(config, &exp, &summary)),
    )?;
    write(
        &exp.out_dir.join("manifest.toml"),
        manifest(config, &exp, &summary),
    )?;
    Ok(summary)
}

fn run_regime(
    exp: &Experiment,
    frame: &TimeSeriesFrame,
    regime: &RegimeSpec,
) -> Result<RegimeOutcome, CliError> {
    let context = |e: CliError| match e {
        CliError::Config(m) => CliError::Config(format!("regime '{}': {m}", regime.name)),
        CliError::Data(m) => CliError::Data(format!("regime '{}': {m}", regime.name)),
        CliError::Training(m) => CliError::Training(format!("regime '{}': {m}", regime.name)),
    };
    run_regime_inner(exp, frame, regime).map_err(context)
}

fn run_regime_inner(
    exp: &Experiment,
    frame: &TimeSeriesFrame,
    regime: &RegimeSpec,
) -> Result<RegimeOutcome, CliError> {
    let dir = exp.out_dir.join(file_stem(&regime.name));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;

    let slice = slice_regime(frame, regime)?;
    let split = chronological_split(&slice, exp.fractions)?;
    let scaler = match exp.scaler {
        ScalerPolicy::TrainOnly => MinMaxScaler::fit(split.train())?,
        ScalerPolicy::Global => MinMaxScaler::fit(&slice)?,
    };
    let scaled = split.map_blocks(|b| scaler.transform(b))?;
    scaler.save(dir.join("scaler.txt"))?;

    let inputs = exp.input_names();
    let groups: Vec<Vec<String>> = match exp.target_mode {
        TargetMode::Joint => vec![exp.target_names()],
        TargetMode::Separate => exp.target_names().into_iter().map(|t| vec![t]).collect(),
    };

    let mut trained: Vec<(Network, SplitFrame, ModelOutcome)> = Vec::new();
    for group in groups {
        let names: Vec<&str> = group.iter().map(String::as_str).collect();
        let sub = scaled.map_blocks(|b| b.select_targets(&names))?;
        let train_rows = sub.sizes().0;
        let hidden = match exp.hidden {
            Some(h) => h,
            None => {
                let h = hidden_neuron_count(inputs.len(), group.len(), train_rows);
                info!(
                    "regime '{}' [{}]: ({} inputs + {} outputs) / 2 + sqrt({train_rows} training rows) -> {h} hidden neurons",
                    regime.name,
                    group.join(", "),
                    inputs.len(),
                    group.len()
                );
                h
            }
        };
        let net = build_network(
            inputs.len(),
            hidden,
            group.len(),
            exp.hidden_activation,
            exp.output_activation,
            exp.network_seed,
        )?
        .with_names(inputs.clone(), group.clone())?;
        let report = train(net, &sub, &exp.training)?;
        info!(
            "regime '{}' [{}]: {} epochs ({}), train loss {:e}",
            regime.name,
            group.join(", "),
            report.epochs_run,
            report.stop_reason,
            report
                .train_loss_history
                .last()
                .copied()
                .unwrap_or(f64::NAN)
        );

        let suffix = match exp.target_mode {
            TargetMode::Joint => String::new(),
            TargetMode::Separate => format!("_{}", file_stem(&group[0])),
        };
        let file = format!("model{suffix}.txt");
        report.final_network.save(dir.join(&file))?;
        let mut history = Vec::new();
        report.write_loss_history(&mut history)?;
        write(&dir.join(format!("loss_history{suffix}.csv")), history)?;

        let outcome = ModelOutcome {
            targets: group,
            file,
            inputs: inputs.len(),
            hidden,
            epochs_run: report.epochs_run,
            stop_reason: report.stop_reason,
            best_epoch: report.best_epoch,
            final_train_loss: report
                .train_loss_history
                .last()
                .copied()
                .unwrap_or(f64::NAN),
        };
        trained.push((report.final_network, sub, outcome));
    }

    // Nothing so far may have touched the test rows.
    let test_reads_before_evaluation = split.access().test_reads();
    if test_reads_before_evaluation != 0 {
        return Err(CliError::Training(format!(
            "test block read {test_reads_before_evaluation} times before evaluation"
        )));
    }

    let mut report = EvaluationReport::new(exp.hit_epsilon);
    for (net, sub, _) in &trained {
        report.extend(evaluate(net, &scaler, sub, &regime.name, exp.hit_epsilon)?);
    }

    let blocks = [
        ("train", split.train()),
        ("validation", split.validation()),
        ("test", split.test()),
    ];
    for (net, _, outcome) in &trained {
        let predictions: Vec<Vec<Vec<f64>>> = blocks
            .iter()
            .map(|(_, b)| predict_frame(net, &scaler, b))
            .collect::<Result<_, _>>()?;
        for (k, target) in outcome.targets.iter().enumerate() {
            let col = slice.column_index(target).expect("validated target");
            let mut csv = String::from("date,block,actual,predicted\n");
            let mut dates = Vec::new();
            let mut actual = Vec::new();
            let mut predicted = Vec::new();
            for ((label, block), preds) in blocks.iter().zip(&predictions) {
                for (row, p) in block.rows().iter().zip(preds) {
                    let _ = writeln!(csv, "{},{label},{},{}", row.date, row.values[col], p[k]);
                    dates.push(row.date);
                    actual.push(row.values[col]);
                    predicted.push(p[k]);
                }
            }
            let stem = format!("predictions_{}", file_stem(target));
            write(&dir.join(format!("{stem}.csv")), csv)?;
            if exp.plots {
                let title = format!("{}: {target}", regime.name);
                write(
                    &dir.join(format!("{stem}.svg")),
                    svg::render(&title, &dates, &actual, &predicted),
                )?;
            }
        }
    }

    Ok(RegimeOutcome {
        name: regime.name.clone(),
        rows: slice.len(),
        sizes: split.sizes(),
        models: trained.into_iter().map(|(_, _, o)| o).collect(),
        test_reads_before_evaluation,
        report,
    })
}

fn batch_label(exp: &Experiment) -> String {
    exp.training.batch_mode.to_string()
}

fn report_header(config: &ExperimentConfig, exp: &Experiment, summary: &RunSummary) -> Vec<String> {
    let t = &exp.training;
    let data = config
        .data
        .path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let f = exp.fractions;
    let mut lines = vec![
        format!("data {data}, seed {}", exp.seed),
        format!("split train {} / validation {} / test {}, scaler fit {}", f.train, f.validation, f.test, exp.scaler),
        format!(
            "network {}/{} activations, targets {}, init seed {}",
            exp.hidden_activation, exp.output_activation, exp.target_mode, exp.network_seed
        ),
        format!(
            "training lr {}, momentum {}, batch {}, max epochs {}, patience {}, tolerance {:e}, shuffle seed {}",
            t.learning_rate,
            t.momentum,
            batch_label(exp),
            t.max_epochs,
            t.patience,
            t.tolerance,
            t.seed
        ),
    ];
    for (name, result) in &summary.regimes {
        match result {
            Ok(o) => {
                let (a, b, c) = o.sizes;
                lines.push(format!(
                    "regime {name}: {} rows (train {a}, validation {b}, test {c})",
                    o.rows
                ));
                for m in &o.models {
                    lines.push(format!(
                        "  [{}] {}-{}-{}, {} epochs ({}), best validation epoch {}",
                        m.targets.join(", "),
                        m.inputs,
                        m.hidden,
                        m.targets.len(),
                        m.epochs_run,
                        m.stop_reason,
                        m.best_epoch
                    ));
                }
            }
            Err(e) => lines.push(format!("regime {name}: FAILED {e}")),
        }
    }
    lines
}

fn manifest(config: &ExperimentConfig, exp: &Experiment, summary: &RunSummary) -> String {
    let mut resolved = config.clone();
    resolved.seed = exp.seed;
    resolved.network.seed = Some(exp.network_seed);
    resolved.training.seed = Some(exp.training.seed);
    resolved.resolved = summary
        .regimes
        .iter()
        .map(|(name, result)| {
            let mut t = toml::Table::new();
            t.insert("regime".into(), name.clone().into());
            match result {
                Ok(o) => {
                    t.insert("status".into(), "ok".into());
                    t.insert("rows".into(), (o.rows as i64).into());
                    t.insert("train_rows".into(), (o.sizes.0 as i64).into());
                    t.insert("validation_rows".into(), (o.sizes.1 as i64).into());
                    t.insert("test_rows".into(), (o.sizes.2 as i64).into());
                    t.insert(
                        "test_reads_before_evaluation".into(),
                        (o.test_reads_before_evaluation as i64).into(),
                    );
                    let models: Vec<toml::Value> = o
                        .models
                        .iter()
                        .map(|m| {
                            let mut mt = toml::Table::new();
                            mt.insert("file".into(), m.file.clone().into());
                            mt.insert(
                                "targets".into(),
                                toml::Value::Array(
                                    m.targets.iter().cloned().map(Into::into).collect(),
                                ),
                            );
                            mt.insert("hidden".into(), (m.hidden as i64).into());
                            mt.insert("epochs_run".into(), (m.epochs_run as i64).into());
                            mt.insert("stop_reason".into(), m.stop_reason.as_str().into());
                            mt.insert("best_epoch".into(), (m.best_epoch as i64).into());
                            toml::Value::Table(mt)
                        })
                        .collect();
                    t.insert("models".into(), toml::Value::Array(models));
                }
                Err(e) => {
                    t.insert("status".into(), "failed".into());
                    t.insert("error".into(), e.to_string().into());
                }
            }
            t
        })
        .collect();
    let mut out =
        String::from("# Written by `regime-ffnn run`; usable as a config to repeat the run.\n");
    out.push_str(&resolved.to_toml());
    out
}
