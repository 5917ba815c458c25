//! `stats`, `predict`, `plot` and `synth`. `run` lives in [`crate::run`].

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;

use regime_ffnn::dataset::synthetic::{LevelShock, SyntheticSpec};
use regime_ffnn::dataset::{
    descriptive_stats, load_csv, read_table, save_csv, DescriptiveStats, LoadOptions,
};
use regime_ffnn::{generate_synthetic, ColumnRole, MinMaxScaler, Network};

use crate::config::ExperimentConfig;
use crate::{svg, CliError};

/// Statistics for every configured column. Returns the stdout table and
/// writes `stats.csv` into the output directory.
pub fn cmd_stats(config: &ExperimentConfig) -> Result<String, CliError> {
    let (path, schema) = config.data_schema()?;
    let frame = load_csv(&path, &schema)?;
    let stats = descriptive_stats(&frame)?;
    std::fs::create_dir_all(&config.output.dir)?;
    std::fs::write(config.output.dir.join("stats.csv"), stats_csv(&stats))?;
    Ok(stats_table(&stats))
}

pub fn stats_csv(stats: &DescriptiveStats) -> String {
    let mut out = String::from("column,n,mean,median,std_dev,skewness,excess_kurtosis,min,max\n");
    for c in &stats.columns {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.name, c.n, c.mean, c.median, c.std_dev, c.skewness, c.excess_kurtosis, c.min, c.max
        );
    }
    out
}

pub fn stats_table(stats: &DescriptiveStats) -> String {
    let header = [
        "column", "n", "mean", "median", "std dev", "skewness", "kurtosis", "min", "max",
    ];
    let mut rows = vec![header.map(String::from).to_vec()];
    for c in &stats.columns {
        let mut row = vec![c.name.clone(), c.n.to_string()];
        row.extend(
            [
                c.mean,
                c.median,
                c.std_dev,
                c.skewness,
                c.excess_kurtosis,
                c.min,
                c.max,
            ]
            .iter()
            .map(|v| format!("{v:.4}")),
        );
        rows.push(row);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| {
                if j == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  "));
    }
    out
}

/// Predictions in original units, one CSV row per input row:
/// `date,<target>...`. Models without stored column names take them from the
/// scaler sidecar, inputs first.
pub fn cmd_predict(model: &Path, scaler: &Path, input: &Path) -> Result<String, CliError> {
    let net = Network::load(model)?;
    let scaler = MinMaxScaler::load(scaler)?;
    let names_with = |role: ColumnRole| -> Vec<String> {
        scaler
            .ranges()
            .iter()
            .filter(|r| r.column.role == role)
            .map(|r| r.column.name.clone())
            .collect()
    };
    let inputs = if net.input_names().is_empty() {
        names_with(ColumnRole::Input)
    } else {
        net.input_names().to_vec()
    };
    let outputs = if net.output_names().is_empty() {
        names_with(ColumnRole::Target)
    } else {
        net.output_names().to_vec()
    };
    if inputs.len() != net.input_width() || outputs.len() != net.output_width() {
        return Err(CliError::Data(format!(
            "model is {}-in/{}-out but the scaler describes {} inputs and {} targets",
            net.input_width(),
            net.output_width(),
            inputs.len(),
            outputs.len()
        )));
    }

    let file = std::fs::File::open(input)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let table = read_table(file, &inputs, &LoadOptions::default())?;
    let mut out = String::from("date");
    for name in &outputs {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (date, raw) in table.dates.iter().zip(&table.values) {
        let scaled = scaler.scale_named(&inputs, raw)?;
        let y = net.forward(&scaled)?;
        let y = scaler.unscale_named(&outputs, &y)?;
        let _ = write!(out, "{date}");
        for v in y {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Dates, actual values, predicted values.
pub type PredictionSeries = (Vec<NaiveDate>, Vec<f64>, Vec<f64>);

/// Reads `date`, `actual` and `predicted` columns (others are ignored).
pub fn read_prediction_csv(path: &Path) -> Result<PredictionSeries, CliError> {
    let malformed = |m: String| CliError::Data(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| malformed(e.to_string()))?;
    let header = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| malformed(format!("missing '{name}' column")))
    };
    let (d, a, p) = (find("date")?, find("actual")?, find("predicted")?);
    let (mut dates, mut actual, mut predicted) = (Vec::new(), Vec::new(), Vec::new());
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let field = |j: usize| record.get(j).unwrap_or("");
        dates.push(
            NaiveDate::parse_from_str(field(d), "%Y-%m-%d")
                .map_err(|_| malformed(format!("row {}: bad date '{}'", i + 1, field(d))))?,
        );
        for (j, dest) in [(a, &mut actual), (p, &mut predicted)] {
            let v: f64 = field(j)
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| malformed(format!("row {}: bad number '{}'", i + 1, field(j))))?;
            dest.push(v);
        }
    }
    if dates.is_empty() {
        return Err(malformed("no rows".into()));
    }
    Ok((dates, actual, predicted))
}

pub fn cmd_plot(input: &Path, title: &str) -> Result<String, CliError> {
    let (dates, actual, predicted) = read_prediction_csv(input)?;
    Ok(svg::render(title, &dates, &actual, &predicted))
}

/// Options for `synth`.
#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub rows: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub shocks: Vec<LevelShock>,
}

/// Writes a synthetic daily-market CSV calibrated to the preset moments.
pub fn cmd_synth(options: &SynthOptions, output: &Path) -> Result<(), CliError> {
    let mut spec = SyntheticSpec::daily_market(options.start);
    for shock in &options.shocks {
        spec = spec.with_shock(shock.clone());
    }
    let frame = generate_synthetic(&spec, options.rows, options.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_csv(&frame, output)?;
    Ok(())
}
