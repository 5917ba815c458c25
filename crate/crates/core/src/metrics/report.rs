use std::fmt::{self, Write as _};

use crate::dataset::{SplitFrame, TimeSeriesFrame};
use crate::network::Network;
use crate::scaling::MinMaxScaler;

use super::{hit_rate, mae, mape, rmse, MetricError};

/// Relative tolerance behind the hit rate: within 10 % of the actual value.
pub const DEFAULT_HIT_EPSILON: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Scaled,
    Original,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Scaled => "scaled",
            Units::Original => "original",
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metrics for one series. MAPE and hit rate are `None` when an actual value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub hit_rate: Option<f64>,
}

impl MetricSet {
    pub fn compute(actual: &[f64], predicted: &[f64], epsilon: f64) -> Result<Self, MetricError> {
        let relative = |r: Result<f64, MetricError>| match r {
            Ok(v) => Ok(Some(v)),
            Err(MetricError::ZeroActual(_)) => Ok(None),
            Err(e) => Err(e),
        };
        Ok(Self {
            n: actual.len(),
            mae: mae(actual, predicted)?,
            rmse: rmse(actual, predicted)?,
            mape: relative(mape(actual, predicted))?,
            hit_rate: relative(hit_rate(actual, predicted, epsilon))?,
        })
    }

    pub fn is_perfect(&self) -> bool {
        self.mae == 0.0 && self.rmse == 0.0
    }
}

/// One `(regime, target)` cell, in both scaled and original units.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationCell {
    pub regime: String,
    pub target: String,
    pub scaled: MetricSet,
    pub original: MetricSet,
}

impl EvaluationCell {
    pub fn metrics(&self, units: Units) -> &MetricSet {
        match units {
            Units::Scaled => &self.scaled,
            Units::Original => &self.original,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub hit_epsilon: f64,
    pub cells: Vec<EvaluationCell>,
}

const CSV_HEADER: &str = "regime,target,units,n,mae,rmse,mape,hit_rate,hit_epsilon";

impl EvaluationReport {
    pub fn new(hit_epsilon: f64) -> Self {
        Self {
            hit_epsilon,
            cells: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: EvaluationReport) {
        self.cells.extend(other.cells);
    }

    pub fn cell(&self, regime: &str, target: &str) -> Option<&EvaluationCell> {
        self.cells
            .iter()
            .find(|c| c.regime == regime && c.target == target)
    }

    fn ordered_unique(&self, key: impl Fn(&EvaluationCell) -> &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            let k = key(c);
            if !out.iter().any(|o| o == k) {
                out.push(k.to_string());
            }
        }
        out
    }

    pub fn regimes(&self) -> Vec<String> {
        self.ordered_unique(|c| &c.regime)
    }

    pub fn targets(&self) -> Vec<String> {
        self.ordered_unique(|c| &c.target)
    }

    /// Two rows per cell (scaled, original); floats in shortest round-trip
    /// form, empty fields for undefined MAPE / hit rate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            for units in [Units::Scaled, Units::Original] {
                let m = c.metrics(units);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    c.regime,
                    c.target,
                    units,
                    m.n,
                    m.mae,
                    m.rmse,
                    opt(m.mape),
                    opt(m.hit_rate),
                    self.hit_epsilon
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MetricError> {
        let err = |line: usize, message: String| MetricError::Parse { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, CSV_HEADER)) => {}
            _ => return Err(err(1, "unexpected header".into())),
        }
        let mut epsilon = DEFAULT_HIT_EPSILON;
        let mut cells: Vec<EvaluationCell> = Vec::new();
        let mut pending: Option<(String, String, MetricSet)> = None;
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(err(
                    line_no,
                    format!("expected 9 fields, found {}", f.len()),
                ));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(line_no, format!("bad number '{s}'")))
            };
            let opt = |s: &str| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            let set = MetricSet {
                n: f[3]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad count '{}'", f[3])))?,
                mae: num(f[4])?,
                rmse: num(f[5])?,
                mape: opt(f[6])?,
                hit_rate: opt(f[7])?,
            };
            epsilon = num(f[8])?;
            match (f[2], pending.take()) {
                ("scaled", None) => pending = Some((f[0].to_string(), f[1].to_string(), set)),
                ("original", Some((regime, target, scaled)))
                    if regime == f[0] && target == f[1] =>
                {
                    cells.push(EvaluationCell {
                        regime,
                        target,
                        scaled,
                        original: set,
                    })
                }
                _ => {
                    return Err(err(
                        line_no,
                        "rows must come in scaled/original pairs".into(),
                    ))
                }
            }
        }
        if pending.is_some() {
            return Err(err(0, "dangling scaled row".into()));
        }
        Ok(Self {
            hit_epsilon: epsilon,
            cells,
        })
    }

    /// Aligned table: one metric per row, one column per (regime, target).
    pub fn to_table(&self, header: &[String]) -> String {
        let regimes = self.regimes();
        let targets = self.targets();
        let columns: Vec<(String, String)> = regimes
            .iter()
            .flat_map(|r| targets.iter().map(move |t| (r.clone(), t.clone())))
            .filter(|(r, t)| self.cell(r, t).is_some())
            .collect();

        type Getter = fn(&MetricSet) -> Option<f64>;
        let metrics: [(&str, Getter); 4] = [
            ("MAE", |m| Some(m.mae)),
            ("RMSE", |m| Some(m.rmse)),
            ("MAPE %", |m| m.mape),
            ("Hit rate", |m| m.hit_rate),
        ];

        let mut grid: Vec<Vec<String>> = Vec::new();
        let mut regime_row = vec![String::new()];
        let mut target_row = vec!["Criterion".to_string()];
        for (r, t) in &columns {
            regime_row.push(r.clone());
            target_row.push(t.clone());
        }
        grid.push(regime_row);
        grid.push(target_row);
        for units in [Units::Original, Units::Scaled] {
            for (name, get) in &metrics {
                let mut row = vec![format!("{name} ({units})")];
                for (r, t) in &columns {
                    let m = self.cell(r, t).expect("filtered").metrics(units);
                    row.push(get(m).map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")));
                }
                grid.push(row);
            }
        }
        let mut n_row = vec!["n (test rows)".to_string()];
        for (r, t) in &columns {
            n_row.push(self.cell(r, t).expect("filtered").original.n.to_string());
        }
        grid.push(n_row);

        let widths: Vec<usize> = (0..=columns.len())
            .map(|j| grid.iter().map(|row| row[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(
            out,
            "# hit rate: |actual - predicted| / |actual| <= {}",
            self.hit_epsilon
        );
        for (i, row) in grid.iter().enumerate() {
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
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 1 {
                let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }
}

fn positions(frame: &TimeSeriesFrame, names: &[String]) -> Result<Vec<usize>, MetricError> {
    names
        .iter()
        .map(|n| {
            frame
                .column_index(n)
                .ok_or_else(|| MetricError::MissingColumn(n.clone()))
        })
        .collect()
}

fn io_columns(net: &Network, frame: &TimeSeriesFrame) -> (Vec<String>, Vec<String>) {
    let inputs = if net.input_names().is_empty() {
        frame.input_names()
    } else {
        net.input_names().to_vec()
    };
    let outputs = if net.output_names().is_empty() {
        frame.target_names()
    } else {
        net.output_names().to_vec()
    };
    (inputs, outputs)
}

/// Predictions in original units for every row of an unscaled frame.
/// Inputs are scaled, passed through the network, and the outputs de-scaled.
pub fn predict_frame(
    net: &Network,
    scaler: &MinMaxScaler,
    frame: &TimeSeriesFrame,
) -> Result<Vec<Vec<f64>>, MetricError> {
    let (inputs, outputs) = io_columns(net, frame);
    let idx = positions(frame, &inputs)?;
    frame
        .rows()
        .iter()
        .map(|row| {
            let raw: Vec<f64> = idx.iter().map(|&i| row.values[i]).collect();
            let scaled = scaler.scale_named(&inputs, &raw)?;
            let out = net.forward(&scaled)?;
            Ok(scaler.unscale_named(&outputs, &out)?)
        })
        .collect()
}

/// Metrics for every network output on the test block of a scaled split.
pub fn evaluate(
    net: &Network,
    scaler: &MinMaxScaler,
    split: &SplitFrame,
    regime: &str,
    hit_epsilon: f64,
) -> Result<EvaluationReport, MetricError> {
    let test = split.test();
    let (inputs, outputs) = io_columns(net, test);
    let in_idx = positions(test, &inputs)?;
    let out_idx = positions(test, &outputs)?;
    let x: Vec<Vec<f64>> = test
        .rows()
        .iter()
        .map(|r| in_idx.iter().map(|&i| r.values[i]).collect())
        .collect();
    let predicted = net.forward_batch(&x)?;

    let mut report = EvaluationReport::new(hit_epsilon);
    for (k, (name, &col)) in outputs.iter().zip(&out_idx).enumerate() {
        let range = scaler
            .range(name)
            .ok_or_else(|| MetricError::MissingColumn(name.clone()))?;
        let actual_s = test.column_values(col);
        let pred_s: Vec<f64> = predicted.iter().map(|p| p[k]).collect();
        let actual_o: Vec<f64> = actual_s.iter().map(|&v| range.unscale(v)).collect();
        let pred_o: Vec<f64> = pred_s.iter().map(|&v| range.unscale(v)).collect();
        report.cells.push(EvaluationCell {
            regime: regime.to_string(),
            target: name.clone(),
            scaled: MetricSet::compute(&actual_s, &pred_s, hit_epsilon)?,
            original: MetricSet::compute(&actual_o, &pred_o, hit_epsilon)?,
        });
    }
    Ok(report)
}
