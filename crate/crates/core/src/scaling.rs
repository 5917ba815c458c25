//! Per-column min-max scaling to `[0, 1]` with an exact inverse.
//!
//! `x_scaled = (x - x_min) / (x_max - x_min)`, fitted on the training block.
//! Values outside the fitted range map outside `[0, 1]` and are not clamped.
//! A constant column has no usable range and maps to 0.0.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dataset::{Column, ColumnRole, DatasetError, TimeSeriesFrame};

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("cannot fit a scaler on an empty frame")]
    EmptyFrame,
    #[error("frame columns do not match the fitted columns")]
    ColumnMismatch,
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("scaler file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRange {
    pub column: Column,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn scale(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn unscale(&self, s: f64) -> f64 {
        s * (self.max - self.min) + self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    ranges: Vec<ColumnRange>,
}

impl MinMaxScaler {
    /// Records each column's min and max. Pass only the training block
    /// unless a global fit over every row is wanted.
    pub fn fit(train: &TimeSeriesFrame) -> Result<Self, ScalingError> {
        if train.is_empty() {
            return Err(ScalingError::EmptyFrame);
        }
        let ranges = train
            .columns()
            .iter()
            .enumerate()
            .map(|(j, column)| {
                let (min, max) = train
                    .rows()
                    .iter()
                    .map(|r| r.values[j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                ColumnRange {
                    column: column.clone(),
                    min,
                    max,
                }
            })
            .collect();
        Ok(Self { ranges })
    }

    pub fn from_ranges(ranges: Vec<ColumnRange>) -> Self {
        Self { ranges }
    }

    pub fn ranges(&self) -> &[ColumnRange] {
        &self.ranges
    }

    pub fn range(&self, name: &str) -> Option<&ColumnRange> {
        self.ranges.iter().find(|r| r.column.name == name)
    }

    pub fn degenerate_columns(&self) -> Vec<&str> {
        self.ranges
            .iter()
            .filter(|r| r.is_degenerate())
            .map(|r| r.column.name.as_str())
            .collect()
    }

    fn check_columns(&self, frame: &TimeSeriesFrame) -> Result<(), ScalingError> {
        let same = frame.columns().len() == self.ranges.len()
            && frame
                .columns()
                .iter()
                .zip(&self.ranges)
                .all(|(c, r)| c.name == r.column.name);
        if same {
            Ok(())
        } else {
            Err(ScalingError::ColumnMismatch)
        }
    }

    pub fn transform(&self, frame: &TimeSeriesFrame) -> Result<TimeSeriesFrame, ScalingError> {
        self.check_columns(frame)?;
        for name in self.degenerate_columns() {
            log::warn!("column '{name}' has zero range; scaled to 0.0");
        }
        Ok(frame.map_values(|j, x| self.ranges[j].scale(x))?)
    }

    pub fn inverse_transform(
        &self,
        frame: &TimeSeriesFrame,
    ) -> Result<TimeSeriesFrame, ScalingError> {
        self.check_columns(frame)?;
        Ok(frame.map_values(|j, s| self.ranges[j].unscale(s))?)
    }

    /// Scale a row of values belonging to the named columns.
    pub fn scale_named(&self, names: &[String], values: &[f64]) -> Result<Vec<f64>, ScalingError> {
        names
            .iter()
            .zip(values)
            .map(|(n, &v)| {
                self.range(n)
                    .map(|r| r.scale(v))
                    .ok_or_else(|| ScalingError::UnknownColumn(n.clone()))
            })
            .collect()
    }

    pub fn unscale_named(
        &self,
        names: &[String],
        values: &[f64],
    ) -> Result<Vec<f64>, ScalingError> {
        names
            .iter()
            .zip(values)
            .map(|(n, &v)| {
                self.range(n)
                    .map(|r| r.unscale(v))
                    .ok_or_else(|| ScalingError::UnknownColumn(n.clone()))
            })
            .collect()
    }

    /// Plain-text key/value form:
    ///
    /// ```text
    /// scaler = minmax
    /// columns = 2
    /// column.0.name = oil
    /// column.0.role = input
    /// column.0.min = 30
    /// column.0.max = 145
    /// ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("scaler = minmax\n");
        let _ = writeln!(out, "columns = {}", self.ranges.len());
        for (i, r) in self.ranges.iter().enumerate() {
            let _ = writeln!(out, "column.{i}.name = {}", r.column.name);
            let _ = writeln!(out, "column.{i}.role = {}", r.column.role);
            let _ = writeln!(out, "column.{i}.min = {}", r.min);
            let _ = writeln!(out, "column.{i}.max = {}", r.max);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ScalingError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ScalingError::Parse {
                line: i + 1,
                message: "expected 'key = value'".into(),
            })?;
            entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let lookup = |key: &str| -> Result<(usize, &str), ScalingError> {
            entries
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(l, _, v)| (*l, v.as_str()))
                .ok_or_else(|| ScalingError::Parse {
                    line: 0,
                    message: format!("missing key '{key}'"),
                })
        };
        let parse_err = |line: usize, message: String| ScalingError::Parse { line, message };

        let (line, kind) = lookup("scaler")?;
        if kind != "minmax" {
            return Err(parse_err(line, format!("unsupported scaler '{kind}'")));
        }
        let (line, count) = lookup("columns")?;
        let count: usize = count
            .parse()
            .map_err(|_| parse_err(line, format!("bad column count '{count}'")))?;
        let mut ranges = Vec::with_capacity(count);
        for i in 0..count {
            let (_, name) = lookup(&format!("column.{i}.name"))?;
            let (line, role) = lookup(&format!("column.{i}.role"))?;
            let role: ColumnRole = role.parse().map_err(|m| parse_err(line, m))?;
            let number = |key: String| -> Result<f64, ScalingError> {
                let (line, v) = lookup(&key)?;
                v.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("bad number '{v}'")))
            };
            let min = number(format!("column.{i}.min"))?;
            let max = number(format!("column.{i}.max"))?;
            if min.is_nan() || max.is_nan() || min > max {
                return Err(parse_err(
                    line,
                    format!("column {i}: min {min} > max {max}"),
                ));
            }
            ranges.push(ColumnRange {
                column: Column {
                    name: name.to_string(),
                    role,
                },
                min,
                max,
            });
        }
        Ok(Self { ranges })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), ScalingError> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ScalingError> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScalingError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScalingError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                ScalingError::Dataset(DatasetError::FileNotFound(path.to_path_buf()))
            } else {
                ScalingError::Io(e)
            }
        })?;
        Self::from_text(&text)
    }
}
