//! CSV reading and writing for daily frames.
//!
//! Files carry a header `date,<col1>,...` with ISO 8601 dates (`YYYY-MM-DD`)
//! and `.` as the decimal point. Columns in the file that the schema does not
//! mention are ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{Column, DatasetError, ObservationRow, TimeSeriesFrame};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// What to do with a cell that is empty, unparseable, NaN or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Fail with [`DatasetError::NonFiniteValue`].
    #[default]
    Reject,
    /// Skip the whole row.
    Drop,
    /// Carry the previous day's value forward.
    ForwardFill,
}

impl std::str::FromStr for FillPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject" => Ok(FillPolicy::Reject),
            "drop" => Ok(FillPolicy::Drop),
            "forward-fill" | "ffill" => Ok(FillPolicy::ForwardFill),
            other => Err(format!("unknown fill policy '{other}'")),
        }
    }
}

impl FillPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            FillPolicy::Reject => "reject",
            FillPolicy::Drop => "drop",
            FillPolicy::ForwardFill => "forward-fill",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadOptions {
    pub fill: FillPolicy,
    /// Sort rows by date instead of failing on unsorted input. Duplicate
    /// dates are an error either way.
    pub sort_dates: bool,
    /// Columns replaced by their natural logarithm after filling.
    pub log_transform: Vec<String>,
}

/// Column roles plus load behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub columns: Vec<Column>,
    pub options: LoadOptions,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            options: LoadOptions::default(),
        }
    }

    pub fn with_options(mut self, options: LoadOptions) -> Self {
        self.options = options;
        self
    }
}

/// Selected columns of a CSV file after filling, before role validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<Vec<f64>>,
}

/// Source line index, date and per-cell parse result.
type ParsedRow = (usize, NaiveDate, Vec<Result<f64, String>>);

pub fn read_table<R: Read>(
    reader: R,
    names: &[String],
    options: &LoadOptions,
) -> Result<Table, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    match header.get(0) {
        Some("date") => {}
        other => {
            return Err(DatasetError::MissingDateColumn(
                other.unwrap_or("").to_string(),
            ))
        }
    }
    let positions = names
        .iter()
        .map(|n| {
            header
                .iter()
                .skip(1)
                .position(|h| h == n)
                .map(|p| p + 1)
                .ok_or_else(|| DatasetError::MissingColumn(n.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for col in &options.log_transform {
        if !names.contains(col) {
            return Err(DatasetError::MissingColumn(col.clone()));
        }
    }

    let mut parsed: Vec<ParsedRow> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let raw_date = record.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, DATE_FORMAT).map_err(|_| {
            DatasetError::BadDate {
                row: i,
                raw: raw_date.to_string(),
            }
        })?;
        let cells = positions
            .iter()
            .map(|&p| {
                let raw = record.get(p).unwrap_or("");
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(raw.to_string()),
                }
            })
            .collect();
        parsed.push((i, date, cells));
    }

    if options.sort_dates {
        parsed.sort_by_key(|(_, date, _)| *date);
    }
    for pair in parsed.windows(2) {
        if pair[1].1 <= pair[0].1 {
            return Err(DatasetError::NonMonotonicDates {
                row: pair[1].0,
                date: pair[1].1,
            });
        }
    }

    let mut dates = Vec::with_capacity(parsed.len());
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(parsed.len());
    'rows: for (row, date, cells) in parsed {
        let mut out = Vec::with_capacity(cells.len());
        for (j, cell) in cells.into_iter().enumerate() {
            match cell {
                Ok(v) => out.push(v),
                Err(raw) => match options.fill {
                    FillPolicy::Drop => continue 'rows,
                    FillPolicy::ForwardFill if !values.is_empty() => {
                        out.push(values[values.len() - 1][j]);
                    }
                    _ => {
                        return Err(DatasetError::NonFiniteValue {
                            column: names[j].clone(),
                            row,
                            raw,
                        })
                    }
                },
            }
        }
        dates.push(date);
        values.push(out);
    }

    for col in &options.log_transform {
        let j = names.iter().position(|n| n == col).expect("checked above");
        for (row, v) in values.iter_mut().enumerate() {
            if v[j] <= 0.0 {
                return Err(DatasetError::NonPositiveLog {
                    column: col.clone(),
                    row,
                    value: v[j],
                });
            }
            v[j] = v[j].ln();
        }
    }

    Ok(Table {
        names: names.to_vec(),
        dates,
        values,
    })
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<TimeSeriesFrame, DatasetError> {
    let names: Vec<String> = schema.columns.iter().map(|c| c.name.clone()).collect();
    let table = read_table(reader, &names, &schema.options)?;
    let rows = table
        .dates
        .into_iter()
        .zip(table.values)
        .map(|(date, values)| ObservationRow::new(date, values))
        .collect();
    TimeSeriesFrame::new(schema.columns.clone(), rows)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<TimeSeriesFrame, DatasetError> {
    let file = open(path.as_ref())?;
    read_csv(file, schema)
}

pub(crate) fn open(path: &Path) -> Result<File, DatasetError> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DatasetError::FileNotFound(path.to_path_buf())
        } else {
            DatasetError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

/// Writes `date,<columns...>` with shortest round-trip float formatting.
pub fn write_csv<W: Write>(frame: &TimeSeriesFrame, writer: W) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(frame.columns().iter().map(|c| c.name.clone()));
    wtr.write_record(&header).map_err(csv_err)?;
    for row in frame.rows() {
        let mut record = Vec::with_capacity(row.values.len() + 1);
        record.push(row.date.format(DATE_FORMAT).to_string());
        record.extend(row.values.iter().map(|v| v.to_string()));
        wtr.write_record(&record).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| DatasetError::Csv(e.to_string()))
}

pub fn save_csv(frame: &TimeSeriesFrame, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(frame, std::io::BufWriter::new(file))
}

fn csv_err(e: csv::Error) -> DatasetError {
    DatasetError::Csv(e.to_string())
}
