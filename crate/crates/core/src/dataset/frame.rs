use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use chrono::NaiveDate;

use super::DatasetError;

/// Whether a column feeds the network or is predicted by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnRole {
    Input,
    Target,
}

impl ColumnRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnRole::Input => "input",
            ColumnRole::Target => "target",
        }
    }
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ColumnRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "input" => Ok(ColumnRole::Input),
            "target" => Ok(ColumnRole::Target),
            other => Err(format!("unknown column role '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    pub name: String,
    pub role: ColumnRole,
}

impl Column {
    pub fn input(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: ColumnRole::Input,
        }
    }

    pub fn target(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: ColumnRole::Target,
        }
    }
}

/// One trading day: a date and one value per frame column.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRow {
    pub date: NaiveDate,
    pub values: Vec<f64>,
}

impl ObservationRow {
    pub fn new(date: NaiveDate, values: Vec<f64>) -> Self {
        Self { date, values }
    }
}

/// A date-indexed table of daily series.
///
/// Dates are strictly increasing, column names are unique, every value is
/// finite, and there is at least one input and one target column. These are
/// checked once in [`TimeSeriesFrame::new`]; every other constructor derives
/// from an already valid frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    columns: Vec<Column>,
    rows: Vec<ObservationRow>,
}

impl TimeSeriesFrame {
    pub fn new(columns: Vec<Column>, rows: Vec<ObservationRow>) -> Result<Self, DatasetError> {
        validate_columns(&columns)?;
        for (i, row) in rows.iter().enumerate() {
            if row.values.len() != columns.len() {
                return Err(DatasetError::RowWidth {
                    row: i,
                    expected: columns.len(),
                    found: row.values.len(),
                });
            }
            if let Some(j) = row.values.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFiniteValue {
                    column: columns[j].name.clone(),
                    row: i,
                    raw: row.values[j].to_string(),
                });
            }
        }
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(DatasetError::NonMonotonicDates {
                    row: i + 1,
                    date: pair[1].date,
                });
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[ObservationRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.rows.iter().map(|r| r.date)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.first().map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rows.last().map(|r| r.date)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_values(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    fn indices_with(&self, role: ColumnRole) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn input_indices(&self) -> Vec<usize> {
        self.indices_with(ColumnRole::Input)
    }

    pub fn target_indices(&self) -> Vec<usize> {
        self.indices_with(ColumnRole::Target)
    }

    pub fn input_names(&self) -> Vec<String> {
        self.input_indices()
            .into_iter()
            .map(|i| self.columns[i].name.clone())
            .collect()
    }

    pub fn target_names(&self) -> Vec<String> {
        self.target_indices()
            .into_iter()
            .map(|i| self.columns[i].name.clone())
            .collect()
    }

    fn gather(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| indices.iter().map(|&i| r.values[i]).collect())
            .collect()
    }

    /// Input columns as one vector per row, in column order.
    pub fn input_matrix(&self) -> Vec<Vec<f64>> {
        self.gather(&self.input_indices())
    }

    /// Target columns as one vector per row, in column order.
    pub fn target_matrix(&self) -> Vec<Vec<f64>> {
        self.gather(&self.target_indices())
    }

    /// Contiguous sub-range of rows. Panics if the range is out of bounds.
    pub fn slice_rows(&self, range: Range<usize>) -> Self {
        Self {
            columns: self.columns.clone(),
            rows: self.rows[range].to_vec(),
        }
    }

    /// Keep every input column plus the named targets, in original order.
    pub fn select_targets(&self, targets: &[&str]) -> Result<Self, DatasetError> {
        for t in targets {
            match self.column_index(t) {
                Some(i) if self.columns[i].role == ColumnRole::Target => {}
                _ => return Err(DatasetError::MissingColumn((*t).to_string())),
            }
        }
        let keep: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Input || targets.contains(&c.name.as_str()))
            .map(|(i, _)| i)
            .collect();
        let columns = keep.iter().map(|&i| self.columns[i].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| ObservationRow::new(r.date, keep.iter().map(|&i| r.values[i]).collect()))
            .collect();
        TimeSeriesFrame::new(columns, rows)
    }

    /// Same columns and dates, every value replaced through `f(column, value)`.
    pub fn map_values<F>(&self, mut f: F) -> Result<Self, DatasetError>
    where
        F: FnMut(usize, f64) -> f64,
    {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let values = r.values.iter().enumerate().map(|(j, &v)| f(j, v)).collect();
                ObservationRow::new(r.date, values)
            })
            .collect();
        TimeSeriesFrame::new(self.columns.clone(), rows)
    }

    /// Stack frames with identical columns. Dates must stay strictly increasing.
    pub fn concat(parts: &[&TimeSeriesFrame]) -> Result<Self, DatasetError> {
        let Some(first) = parts.first() else {
            return Err(DatasetError::FrameTooSmall {
                rows: 0,
                minimum: 1,
            });
        };
        let mut rows = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for part in parts {
            if part.columns != first.columns {
                return Err(DatasetError::ColumnMismatch);
            }
            rows.extend(part.rows.iter().cloned());
        }
        TimeSeriesFrame::new(first.columns.clone(), rows)
    }
}

fn validate_columns(columns: &[Column]) -> Result<(), DatasetError> {
    let mut seen = HashSet::new();
    for c in columns {
        if c.name.is_empty() || c.name == "date" {
            return Err(DatasetError::InvalidColumnName(c.name.clone()));
        }
        if !seen.insert(c.name.as_str()) {
            return Err(DatasetError::DuplicateColumn(c.name.clone()));
        }
    }
    if !columns.iter().any(|c| c.role == ColumnRole::Input) {
        return Err(DatasetError::NoInputColumn);
    }
    if !columns.iter().any(|c| c.role == ColumnRole::Target) {
        return Err(DatasetError::NoTargetColumn);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, day).unwrap()
    }

    fn cols() -> Vec<Column> {
        vec![Column::input("oil"), Column::target("tepix")]
    }

    #[test]
    fn rejects_duplicate_dates() {
        let rows = vec![
            ObservationRow::new(d(2), vec![1.0, 2.0]),
            ObservationRow::new(d(2), vec![1.0, 2.0]),
        ];
        assert!(matches!(
            TimeSeriesFrame::new(cols(), rows),
            Err(DatasetError::NonMonotonicDates { row: 1, .. })
        ));
    }

    #[test]
    fn rejects_missing_roles_and_duplicate_names() {
        let only_inputs = vec![Column::input("a"), Column::input("b")];
        assert!(matches!(
            TimeSeriesFrame::new(only_inputs, vec![]),
            Err(DatasetError::NoTargetColumn)
        ));
        let dup = vec![Column::input("a"), Column::target("a")];
        assert!(matches!(
            TimeSeriesFrame::new(dup, vec![]),
            Err(DatasetError::DuplicateColumn(_))
        ));
    }

    #[test]
    fn rejects_non_finite_and_wrong_width() {
        let rows = vec![ObservationRow::new(d(2), vec![f64::NAN, 2.0])];
        assert!(matches!(
            TimeSeriesFrame::new(cols(), rows),
            Err(DatasetError::NonFiniteValue { .. })
        ));
        let rows = vec![ObservationRow::new(d(2), vec![1.0])];
        assert!(matches!(
            TimeSeriesFrame::new(cols(), rows),
            Err(DatasetError::RowWidth { .. })
        ));
    }

    #[test]
    fn select_targets_keeps_inputs() {
        let columns = vec![
            Column::input("oil"),
            Column::target("tepix"),
            Column::target("ind"),
        ];
        let rows = vec![ObservationRow::new(d(2), vec![1.0, 2.0, 3.0])];
        let frame = TimeSeriesFrame::new(columns, rows).unwrap();
        let sub = frame.select_targets(&["ind"]).unwrap();
        assert_eq!(sub.column_names(), vec!["oil", "ind"]);
        assert_eq!(sub.rows()[0].values, vec![1.0, 3.0]);
        assert!(frame.select_targets(&["oil"]).is_err());
    }
}
