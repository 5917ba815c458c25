use super::{DatasetError, TimeSeriesFrame};

/// Per-column summary: mean, median, sample SD and standardized moments.
///
/// Skewness and kurtosis are the bias-uncorrected third and fourth
/// standardized moments (population central moments), with kurtosis reported
/// as excess over the normal distribution. A constant column has both set to
/// zero and `degenerate` raised.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub min: f64,
    pub max: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub columns: Vec<ColumnStats>,
}

impl DescriptiveStats {
    pub fn get(&self, name: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|c| c.name == name)
    }
}

pub fn descriptive_stats(frame: &TimeSeriesFrame) -> Result<DescriptiveStats, DatasetError> {
    let columns = frame
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| column_stats(&c.name, &frame.column_values(j)))
        .collect::<Result<_, _>>()?;
    Ok(DescriptiveStats { columns })
}

pub fn column_stats(name: &str, values: &[f64]) -> Result<ColumnStats, DatasetError> {
    let n = values.len();
    if n < 2 {
        return Err(DatasetError::InsufficientRows {
            column: name.to_string(),
            rows: n,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[n - 1];
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    let nf = n as f64;
    // Summing the sorted copy makes the result independent of row order.
    let mean = sorted.iter().sum::<f64>() / nf;
    if min == max {
        return Ok(ColumnStats {
            name: name.to_string(),
            n,
            mean: min,
            median,
            std_dev: 0.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
            min,
            max,
            degenerate: true,
        });
    }
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &x in &sorted {
        let d = x - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let m2 = s2 / nf;
    let m3 = s3 / nf;
    let m4 = s4 / nf;
    Ok(ColumnStats {
        name: name.to_string(),
        n,
        mean,
        median,
        std_dev: (s2 / (nf - 1.0)).sqrt(),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        min,
        max,
        degenerate: false,
    })
}
