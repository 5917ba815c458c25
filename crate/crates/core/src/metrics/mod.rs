//! Forecast error metrics and the regime-comparison report.
//!
//! `s` is the actual series and `o` the prediction throughout:
//!
//! * RMSE `sqrt(1/N * sum (s_t - o_t)^2)`
//! * MAPE `100/N * sum |(s_t - o_t) / s_t|`, in percent
//! * MAE `1/N * sum |s_t - o_t|`
//! * hit rate: share of `t` with `|s_t - o_t| / |s_t| <= epsilon`

mod report;

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::network::NetworkError;
use crate::scaling::ScalingError;

pub use report::{
    evaluate, predict_frame, EvaluationCell, EvaluationReport, MetricSet, Units,
    DEFAULT_HIT_EPSILON,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("series lengths differ: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("empty series")]
    EmptyInput,
    #[error("actual value at index {0} is zero")]
    ZeroActual(usize),
    #[error("hit-rate tolerance must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("report parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("column '{0}' not found")]
    MissingColumn(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricError> {
    if actual.len() != predicted.len() {
        return Err(MetricError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(())
}

fn check_nonzero(actual: &[f64]) -> Result<(), MetricError> {
    match actual.iter().position(|&s| s == 0.0) {
        Some(i) => Err(MetricError::ZeroActual(i)),
        None => Ok(()),
    }
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(s, o)| (s - o) * (s - o))
        .sum();
    Ok((sum / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(s, o)| (s - o).abs())
        .sum();
    Ok(sum / actual.len() as f64)
}

/// Mean absolute percentage error in percent. Fails on any zero actual.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    check_nonzero(actual)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(s, o)| ((s - o) / s).abs())
        .sum();
    Ok(100.0 * sum / actual.len() as f64)
}

pub fn hit_rate(actual: &[f64], predicted: &[f64], epsilon: f64) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(MetricError::BadEpsilon(epsilon));
    }
    check_nonzero(actual)?;
    let hits = actual
        .iter()
        .zip(predicted)
        .filter(|(s, o)| (*s - *o).abs() / s.abs() <= epsilon)
        .count();
    Ok(hits as f64 / actual.len() as f64)
}
