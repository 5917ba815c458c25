//! Seeded synthetic daily series used as fixtures.
//!
//! Each input column is `mean + sd * z_t` where `z_t` is a unit-variance
//! AR(1) process driven by innovations of a requested excess kurtosis:
//!
//! * `k == 0`: standard normal,
//! * `k > 0`: Student-t with `4 + 6/k` degrees of freedom, rescaled to unit variance,
//! * `-2 <= k < 0`: `a * R + sqrt(1 - a^2) * N` with `R` a random sign and
//!   `a = (-k/2)^(1/4)`, which has excess kurtosis exactly `k`.
//!
//! Persistence above zero pulls the kurtosis of `z_t` towards zero, so moment
//! checks should use `persistence = 0`.
//!
//! Targets are either a calibrated mixture of the standardized inputs or an
//! exact linear function of the input values. Level shocks add
//! `magnitude * mean` to the chosen columns from a row index onwards and are
//! applied after targets are computed.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use super::{Column, DatasetError, ObservationRow, TimeSeriesFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub excess_kurtosis: f64,
    /// AR(1) coefficient in `[0, 1)`.
    pub persistence: f64,
}

impl SeriesSpec {
    pub fn new(name: impl Into<String>, mean: f64, sd: f64) -> Self {
        Self {
            name: name.into(),
            mean,
            sd,
            excess_kurtosis: 0.0,
            persistence: 0.0,
        }
    }

    pub fn kurtosis(mut self, k: f64) -> Self {
        self.excess_kurtosis = k;
        self
    }

    pub fn persistence(mut self, phi: f64) -> Self {
        self.persistence = phi;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetModel {
    /// `mean + sd * c / std(c)` with `c = sum(w_i * z_i) + noise * e`, where
    /// `z_i` are the standardized input paths.
    Calibrated {
        mean: f64,
        sd: f64,
        weights: Vec<f64>,
        noise: f64,
    },
    /// `intercept + sum(w_i * x_i) + noise_sd * e` in input units.
    Linear {
        intercept: f64,
        weights: Vec<f64>,
        noise_sd: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub name: String,
    pub model: TargetModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelShock {
    pub index: usize,
    /// Fraction of the column mean added from `index` on; `-0.5` halves the level.
    pub magnitude: f64,
    /// Affected columns; empty means every column.
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// First date; rows fall on consecutive weekdays.
    pub start: NaiveDate,
    pub inputs: Vec<SeriesSpec>,
    pub targets: Vec<TargetSpec>,
    pub shocks: Vec<LevelShock>,
}

impl SyntheticSpec {
    /// Five inputs and two index targets with the means, SDs and excess
    /// kurtoses of a daily 2009-2018 emerging-market sample (oil, gas, gold,
    /// exchange rate, volume; a stock index and an industry index).
    ///
    /// Gold is centred at 1275, where its median sits.
    pub fn daily_market(start: NaiveDate) -> Self {
        let inputs = vec![
            SeriesSpec::new("oil", 77.2, 27.29).kurtosis(-1.4),
            SeriesSpec::new("gas", 3.48, 0.91).kurtosis(0.7),
            SeriesSpec::new("gold", 1275.0, 219.6).kurtosis(-0.2),
            SeriesSpec::new("exchange_rate", 25573.0, 11657.0).kurtosis(-1.57),
            SeriesSpec::new("volume", 626.672193, 893.369438).kurtosis(183.3),
        ];
        let targets = vec![
            TargetSpec {
                name: "tepix".into(),
                model: TargetModel::Calibrated {
                    mean: 48779.0,
                    sd: 28487.0,
                    weights: vec![0.6, 0.1, 0.2, 0.5, 0.1],
                    noise: 0.2,
                },
            },
            TargetSpec {
                name: "industry".into(),
                model: TargetModel::Calibrated {
                    mean: 40854.5,
                    sd: 24791.0,
                    weights: vec![0.8, 0.3, 0.1, 0.3, 0.05],
                    noise: 0.2,
                },
            },
        ];
        Self {
            start,
            inputs,
            targets,
            shocks: Vec::new(),
        }
    }

    pub fn with_shock(mut self, shock: LevelShock) -> Self {
        self.shocks.push(shock);
        self
    }

    fn validate(&self, n: usize) -> Result<(), DatasetError> {
        let bad = |msg: String| Err(DatasetError::InvalidSynthetic(msg));
        if n < 2 {
            return bad(format!("need at least 2 rows, got {n}"));
        }
        if self.inputs.is_empty() || self.targets.is_empty() {
            return bad("need at least one input and one target".into());
        }
        for s in &self.inputs {
            if !(s.mean.is_finite() && s.sd.is_finite() && s.sd >= 0.0) {
                return bad(format!(
                    "column '{}': mean/sd must be finite, sd >= 0",
                    s.name
                ));
            }
            if !(s.excess_kurtosis.is_finite() && s.excess_kurtosis >= -2.0) {
                return bad(format!(
                    "column '{}': excess kurtosis must be >= -2",
                    s.name
                ));
            }
            if !(0.0..1.0).contains(&s.persistence) {
                return bad(format!(
                    "column '{}': persistence must be in [0, 1)",
                    s.name
                ));
            }
        }
        for t in &self.targets {
            let weights = match &t.model {
                TargetModel::Calibrated { weights, noise, .. } => {
                    let var: f64 = weights.iter().map(|w| w * w).sum::<f64>() + noise * noise;
                    if var <= 0.0 {
                        return bad(format!(
                            "target '{}': all weights and noise are zero",
                            t.name
                        ));
                    }
                    weights
                }
                TargetModel::Linear { weights, .. } => weights,
            };
            if weights.len() != self.inputs.len() {
                return bad(format!(
                    "target '{}': {} weights for {} inputs",
                    t.name,
                    weights.len(),
                    self.inputs.len()
                ));
            }
        }
        for shock in &self.shocks {
            if shock.index >= n {
                return bad(format!("shock index {} beyond {n} rows", shock.index));
            }
        }
        Ok(())
    }
}

/// Unit-variance innovation with the requested excess kurtosis.
enum Innovation {
    Normal,
    Student {
        dist: StudentT<f64>,
        scale: f64,
    },
    SignMix {
        sign_weight: f64,
        normal_weight: f64,
    },
}

impl Innovation {
    fn for_kurtosis(k: f64) -> Self {
        if k == 0.0 {
            Innovation::Normal
        } else if k > 0.0 {
            let dof = 4.0 + 6.0 / k;
            Innovation::Student {
                dist: StudentT::new(dof).expect("dof > 4"),
                scale: ((dof - 2.0) / dof).sqrt(),
            }
        } else {
            let a = (-k / 2.0).powf(0.25);
            Innovation::SignMix {
                sign_weight: a,
                normal_weight: (1.0 - a * a).max(0.0).sqrt(),
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Innovation::Normal => rng.sample(StandardNormal),
            Innovation::Student { dist, scale } => dist.sample(rng) * scale,
            Innovation::SignMix {
                sign_weight,
                normal_weight,
            } => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let z: f64 = rng.sample(StandardNormal);
                sign_weight * sign + normal_weight * z
            }
        }
    }
}

fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Deterministic for a fixed `(spec, n, seed)`.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    n: usize,
    seed: u64,
) -> Result<TimeSeriesFrame, DatasetError> {
    spec.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let standardized: Vec<Vec<f64>> = spec
        .inputs
        .iter()
        .map(|s| {
            let innovation = Innovation::for_kurtosis(s.excess_kurtosis);
            let phi = s.persistence;
            let carry = (1.0 - phi * phi).sqrt();
            let mut z = Vec::with_capacity(n);
            let mut prev = innovation.sample(&mut rng);
            z.push(prev);
            for _ in 1..n {
                prev = phi * prev + carry * innovation.sample(&mut rng);
                z.push(prev);
            }
            z
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = spec
        .inputs
        .iter()
        .zip(&standardized)
        .map(|(s, z)| z.iter().map(|v| s.mean + s.sd * v).collect())
        .collect();

    for t in &spec.targets {
        let values = match &t.model {
            TargetModel::Calibrated {
                mean,
                sd,
                weights,
                noise,
            } => {
                let norm = (weights.iter().map(|w| w * w).sum::<f64>() + noise * noise).sqrt();
                (0..n)
                    .map(|i| {
                        let e: f64 = rng.sample(StandardNormal);
                        let c: f64 = weights
                            .iter()
                            .zip(&standardized)
                            .map(|(w, z)| w * z[i])
                            .sum::<f64>()
                            + noise * e;
                        mean + sd * c / norm
                    })
                    .collect()
            }
            TargetModel::Linear {
                intercept,
                weights,
                noise_sd,
            } => (0..n)
                .map(|i| {
                    let e: f64 = if *noise_sd > 0.0 {
                        rng.sample(StandardNormal)
                    } else {
                        0.0
                    };
                    intercept
                        + weights
                            .iter()
                            .zip(&columns)
                            .map(|(w, x)| w * x[i])
                            .sum::<f64>()
                        + noise_sd * e
                })
                .collect(),
        };
        columns.push(values);
    }

    let mut schema: Vec<Column> = spec.inputs.iter().map(|s| Column::input(&s.name)).collect();
    schema.extend(spec.targets.iter().map(|t| Column::target(&t.name)));

    for shock in &spec.shocks {
        for (j, col) in schema.iter().enumerate() {
            if !shock.columns.is_empty() && !shock.columns.contains(&col.name) {
                continue;
            }
            let level = level_of(spec, j, &columns[j]);
            for v in &mut columns[j][shock.index..] {
                *v += shock.magnitude * level;
            }
        }
    }

    let rows = weekdays(spec.start, n)
        .into_iter()
        .enumerate()
        .map(|(i, date)| ObservationRow::new(date, columns.iter().map(|c| c[i]).collect()))
        .collect();
    TimeSeriesFrame::new(schema, rows)
}

fn level_of(spec: &SyntheticSpec, column: usize, values: &[f64]) -> f64 {
    if let Some(s) = spec.inputs.get(column) {
        return s.mean;
    }
    match &spec.targets[column - spec.inputs.len()].model {
        TargetModel::Calibrated { mean, .. } => *mean,
        TargetModel::Linear { .. } => values.iter().sum::<f64>() / values.len() as f64,
    }
}
