use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::NaiveDate;

use super::{DatasetError, TimeSeriesFrame};

/// A calendar window `[start, end)` with a name, e.g. a sanction period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeSpec {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl RegimeSpec {
    pub fn new(
        name: impl Into<String>,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Self, DatasetError> {
        let name = name.into();
        if start >= end {
            return Err(DatasetError::InvalidRegime { name, start, end });
        }
        Ok(Self { name, start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }

    pub fn overlaps(&self, other: &RegimeSpec) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Fails on the first pair of overlapping regimes.
pub fn check_disjoint(regimes: &[RegimeSpec]) -> Result<(), DatasetError> {
    for (i, a) in regimes.iter().enumerate() {
        for b in &regimes[i + 1..] {
            if a.overlaps(b) {
                return Err(DatasetError::OverlappingRegimes(
                    a.name.clone(),
                    b.name.clone(),
                ));
            }
        }
    }
    Ok(())
}

/// Rows with `start <= date < end`, order preserved.
pub fn slice_regime(
    frame: &TimeSeriesFrame,
    regime: &RegimeSpec,
) -> Result<TimeSeriesFrame, DatasetError> {
    let rows = frame.rows();
    let lo = rows.partition_point(|r| r.date < regime.start);
    let hi = rows.partition_point(|r| r.date < regime.end);
    if lo >= hi {
        return Err(DatasetError::EmptyRegime(regime.name.clone()));
    }
    Ok(frame.slice_rows(lo..hi))
}

pub const MIN_SPLIT_ROWS: usize = 10;

/// Shares of a frame given to training, test and validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl SplitFractions {
    /// 75 % train, 20 % test, 5 % validation.
    pub const DEFAULT: SplitFractions = SplitFractions {
        train: 0.75,
        test: 0.20,
        validation: 0.05,
    };

    pub fn new(train: f64, test: f64, validation: f64) -> Result<Self, DatasetError> {
        let f = Self {
            train,
            test,
            validation,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        for (name, v) in [
            ("train", self.train),
            ("test", self.test),
            ("validation", self.validation),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DatasetError::BadFractions(format!(
                    "{name} fraction {v} must be positive"
                )));
            }
        }
        let sum = self.train + self.test + self.validation;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DatasetError::BadFractions(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    /// Block sizes `(train, validation, test)` for `n` rows: floor for train
    /// and test, remainder to validation.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The slack absorbs products like 0.29 * 100 = 28.999999999999996.
        let share = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let train = share(self.train);
        let test = share(self.test);
        (train, n - train - test, test)
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Read counters for the three blocks of a [`SplitFrame`].
///
/// Shared between a split and every split derived from it through
/// [`SplitFrame::map_blocks`], so a scaled copy reports into the same log.
#[derive(Debug, Default)]
pub struct BlockAccess {
    train: AtomicUsize,
    validation: AtomicUsize,
    test: AtomicUsize,
}

impl BlockAccess {
    pub fn train_reads(&self) -> usize {
        self.train.load(Ordering::Relaxed)
    }

    pub fn validation_reads(&self) -> usize {
        self.validation.load(Ordering::Relaxed)
    }

    pub fn test_reads(&self) -> usize {
        self.test.load(Ordering::Relaxed)
    }
}

/// Contiguous chronological blocks ordered train, validation, test.
///
/// Every call to [`train`](Self::train), [`validation`](Self::validation) or
/// [`test`](Self::test) is counted in [`access`](Self::access), which lets
/// callers prove that fitting and training never looked at the test block.
#[derive(Debug, Clone)]
pub struct SplitFrame {
    train: TimeSeriesFrame,
    validation: TimeSeriesFrame,
    test: TimeSeriesFrame,
    fractions: SplitFractions,
    access: Arc<BlockAccess>,
}

impl SplitFrame {
    pub fn train(&self) -> &TimeSeriesFrame {
        self.access.train.fetch_add(1, Ordering::Relaxed);
        &self.train
    }

    pub fn validation(&self) -> &TimeSeriesFrame {
        self.access.validation.fetch_add(1, Ordering::Relaxed);
        &self.validation
    }

    pub fn test(&self) -> &TimeSeriesFrame {
        self.access.test.fetch_add(1, Ordering::Relaxed);
        &self.test
    }

    pub fn fractions(&self) -> SplitFractions {
        self.fractions
    }

    pub fn access(&self) -> &BlockAccess {
        &self.access
    }

    /// `(train, validation, test)` row counts. Not counted as a read.
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    /// Apply `f` to each block, e.g. scaling. The result shares this split's
    /// access log, and the mapping itself is not counted as a read.
    pub fn map_blocks<F, E>(&self, mut f: F) -> Result<SplitFrame, E>
    where
        F: FnMut(&TimeSeriesFrame) -> Result<TimeSeriesFrame, E>,
    {
        Ok(SplitFrame {
            train: f(&self.train)?,
            validation: f(&self.validation)?,
            test: f(&self.test)?,
            fractions: self.fractions,
            access: Arc::clone(&self.access),
        })
    }

    /// The source frame, rebuilt as train ++ validation ++ test.
    pub fn concat(&self) -> Result<TimeSeriesFrame, DatasetError> {
        TimeSeriesFrame::concat(&[&self.train, &self.validation, &self.test])
    }
}

pub fn chronological_split(
    frame: &TimeSeriesFrame,
    fractions: SplitFractions,
) -> Result<SplitFrame, DatasetError> {
    fractions.validate()?;
    let n = frame.len();
    if n < MIN_SPLIT_ROWS {
        return Err(DatasetError::FrameTooSmall {
            rows: n,
            minimum: MIN_SPLIT_ROWS,
        });
    }
    let (train, validation, test) = fractions.sizes(n);
    if train == 0 || validation == 0 || test == 0 {
        return Err(DatasetError::BadFractions(format!(
            "{n} rows give an empty block (train {train}, validation {validation}, test {test})"
        )));
    }
    Ok(SplitFrame {
        train: frame.slice_rows(0..train),
        validation: frame.slice_rows(train..train + validation),
        test: frame.slice_rows(train + validation..n),
        fractions,
        access: Arc::default(),
    })
}
