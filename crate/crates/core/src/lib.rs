//! Feed-forward neural-network regression over multivariate daily financial
//! time series, with min-max scaling, leakage-safe chronological splits and
//! regime-comparison error reporting.
//!
//! The pipeline for one regime is:
//! [`dataset::slice_regime`] → [`dataset::chronological_split`] →
//! [`scaling::MinMaxScaler::fit`] on the training block →
//! [`network::build_network`] sized by [`network::hidden_neuron_count`] →
//! [`trainer::train`] → [`metrics::evaluate`] on the test block.

pub mod dataset;
pub mod metrics;
pub mod network;
pub mod scaling;
pub mod trainer;

pub use dataset::{
    chronological_split, descriptive_stats, generate_synthetic, load_csv, slice_regime, Column,
    ColumnRole, RegimeSpec, SplitFractions, SplitFrame, TimeSeriesFrame,
};
pub use metrics::{evaluate, EvaluationReport};
pub use network::{build_network, hidden_neuron_count, Activation, Network};
pub use scaling::MinMaxScaler;
pub use trainer::{train, TrainingConfig, TrainingReport};
