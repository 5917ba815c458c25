//! Trains the 5-13-1 sigmoid net on a noiseless linear target and prints
//! train loss and test-block metrics for three seeds.
//!
//! ```text
//! cargo run --release -p regime-ffnn --example learnability_pilot -- [rows] [batch] [momentum]
//! ```
//!
//! `batch = 0` means full batch.

use chrono::NaiveDate;
use regime_ffnn::dataset::synthetic::{SeriesSpec, SyntheticSpec, TargetModel, TargetSpec};
use regime_ffnn::trainer::BatchMode;
use regime_ffnn::{
    build_network, chronological_split, evaluate, generate_synthetic, train, Activation,
    MinMaxScaler, SplitFractions, TrainingConfig,
};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args()
        .nth(i)
        .and_then(|a| a.parse().ok())
        .unwrap_or(default)
}

fn main() {
    let rows: usize = arg(1, 1000);
    let batch: usize = arg(2, 32);
    let momentum: f64 = arg(3, 0.0);

    let spec = SyntheticSpec {
        start: NaiveDate::from_ymd_opt(2010, 1, 4).unwrap(),
        inputs: vec![
            SeriesSpec::new("x1", 15.0, 3.0),
            SeriesSpec::new("x2", 5.0, 3.0),
            SeriesSpec::new("x3", 10.0, 2.0),
            SeriesSpec::new("x4", 10.0, 2.0),
            SeriesSpec::new("x5", 10.0, 2.0),
        ],
        targets: vec![TargetSpec {
            name: "y".into(),
            model: TargetModel::Linear {
                intercept: 0.0,
                weights: vec![0.5, -0.2, 0.0, 0.0, 0.0],
                noise_sd: 0.0,
            },
        }],
        shocks: vec![],
    };

    for seed in 1..=3u64 {
        let frame = generate_synthetic(&spec, rows, seed).unwrap();
        let split = chronological_split(&frame, SplitFractions::DEFAULT).unwrap();
        let scaler = MinMaxScaler::fit(split.train()).unwrap();
        let scaled = split.map_blocks(|b| scaler.transform(b)).unwrap();
        let net = build_network(5, 13, 1, Activation::Sigmoid, Activation::Linear, seed).unwrap();
        let config = TrainingConfig {
            max_epochs: 2000,
            momentum,
            batch_mode: if batch == 0 {
                BatchMode::FullBatch
            } else {
                BatchMode::MiniBatch(batch)
            },
            seed,
            ..Default::default()
        };
        let started = std::time::Instant::now();
        let report = train(net, &scaled, &config).unwrap();
        let eval = evaluate(&report.final_network, &scaler, &scaled, "pilot", 0.1).unwrap();
        let cell = &eval.cells[0];
        println!(
            "seed {seed}: {} epochs ({}), train mse {:.3e}, test mape {:.3}%, hit rate {:.3}, {:.2?}",
            report.epochs_run,
            report.stop_reason,
            report.train_loss_history.last().unwrap(),
            cell.original.mape.unwrap_or(f64::NAN),
            cell.original.hit_rate.unwrap_or(f64::NAN),
            started.elapsed()
        );
    }
}
