//! Gradient-descent training with convergence detection and validation-based
//! early stopping.
//!
//! Each epoch walks the training block (whole, or in seeded shuffled
//! mini-batches), applies `v <- momentum * v - lr * grad; w <- w + v`, then
//! records the MSE on the training and validation blocks. Training ends at the
//! first of:
//!
//! * the training loss changed by less than `tolerance` for
//!   [`CONVERGENCE_STREAK`] consecutive epochs, or hit exactly zero
//!   ([`StopReason::Converged`]);
//! * the validation loss has not improved for `patience` epochs
//!   ([`StopReason::EarlyStopped`]; the best-validation weights are returned);
//! * `max_epochs` ([`StopReason::MaxEpochs`]).
//!
//! A non-finite loss aborts with [`TrainError::DivergedLoss`].

mod gradient;

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::SplitFrame;
use crate::network::{Network, NetworkError};

pub use gradient::{
    batch_loss, gradient_check, gradients, mse_loss, numerical_gradient, Gradients, LayerGradient,
    RELATIVE_ERROR_FLOOR,
};

pub const CONVERGENCE_STREAK: usize = 3;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("layer {layer} uses hardlimit, which has no gradient")]
    NonDifferentiableActivation { layer: usize },
    #[error("loss became non-finite at epoch {epoch}; lower the learning rate")]
    DivergedLoss { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    FullBatch,
    MiniBatch(usize),
}

impl fmt::Display for BatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchMode::FullBatch => f.write_str("full"),
            BatchMode::MiniBatch(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub batch_mode: BatchMode,
    pub patience: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.0,
            max_epochs: 5000,
            batch_mode: BatchMode::FullBatch,
            patience: 50,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidConfig(m));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            ));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return bad(format!("momentum {} must be in [0, 1)", self.momentum));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive".into());
        }
        if self.patience == 0 {
            return bad("patience must be positive".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance {} must be positive", self.tolerance));
        }
        if self.batch_mode == BatchMode::MiniBatch(0) {
            return bad("mini-batch size must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    EarlyStopped,
    MaxEpochs,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::EarlyStopped => "early_stopped",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub epochs_run: usize,
    pub train_loss_history: Vec<f64>,
    pub validation_loss_history: Vec<f64>,
    pub stop_reason: StopReason,
    /// 1-based epoch with the lowest validation loss.
    pub best_epoch: usize,
    pub final_network: Network,
}

impl TrainingReport {
    /// `epoch,train_loss,val_loss`, one line per epoch.
    pub fn write_loss_history<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,train_loss,val_loss")?;
        for (i, (t, v)) in self
            .train_loss_history
            .iter()
            .zip(&self.validation_loss_history)
            .enumerate()
        {
            writeln!(w, "{},{t},{v}", i + 1)?;
        }
        Ok(())
    }
}

fn apply_update(
    net: &mut Network,
    velocity: &mut [f64],
    grads: &Gradients,
    config: &TrainingConfig,
) {
    let mut i = 0;
    for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
        for (w, gw) in layer.weights_mut().iter_mut().zip(&g.weights) {
            velocity[i] = config.momentum * velocity[i] - config.learning_rate * gw;
            *w += velocity[i];
            i += 1;
        }
        for (b, gb) in layer.biases_mut().iter_mut().zip(&g.biases) {
            velocity[i] = config.momentum * velocity[i] - config.learning_rate * gb;
            *b += velocity[i];
            i += 1;
        }
    }
}

/// Train on `split.train()`, early-stop on `split.validation()`. The test
/// block is never read. `split` is expected to be scaled already.
pub fn train(
    mut net: Network,
    split: &SplitFrame,
    config: &TrainingConfig,
) -> Result<TrainingReport, TrainError> {
    config.validate()?;
    if !net.is_differentiable() {
        let layer = net
            .layers()
            .iter()
            .position(|l| !l.spec().activation.is_differentiable())
            .unwrap_or(0);
        return Err(TrainError::NonDifferentiableActivation { layer });
    }
    let train_block = split.train();
    let val_block = split.validation();
    let train_x = train_block.input_matrix();
    let train_y = train_block.target_matrix();
    let val_x = val_block.input_matrix();
    let val_y = val_block.target_matrix();
    if train_x.first().map(Vec::len) != Some(net.input_width()) {
        return Err(TrainError::ShapeMismatch(format!(
            "network takes {} inputs, frame has {} input columns",
            net.input_width(),
            train_block.input_indices().len()
        )));
    }
    if train_y[0].len() != net.output_width() {
        return Err(TrainError::ShapeMismatch(format!(
            "network has {} outputs, frame has {} target columns",
            net.output_width(),
            train_y[0].len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut velocity = vec![0.0; net.parameter_count()];

    let mut previous = batch_loss(&net, &train_x, &train_y)?;
    if !previous.is_finite() {
        return Err(TrainError::DivergedLoss { epoch: 0 });
    }
    let mut train_hist = Vec::new();
    let mut val_hist = Vec::new();
    let mut best: Option<(f64, usize, Network)> = None;
    let mut since_best = 0;
    let mut streak = 0;
    let mut stop = StopReason::MaxEpochs;

    for epoch in 1..=config.max_epochs {
        match config.batch_mode {
            BatchMode::FullBatch => {
                let g = gradients(&net, &train_x, &train_y)?;
                apply_update(&mut net, &mut velocity, &g, config);
            }
            BatchMode::MiniBatch(size) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(size) {
                    let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| train_x[i].clone()).collect();
                    let ys: Vec<Vec<f64>> = chunk.iter().map(|&i| train_y[i].clone()).collect();
                    let g = gradients(&net, &xs, &ys)?;
                    apply_update(&mut net, &mut velocity, &g, config);
                }
            }
        }

        let train_loss = batch_loss(&net, &train_x, &train_y)?;
        let val_loss = batch_loss(&net, &val_x, &val_y)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(TrainError::DivergedLoss { epoch });
        }
        train_hist.push(train_loss);
        val_hist.push(val_loss);

        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, net.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }

        if (train_loss - previous).abs() < config.tolerance {
            streak += 1;
        } else {
            streak = 0;
        }
        previous = train_loss;

        if train_loss == 0.0 || streak >= CONVERGENCE_STREAK {
            stop = StopReason::Converged;
            break;
        }
        if since_best >= config.patience {
            stop = StopReason::EarlyStopped;
            break;
        }
    }

    let (_, best_epoch, best_net) = best.expect("at least one epoch ran");
    let final_network = if stop == StopReason::EarlyStopped {
        best_net
    } else {
        net
    };
    Ok(TrainingReport {
        epochs_run: train_hist.len(),
        train_loss_history: train_hist,
        validation_loss_history: val_hist,
        stop_reason: stop,
        best_epoch,
        final_network,
    })
}
