use crate::network::Network;

use super::TrainError;

/// Mean over samples and output dimensions of `(predicted - observed)^2`.
pub fn mse_loss(predicted: &[Vec<f64>], observed: &[Vec<f64>]) -> Result<f64, TrainError> {
    if predicted.len() != observed.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} predictions for {} observations",
            predicted.len(),
            observed.len()
        )));
    }
    if predicted.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, o) in predicted.iter().zip(observed) {
        if p.len() != o.len() {
            return Err(TrainError::ShapeMismatch(format!(
                "prediction width {} vs observation width {}",
                p.len(),
                o.len()
            )));
        }
        for (a, b) in p.iter().zip(o) {
            let d = a - b;
            sum += d * d;
        }
        count += p.len();
    }
    if count == 0 {
        return Err(TrainError::EmptyBatch);
    }
    Ok(sum / count as f64)
}

/// Loss of `net` on a batch.
pub fn batch_loss(
    net: &Network,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<f64, TrainError> {
    let predicted = net.forward_batch(inputs)?;
    mse_loss(&predicted, targets)
}

/// Parameter-shaped gradient of [`mse_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    /// Row-major, same layout as the layer's weights.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Gradients {
    fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights().len()],
                    biases: vec![0.0; l.biases().len()],
                })
                .collect(),
        }
    }

    /// Same order as [`Network::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.flatten().into_iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

fn check_batch(net: &Network, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(), TrainError> {
    if let Some(i) = net
        .layers()
        .iter()
        .position(|l| !l.spec().activation.is_differentiable())
    {
        return Err(TrainError::NonDifferentiableActivation { layer: i });
    }
    if inputs.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    if inputs.len() != targets.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} inputs for {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    if let Some(t) = targets.iter().find(|t| t.len() != net.output_width()) {
        return Err(TrainError::ShapeMismatch(format!(
            "target width {} vs network output {}",
            t.len(),
            net.output_width()
        )));
    }
    Ok(())
}

/// Reverse-mode gradient of the batch MSE with respect to every weight and bias.
pub fn gradients(
    net: &Network,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<Gradients, TrainError> {
    check_batch(net, inputs, targets)?;
    let layers = net.layers();
    let mut grads = Gradients::zeros_like(net);
    let scale = 2.0 / (inputs.len() * net.output_width()) as f64;

    for (input, target) in inputs.iter().zip(targets) {
        let trace = net.forward_trace(input)?;
        let output = &trace[layers.len()];
        let last = layers[layers.len() - 1].spec().activation;
        let mut delta: Vec<f64> = output
            .iter()
            .zip(target)
            .map(|(&y, &t)| scale * (y - t) * last.derivative_from_output(y).expect("checked"))
            .collect();

        for l in (0..layers.len()).rev() {
            let layer = &layers[l];
            let fan_in = layer.spec().fan_in;
            let p = &trace[l];
            let g = &mut grads.layers[l];
            for (k, &d) in delta.iter().enumerate() {
                g.biases[k] += d;
                for (gw, &pj) in g.weights[k * fan_in..(k + 1) * fan_in].iter_mut().zip(p) {
                    *gw += d * pj;
                }
            }
            if l == 0 {
                break;
            }
            let below = layers[l - 1].spec().activation;
            delta = (0..fan_in)
                .map(|j| {
                    let back: f64 = delta
                        .iter()
                        .enumerate()
                        .map(|(k, &d)| layer.weight(k, j) * d)
                        .sum();
                    back * below.derivative_from_output(p[j]).expect("checked")
                })
                .collect();
        }
    }
    Ok(grads)
}

/// Central-difference estimate of the batch-MSE gradient, one parameter at a
/// time, in [`Network::parameters`] order.
pub fn numerical_gradient(
    net: &Network,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h: f64,
) -> Result<Vec<f64>, TrainError> {
    check_batch(net, inputs, targets)?;
    let mut probe = net.clone();
    (0..net.parameter_count())
        .map(|i| {
            let original = *probe.parameter_mut(i);
            *probe.parameter_mut(i) = original + h;
            let plus = batch_loss(&probe, inputs, targets)?;
            *probe.parameter_mut(i) = original - h;
            let minus = batch_loss(&probe, inputs, targets)?;
            *probe.parameter_mut(i) = original;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

/// Absolute floor on the denominator of the relative gradient error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-8;

/// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)` over all parameters.
pub fn gradient_check(
    net: &Network,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h: f64,
) -> Result<f64, TrainError> {
    let analytic = gradients(net, inputs, targets)?.flatten();
    let numeric = numerical_gradient(net, inputs, targets, h)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(RELATIVE_ERROR_FLOOR))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, Activation, Network};

    #[test]
    fn mse_examples() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(mse_loss(&[vec![2.0]], &[vec![0.0]]).unwrap(), 4.0);
        assert!(matches!(mse_loss(&[], &[]), Err(TrainError::EmptyBatch)));
        assert!(matches!(
            mse_loss(&[vec![1.0]], &[vec![1.0, 2.0]]),
            Err(TrainError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn hand_derived_linear_chain() {
        // y = w2 * (w1 * x + b1) + b2, loss (y - t)^2.
        // With w1 = 0.5, b1 = 0.1, w2 = -2, b2 = 0.3, x = 1, t = 0:
        // h = 0.6, y = -0.9
        // dL/dy = -1.8; dL/db2 = -1.8; dL/dw2 = -1.8 * 0.6 = -1.08
        // dL/dh = -1.8 * -2 = 3.6; dL/db1 = 3.6; dL/dw1 = 3.6 * 1 = 3.6
        let mut net =
            Network::zeros(&[1, 1, 1], &[Activation::Linear, Activation::Linear]).unwrap();
        for (i, v) in [0.5, 0.1, -2.0, 0.3].into_iter().enumerate() {
            *net.parameter_mut(i) = v;
        }
        let g = gradients(&net, &[vec![1.0]], &[vec![0.0]])
            .unwrap()
            .flatten();
        let expected = [3.6, 3.6, -1.08, -1.8];
        for (a, e) in g.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn zero_network_gradient() {
        // Zero weights: only the output bias sees the residual, dL/db2 = 2 * (0 - 0.5).
        let net = Network::zeros(&[1, 1, 1], &[Activation::Linear, Activation::Linear]).unwrap();
        let g = gradients(&net, &[vec![1.0]], &[vec![0.5]])
            .unwrap()
            .flatten();
        assert_eq!(g, vec![0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        let net = build_network(3, 4, 2, Activation::Sigmoid, Activation::Linear, 5).unwrap();
        let inputs = vec![vec![0.1, 0.2, 0.3], vec![0.9, 0.1, 0.5]];
        let targets = net.forward_batch(&inputs).unwrap();
        assert_eq!(gradients(&net, &inputs, &targets).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hardlimit_is_rejected() {
        let net = build_network(2, 2, 1, Activation::Hardlimit, Activation::Linear, 1).unwrap();
        assert!(matches!(
            gradients(&net, &[vec![0.0, 0.0]], &[vec![0.0]]),
            Err(TrainError::NonDifferentiableActivation { layer: 0 })
        ));
    }

    #[test]
    fn small_sigmoid_net_passes_gradient_check() {
        let net = build_network(5, 8, 2, Activation::Sigmoid, Activation::Linear, 11).unwrap();
        let inputs: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..5).map(|j| ((i * 5 + j) as f64 * 0.37).sin()).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..6).map(|i| vec![(i as f64).cos(), 0.3]).collect();
        let err = gradient_check(&net, &inputs, &targets, 1e-5).unwrap();
        assert!(err < 1e-6, "max relative error {err}");
    }
}
