//! Fully connected feed-forward networks.
//!
//! Each layer computes `u_k = sum_j W_kj * p_j` and `y_k = a(u_k + b_k)`;
//! the outputs of one layer are the inputs `p` of the next.

mod activation;
mod model_file;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use activation::Activation;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("non-finite parameter in layer {layer}")]
    NonFiniteParameter { layer: usize },
    #[error("non-finite input at position {0}")]
    NonFiniteInput(usize),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hidden-layer width from `(inputs + outputs) / 2 + sqrt(training_patterns)`,
/// floored, never below 1.
///
/// Five inputs, two outputs and 1383 training rows give 40.
pub fn hidden_neuron_count(inputs: usize, outputs: usize, training_patterns: usize) -> usize {
    let raw = (inputs + outputs) as f64 / 2.0 + (training_patterns as f64).sqrt();
    (raw.floor() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub neurons: usize,
    pub activation: Activation,
}

/// One layer: `neurons x fan_in` weights stored row-major, one bias per neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    spec: LayerSpec,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    pub fn new(spec: LayerSpec, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self, NetworkError> {
        if spec.fan_in == 0 || spec.neurons == 0 {
            return Err(NetworkError::InvalidTopology(
                "layer with zero width".into(),
            ));
        }
        if weights.len() != spec.fan_in * spec.neurons {
            return Err(NetworkError::ShapeMismatch {
                expected: spec.fan_in * spec.neurons,
                found: weights.len(),
            });
        }
        if biases.len() != spec.neurons {
            return Err(NetworkError::ShapeMismatch {
                expected: spec.neurons,
                found: biases.len(),
            });
        }
        Ok(Self {
            spec,
            weights,
            biases,
        })
    }

    pub fn zeros(spec: LayerSpec) -> Self {
        Self {
            spec,
            weights: vec![0.0; spec.fan_in * spec.neurons],
            biases: vec![0.0; spec.neurons],
        }
    }

    pub fn spec(&self) -> LayerSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    /// `W_kj`, neuron `k`, input `j`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.weights[k * self.spec.fan_in + j]
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        let m = self.spec.fan_in;
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(m)
                .zip(&self.biases)
                .map(|(row, &b)| {
                    let u: f64 = row.iter().zip(input).map(|(w, p)| w * p).sum();
                    self.spec.activation.apply(u + b)
                }),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    seed: Option<u64>,
    input_names: Vec<String>,
    output_names: Vec<String>,
}

impl Network {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::InvalidTopology("no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].spec.fan_in != pair[0].spec.neurons {
                return Err(NetworkError::InvalidTopology(format!(
                    "layer {} has fan_in {} but layer {} has {} neurons",
                    i + 1,
                    pair[1].spec.fan_in,
                    i,
                    pair[0].spec.neurons
                )));
            }
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer
                .weights
                .iter()
                .chain(&layer.biases)
                .any(|v| !v.is_finite())
            {
                return Err(NetworkError::NonFiniteParameter { layer: i });
            }
        }
        Ok(Self {
            layers,
            seed: None,
            input_names: Vec::new(),
            output_names: Vec::new(),
        })
    }

    /// Layers of the given widths (`sizes[0]` is the input width), weights
    /// drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` with a seeded ChaCha
    /// stream, biases zero.
    pub fn seeded(
        sizes: &[usize],
        activations: &[Activation],
        seed: u64,
    ) -> Result<Self, NetworkError> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(NetworkError::InvalidTopology(format!(
                "{} sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let spec = LayerSpec {
                    fan_in: w[0],
                    neurons: w[1],
                    activation,
                };
                if spec.fan_in == 0 || spec.neurons == 0 {
                    return Err(NetworkError::InvalidTopology(
                        "layer with zero width".into(),
                    ));
                }
                let r = 1.0 / (spec.fan_in as f64).sqrt();
                let weights = (0..spec.fan_in * spec.neurons)
                    .map(|_| rng.random_range(-r..=r))
                    .collect();
                Layer::new(spec, weights, vec![0.0; spec.neurons])
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut net = Self::from_layers(layers)?;
        net.seed = Some(seed);
        Ok(net)
    }

    /// Same topology as [`Network::seeded`] with every parameter zero.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self, NetworkError> {
        let mut net = Self::seeded(sizes, activations, 0)?;
        for layer in &mut net.layers {
            layer.weights.fill(0.0);
        }
        net.seed = None;
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].spec.fan_in
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.neurons
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    /// Attach column names to the network's inputs and outputs.
    pub fn with_names(
        mut self,
        inputs: Vec<String>,
        outputs: Vec<String>,
    ) -> Result<Self, NetworkError> {
        if inputs.len() != self.input_width() {
            return Err(NetworkError::ShapeMismatch {
                expected: self.input_width(),
                found: inputs.len(),
            });
        }
        if outputs.len() != self.output_width() {
            return Err(NetworkError::ShapeMismatch {
                expected: self.output_width(),
                found: outputs.len(),
            });
        }
        self.input_names = inputs;
        self.output_names = outputs;
        Ok(self)
    }

    pub fn is_differentiable(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.spec.activation.is_differentiable())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// All parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn parameter_mut(&mut self, mut index: usize) -> &mut f64 {
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            if index < nw {
                return &mut layer.weights[index];
            }
            index -= nw;
            if index < layer.biases.len() {
                return &mut layer.biases[index];
            }
            index -= layer.biases.len();
        }
        panic!("parameter index out of range");
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NetworkError> {
        if input.len() != self.input_width() {
            return Err(NetworkError::ShapeMismatch {
                expected: self.input_width(),
                found: input.len(),
            });
        }
        if let Some(i) = input.iter().position(|v| !v.is_finite()) {
            return Err(NetworkError::NonFiniteInput(i));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetworkError> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Outputs of every layer, starting with the input itself.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>, NetworkError> {
        self.check_input(input)?;
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(input.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.spec.neurons);
            layer.forward_into(&trace[trace.len() - 1], &mut out);
            trace.push(out);
        }
        Ok(trace)
    }

    pub fn forward_batch(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NetworkError> {
        inputs.iter().map(|p| self.forward(p)).collect()
    }
}

/// Single-hidden-layer network `inputs -> hidden -> outputs`.
pub fn build_network(
    inputs: usize,
    hidden: usize,
    outputs: usize,
    hidden_activation: Activation,
    output_activation: Activation,
    seed: u64,
) -> Result<Network, NetworkError> {
    Network::seeded(
        &[inputs, hidden, outputs],
        &[hidden_activation, output_activation],
        seed,
    )
}
