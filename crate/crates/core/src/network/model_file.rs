//! Plain-text model files.
//!
//! ```text
//! ffnn-model v1
//! seed 1
//! layers 2
//! input oil
//! output tepix
//! layer 5 40 sigmoid
//! w 0.1 -0.3 ...      (one line per neuron, fan_in values)
//! b 0 0 ...           (neurons values)
//! layer 40 1 linear
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Activation, Layer, LayerSpec, Network, NetworkError};

const MAGIC: &str = "ffnn-model v1";

impl Network {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        match self.seed {
            Some(s) => {
                let _ = writeln!(out, "seed {s}");
            }
            None => out.push_str("seed none\n"),
        }
        let _ = writeln!(out, "layers {}", self.layers.len());
        for name in &self.input_names {
            let _ = writeln!(out, "input {name}");
        }
        for name in &self.output_names {
            let _ = writeln!(out, "output {name}");
        }
        for layer in &self.layers {
            let s = layer.spec;
            let _ = writeln!(out, "layer {} {} {}", s.fan_in, s.neurons, s.activation);
            for row in layer.weights.chunks_exact(s.fan_in) {
                out.push('w');
                for v in row {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
            out.push('b');
            for v in &layer.biases {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NetworkError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let err = |line: usize, message: String| NetworkError::Parse { line, message };

        match lines.next() {
            Some((_, MAGIC)) => {}
            Some((line, other)) => {
                return Err(err(line, format!("expected '{MAGIC}', found '{other}'")))
            }
            None => return Err(err(0, "empty model file".into())),
        }

        let mut seed = None;
        let mut layer_count = None;
        let mut input_names = Vec::new();
        let mut output_names = Vec::new();
        let mut layers = Vec::new();

        while let Some((line, text)) = lines.next() {
            let (key, rest) = text.split_once(' ').unwrap_or((text, ""));
            let rest = rest.trim();
            match key {
                "seed" => {
                    seed = match rest {
                        "none" => None,
                        s => Some(
                            s.parse()
                                .map_err(|_| err(line, format!("bad seed '{s}'")))?,
                        ),
                    }
                }
                "layers" => {
                    layer_count = Some(
                        rest.parse::<usize>()
                            .map_err(|_| err(line, format!("bad layer count '{rest}'")))?,
                    )
                }
                "input" => input_names.push(rest.to_string()),
                "output" => output_names.push(rest.to_string()),
                "layer" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(err(
                            line,
                            "expected 'layer <fan_in> <neurons> <activation>'".into(),
                        ));
                    }
                    let fan_in: usize = parts[0]
                        .parse()
                        .map_err(|_| err(line, "bad fan_in".into()))?;
                    let neurons: usize = parts[1]
                        .parse()
                        .map_err(|_| err(line, "bad neuron count".into()))?;
                    let activation: Activation = parts[2].parse().map_err(|m| err(line, m))?;
                    let spec = LayerSpec {
                        fan_in,
                        neurons,
                        activation,
                    };
                    let mut weights = Vec::with_capacity(fan_in * neurons);
                    for _ in 0..neurons {
                        let row = numbers(lines.next(), "w", fan_in)?;
                        weights.extend(row);
                    }
                    let biases = numbers(lines.next(), "b", neurons)?;
                    layers.push(Layer::new(spec, weights, biases)?);
                }
                other => return Err(err(line, format!("unknown key '{other}'"))),
            }
        }

        if layer_count != Some(layers.len()) {
            return Err(err(
                0,
                format!(
                    "header declares {layer_count:?} layers, file has {}",
                    layers.len()
                ),
            ));
        }
        let mut net = Network::from_layers(layers)?;
        net.seed = seed;
        if !input_names.is_empty() || !output_names.is_empty() {
            net = net.with_names(input_names, output_names)?;
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetworkError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                NetworkError::FileNotFound(path.to_path_buf())
            } else {
                NetworkError::Io(e)
            }
        })?;
        Self::from_text(&text)
    }
}

fn numbers(line: Option<(usize, &str)>, tag: &str, count: usize) -> Result<Vec<f64>, NetworkError> {
    let (line, text) = line.ok_or(NetworkError::Parse {
        line: 0,
        message: format!("unexpected end of file, expected '{tag}' line"),
    })?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(tag) {
        return Err(NetworkError::Parse {
            line,
            message: format!("expected '{tag}' line"),
        });
    }
    let values = parts
        .map(|p| {
            p.parse::<f64>().map_err(|_| NetworkError::Parse {
                line,
                message: format!("bad number '{p}'"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != count {
        return Err(NetworkError::Parse {
            line,
            message: format!("expected {count} values, found {}", values.len()),
        });
    }
    Ok(values)
}
