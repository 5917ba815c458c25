//! Reference implementations used as test oracles. Each one recomputes a
//! library result by a separate route: explicit per-neuron loops, double-double
//! arithmetic, or a closed form.

#![allow(dead_code)]

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use regime_ffnn::dataset::synthetic::{SeriesSpec, SyntheticSpec, TargetModel, TargetSpec};
use regime_ffnn::network::{Activation, LayerSpec, Network};

fn activate(a: Activation, z: f64) -> f64 {
    match a {
        Activation::Hardlimit => {
            if z >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Tanh => z.tanh(),
        Activation::Linear => z,
    }
}

/// Forward pass written directly from `y_k = a(sum_j W_kj p_j + b_k)`.
pub fn reference_forward(net: &Network, input: &[f64]) -> Vec<f64> {
    let mut p = input.to_vec();
    for layer in net.layers() {
        let spec = layer.spec();
        let mut next = vec![0.0; spec.neurons];
        for (k, out) in next.iter_mut().enumerate() {
            let mut u = 0.0;
            for (j, pj) in p.iter().enumerate() {
                u += layer.weights()[k * spec.fan_in + j] * pj;
            }
            *out = activate(spec.activation, u + layer.biases()[k]);
        }
        p = next;
    }
    p
}

fn activate_dd(a: Activation, z: TwoFloat) -> TwoFloat {
    match a {
        Activation::Sigmoid => TwoFloat::from(1.0) / (TwoFloat::from(1.0) + (-z).exp()),
        Activation::Tanh => z.tanh(),
        Activation::Linear => z,
        Activation::Hardlimit => panic!("hardlimit has no gradient"),
    }
}

fn loss_dd(
    params: &[TwoFloat],
    specs: &[LayerSpec],
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> TwoFloat {
    let mut total = TwoFloat::from(0.0);
    let mut count = 0usize;
    for (x, t) in inputs.iter().zip(targets) {
        let mut p: Vec<TwoFloat> = x.iter().map(|&v| TwoFloat::from(v)).collect();
        let mut offset = 0;
        for s in specs {
            let w = &params[offset..offset + s.fan_in * s.neurons];
            let b =
                &params[offset + s.fan_in * s.neurons..offset + s.fan_in * s.neurons + s.neurons];
            offset += s.fan_in * s.neurons + s.neurons;
            p = (0..s.neurons)
                .map(|k| {
                    let mut u = TwoFloat::from(0.0);
                    for j in 0..s.fan_in {
                        u += w[k * s.fan_in + j] * p[j];
                    }
                    activate_dd(s.activation, u + b[k])
                })
                .collect();
        }
        for (o, y) in p.iter().zip(t) {
            let d = *o - *y;
            total += d * d;
            count += 1;
        }
    }
    total / count as f64
}

/// Central difference `(L(w + h) - L(w - h)) / 2h` per parameter, with the loss
/// evaluated in double-double so the quotient carries no f64 cancellation error.
pub fn dd_numerical_gradient(
    net: &Network,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h: f64,
) -> Vec<f64> {
    let specs = net.layer_specs();
    let mut params: Vec<TwoFloat> = net.parameters().into_iter().map(TwoFloat::from).collect();
    (0..params.len())
        .map(|k| {
            let original = params[k];
            params[k] = original + h;
            let plus = loss_dd(&params, &specs, inputs, targets);
            params[k] = original - h;
            let minus = loss_dd(&params, &specs, inputs, targets);
            params[k] = original;
            ((plus - minus) / (2.0 * h)).hi()
        })
        .collect()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

pub struct GradientCase {
    pub net: Network,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

/// Random differentiable net: widths 1-10 in, 1-64 hidden, 1-10 out, batch 1-8,
/// data uniform on (-1, 1).
pub fn gradient_case(case: u64) -> GradientCase {
    let acts = [Activation::Sigmoid, Activation::Tanh, Activation::Linear];
    let mut rng = ChaCha8Rng::seed_from_u64(case);
    let i = rng.random_range(1..=10);
    let h = rng.random_range(1..=64);
    let o = rng.random_range(1..=10);
    let a1 = acts[rng.random_range(0..3)];
    let a2 = acts[rng.random_range(0..3)];
    let net = Network::seeded(&[i, h, o], &[a1, a2], case).unwrap();
    let b = rng.random_range(1..=8);
    let inputs = (0..b)
        .map(|_| (0..i).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let targets = (0..b)
        .map(|_| (0..o).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    GradientCase {
        net,
        inputs,
        targets,
    }
}

/// Random net with any activation, including hardlimit, plus one input vector.
pub fn forward_case(case: u64) -> (Network, Vec<f64>) {
    let acts = [
        Activation::Hardlimit,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Linear,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + case);
    let depth = rng.random_range(1..=3);
    let mut sizes = vec![rng.random_range(1..=10)];
    for _ in 0..depth {
        sizes.push(rng.random_range(1..=32));
    }
    let activations: Vec<Activation> = (0..depth).map(|_| acts[rng.random_range(0..4)]).collect();
    let net = Network::seeded(&sizes, &activations, case).unwrap();
    let input = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
    (net, input)
}

/// Metrics recomputed with double-double sums: (rmse, mae, mape %, hit rate).
pub fn reference_metrics(actual: &[f64], predicted: &[f64], epsilon: f64) -> (f64, f64, f64, f64) {
    let n = actual.len() as f64;
    let mut sq = TwoFloat::from(0.0);
    let mut ab = TwoFloat::from(0.0);
    let mut pct = TwoFloat::from(0.0);
    let mut hits = 0usize;
    for (&s, &o) in actual.iter().zip(predicted) {
        let d = TwoFloat::new_sub(s, o);
        sq += d * d;
        ab += d.abs();
        pct += (d / s).abs();
        if (s - o).abs() / s.abs() <= epsilon {
            hits += 1;
        }
    }
    (
        (sq / n).sqrt().hi(),
        (ab / n).hi(),
        (pct * 100.0 / n).hi(),
        hits as f64 / n,
    )
}

/// Mean, sample standard deviation, population skewness and excess kurtosis
/// from raw power sums in double-double.
pub fn reference_moments(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mut s = [TwoFloat::from(0.0); 5];
    for &v in values {
        let x = TwoFloat::from(v);
        let mut p = TwoFloat::from(1.0);
        for slot in s.iter_mut() {
            *slot += p;
            p *= x;
        }
    }
    let m = s[1] / n;
    let m2 = s[2] / n - m * m;
    let m3 = s[3] / n - m * s[2] / n * 3.0 + m * m * m * 2.0;
    let m4 = s[4] / n - m * s[3] / n * 4.0 + m * m * s[2] / n * 6.0 - m * m * m * m * 3.0;
    let sd = (m2 * n / (n - 1.0)).sqrt();
    let skew = m3 / (m2 * m2.sqrt());
    let kurt = m4 / (m2 * m2) - 3.0;
    (m.hi(), sd.hi(), skew.hi(), kurt.hi())
}

/// Five normal inputs and a noiseless target `y = 0.5 x1 - 0.2 x2`.
pub fn learnability_spec() -> SyntheticSpec {
    SyntheticSpec {
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
    }
}
