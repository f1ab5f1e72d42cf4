//! Small dense feed-forward regressor with hand-written backprop.

use rand::Rng;

use crate::error::Result;
use crate::mantissa::{quantize_in_place, QuantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, x: f32) -> f32 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f32) -> f32 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f32>,
    pub biases: Vec<f32>,
    pub activation: Activation,
}

impl Dense {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt() as f32;
        let weights = (0..inputs * outputs).map(|_| rng.random_range(-limit..limit)).collect();
        Dense { inputs, outputs, weights, biases: vec![0.0; outputs], activation }
    }

    fn forward(&self, input: &[f32], out: &mut [f32]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.chunks_exact(self.inputs).zip(&self.biases)) {
            let z: f32 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f32>() + b;
            *o = self.activation.apply(z);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyNetwork {
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone)]
struct Gradients {
    weights: Vec<Vec<f32>>,
    biases: Vec<Vec<f32>>,
}

impl ToyNetwork {
    /// Dense stack with tanh hidden layers and a linear output layer.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        let last = sizes.len().saturating_sub(2);
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { Activation::Linear } else { Activation::Tanh };
                Dense::init(w[0], w[1], act, rng)
            })
            .collect();
        ToyNetwork { layers }
    }

    /// Identity map of the given width: one linear layer with an identity matrix.
    pub fn identity(width: usize) -> Self {
        let mut weights = vec![0.0; width * width];
        for i in 0..width {
            weights[i * width + i] = 1.0;
        }
        ToyNetwork {
            layers: vec![Dense {
                inputs: width,
                outputs: width,
                weights,
                biases: vec![0.0; width],
                activation: Activation::Linear,
            }],
        }
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Every weight and bias tensor, in layer order.
    pub fn parameters(&self) -> impl Iterator<Item = &[f32]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut Vec<f32>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.biases])
    }

    pub fn all_finite(&self) -> bool {
        self.parameters().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Quantizes weights and biases alike.
    pub fn quantize(&mut self, spec: QuantSpec) -> Result<()> {
        for p in self.parameters_mut() {
            quantize_in_place(p, spec)?;
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f32]) -> Vec<f32> {
        let mut current = input.to_vec();
        for layer in &self.layers {
            let mut next = vec![0.0; layer.outputs];
            layer.forward(&current, &mut next);
            current = next;
        }
        current
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// One SGD step on the batch, minimizing mean squared error. Returns the batch loss.
    pub fn sgd_step(&mut self, inputs: &[&[f32]], targets: &[&[f32]], learning_rate: f32) -> f32 {
        let mut grads = self.zero_gradients();
        let scale = 2.0 / (inputs.len() * self.output_len()) as f32;
        let mut loss = 0.0f64;
        let mut activations: Vec<Vec<f32>> = Vec::with_capacity(self.layers.len() + 1);
        for (x, t) in inputs.iter().zip(targets) {
            activations.clear();
            activations.push(x.to_vec());
            for layer in &self.layers {
                let mut next = vec![0.0; layer.outputs];
                layer.forward(activations.last().expect("input pushed"), &mut next);
                activations.push(next);
            }
            let output = activations.last().expect("at least one layer");
            let mut delta: Vec<f32> = output
                .iter()
                .zip(t.iter())
                .map(|(y, t)| {
                    let e = y - t;
                    loss += (e as f64) * (e as f64);
                    scale * e
                })
                .collect();
            for (li, layer) in self.layers.iter().enumerate().rev() {
                let out = &activations[li + 1];
                for (d, &y) in delta.iter_mut().zip(out) {
                    *d *= layer.activation.derivative_from_output(y);
                }
                let input = &activations[li];
                let gw = &mut grads.weights[li];
                for (o, &d) in delta.iter().enumerate() {
                    grads.biases[li][o] += d;
                    for (g, &x) in gw[o * layer.inputs..(o + 1) * layer.inputs].iter_mut().zip(input) {
                        *g += d * x;
                    }
                }
                if li > 0 {
                    let mut prev = vec![0.0f32; layer.inputs];
                    for (o, &d) in delta.iter().enumerate() {
                        for (p, &w) in prev.iter_mut().zip(&layer.weights[o * layer.inputs..(o + 1) * layer.inputs]) {
                            *p += d * w;
                        }
                    }
                    delta = prev;
                }
            }
        }
        for (li, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[li]) {
                *w -= learning_rate * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(&grads.biases[li]) {
                *b -= learning_rate * g;
            }
        }
        (loss / (inputs.len() * self.output_len()) as f64) as f32
    }
}
