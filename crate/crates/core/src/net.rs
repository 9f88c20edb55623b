//! Small fully connected network shared by the actor, the critic and the
//! pseudopattern machinery.
//!
//! Hidden layers use `tanh`, the output layer is linear. Weights of layer `l`
//! are stored row-major with shape `fan_in × fan_out`, so `w[i * fan_out + j]`
//! connects input unit `i` to output unit `j`.
//!
//! Training minimizes the weighted half squared error
//! `0.5 * weight * ||output - target||²` with plain gradient descent.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// One dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    fan_in: usize,
    fan_out: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            biases: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn fan_out(&self) -> usize {
        self.fan_out
    }

    /// Row-major `fan_in × fan_out` weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>, hidden: bool) {
        out.clear();
        out.extend_from_slice(&self.biases);
        for (i, &a) in input.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (o, w) in out.iter_mut().zip(row) {
                *o += a * w;
            }
        }
        if hidden {
            for o in out.iter_mut() {
                *o = libm::tanh(*o);
            }
        }
    }
}

/// Post-activation output of every layer from one forward pass, input included.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationRecord {
    pub layers: Vec<Vec<f64>>,
}

impl ActivationRecord {
    /// Output of the final layer.
    pub fn output(&self) -> &[f64] {
        self.layers.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn input(&self) -> &[f64] {
        self.layers.first().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A supervised example with a non-negative loss weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    pub weight: f64,
}

impl TrainExample {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        TrainExample {
            input,
            target,
            weight: 1.0,
        }
    }

    pub fn weighted(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Parameter-shaped gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            biases: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.biases.len()])
                .collect(),
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases).flatten()
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(&mut self.biases).flatten()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|g| g.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values().all(|&g| g == 0.0)
    }

    /// `self += scale * other`. Shapes must already agree.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.values_mut() {
            *g *= factor;
        }
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.scale(-1.0);
        out
    }
}

/// Feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    layers: Vec<Layer>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::config(
            "layer_sizes",
            "need at least an input and an output layer",
        ));
    }
    if sizes.contains(&0) {
        return Err(Error::config(
            "layer_sizes",
            "every layer needs at least one unit",
        ));
    }
    Ok(())
}

/// Network with weights uniform on `±1/sqrt(fan_in)` and zero biases.
pub fn init_network(sizes: &[usize], seed: u64) -> Result<Network> {
    Network::random(sizes, &mut rng::from_seed(seed))
}

impl Network {
    /// All-zero network.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Network {
            sizes: sizes.to_vec(),
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        })
    }

    /// Random initialization drawn from `rng`.
    pub fn random(sizes: &[usize], rng: &mut Stream) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for layer in &mut net.layers {
            let bound = 1.0 / libm::sqrt(layer.fan_in as f64);
            for w in &mut layer.weights {
                *w = rng::uniform(rng, -bound, bound);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut Layer {
        &mut self.layers[index]
    }

    /// Total number of weights and biases.
    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_len() {
            return Err(Error::Shape {
                context: "network input",
                expected: self.input_len(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    /// Forward pass, returning the output and every layer's activations.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ActivationRecord)> {
        self.check_input(input)?;
        let mut layers = Vec::with_capacity(self.sizes.len());
        layers.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.fan_out);
            layer.apply(&layers[l], &mut out, l != last);
            layers.push(out);
        }
        let output = layers[layers.len() - 1].clone();
        Ok((output, ActivationRecord { layers }))
    }

    /// Forward pass without keeping the intermediate activations.
    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next, l != last);
            core::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Exact gradient of `0.5 * weight * ||output - target||²`.
    pub fn backprop_grads(&self, example: &TrainExample) -> Result<Gradients> {
        if example.target.len() != self.output_len() {
            return Err(Error::Shape {
                context: "training target",
                expected: self.output_len(),
                actual: example.target.len(),
            });
        }
        let (output, record) = self.forward(&example.input)?;
        let mut grads = Gradients::zeros_like(self);

        let mut delta: Vec<f64> = output
            .iter()
            .zip(&example.target)
            .map(|(o, t)| example.weight * (o - t))
            .collect();

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let below = &record.layers[l];
            let gw = &mut grads.weights[l];
            for (i, &a) in below.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (g, d) in gw[i * layer.fan_out..(i + 1) * layer.fan_out]
                    .iter_mut()
                    .zip(&delta)
                {
                    *g = a * d;
                }
            }
            grads.biases[l].copy_from_slice(&delta);

            if l > 0 {
                // `below` is a tanh layer: d tanh(z)/dz = 1 - tanh(z)^2.
                delta = below
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        let back: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                        back * (1.0 - a * a)
                    })
                    .collect();
            }
        }
        Ok(grads)
    }

    fn check_grads(&self, grads: &Gradients) -> Result<()> {
        let shapes_match = grads.weights.len() == self.layers.len()
            && grads.biases.len() == self.layers.len()
            && self.layers.iter().enumerate().all(|(l, layer)| {
                grads.weights[l].len() == layer.weights.len()
                    && grads.biases[l].len() == layer.biases.len()
            });
        if !shapes_match {
            return Err(Error::Shape {
                context: "gradient structure",
                expected: self.num_params(),
                actual: grads
                    .weights
                    .iter()
                    .chain(&grads.biases)
                    .map(Vec::len)
                    .sum(),
            });
        }
        Ok(())
    }

    /// `params -= learning_rate * grads`.
    pub fn sgd_update(&mut self, grads: &Gradients, learning_rate: f64) -> Result<()> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::Argument("learning rate must be finite and > 0"));
        }
        self.check_grads(grads)?;
        if !grads.is_finite() {
            return Err(Error::Numeric("non-finite gradient"));
        }
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[l]) {
                *w -= learning_rate * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(&grads.biases[l]) {
                *b -= learning_rate * g;
            }
        }
        if !self.is_finite() {
            return Err(Error::Numeric("parameters diverged to a non-finite value"));
        }
        Ok(())
    }

    /// One gradient step on a single example, scaled by its weight.
    pub fn train_example(&mut self, example: &TrainExample, learning_rate: f64) -> Result<()> {
        if example.weight == 0.0 {
            return Ok(());
        }
        let grads = self.backprop_grads(example)?;
        self.sgd_update(&grads, learning_rate)
    }

    /// One gradient step on the weight-normalized mean gradient of `batch`.
    pub fn train_batch(&mut self, batch: &[TrainExample], learning_rate: f64) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Argument("empty training batch"));
        }
        let mut total_weight = 0.0;
        for ex in batch {
            if !(ex.weight.is_finite() && ex.weight >= 0.0) {
                return Err(Error::Argument("example weight must be finite and >= 0"));
            }
            total_weight += ex.weight;
        }
        let mut acc = Gradients::zeros_like(self);
        for ex in batch {
            let g = self.backprop_grads(ex)?;
            if ex.weight > 0.0 {
                acc.add_scaled(&g, 1.0);
            }
        }
        if total_weight == 0.0 {
            return Ok(());
        }
        acc.scale(1.0 / total_weight);
        self.sgd_update(&acc, learning_rate)
    }

    /// Plain-text snapshot.
    ///
    /// ```text
    /// dpole-net 1
    /// layers 18 16 2
    /// <one parameter per line>
    /// ```
    ///
    /// Parameters follow layer by layer: the `fan_in × fan_out` weights in
    /// row-major order, then the `fan_out` biases. Values use the shortest
    /// decimal form that parses back to the same `f64`.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::from("dpole-net 1\nlayers");
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        for layer in &self.layers {
            for v in layer.weights.iter().chain(&layer.biases) {
                let _ = writeln!(out, "{v:?}");
            }
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Snapshot(msg.to_string());
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("dpole-net 1") {
            return Err(bad("missing `dpole-net 1` header"));
        }
        let sizes_line = lines.next().ok_or_else(|| bad("missing layers line"))?;
        let mut words = sizes_line.split_whitespace();
        if words.next() != Some("layers") {
            return Err(bad("expected `layers` line"));
        }
        let sizes = words
            .map(|w| w.parse::<usize>())
            .collect::<core::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("layer size is not an integer"))?;
        let mut net = Network::zeros(&sizes).map_err(|e| Error::Snapshot(e.to_string()))?;
        let mut values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>());
        for layer in &mut net.layers {
            for slot in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *slot = values
                    .next()
                    .ok_or_else(|| bad("too few parameters"))?
                    .map_err(|_| bad("parameter is not a number"))?;
            }
        }
        if values.next().is_some() {
            return Err(bad("too many parameters"));
        }
        Ok(net)
    }
}
