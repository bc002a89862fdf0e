//! Small dense feed-forward networks trained with mini-batch Adam on MSE.
//!
//! Inputs and targets are standardized with per-column mean/scale computed from
//! the training set; the scales travel with the model so inference takes and
//! returns physical units.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn slope(&self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

/// Dense layer, weights row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn forward(&self, x: &[f64], act: Activation, out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let z = row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi);
            out.push(act.apply(z));
        }
    }
}

/// Per-column affine standardization: `(x - mean) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    /// Mean and standard deviation of each column of a row-major matrix.
    pub fn fit(rows: &[f64], dim: usize) -> Self {
        let n = (rows.len() / dim).max(1) as f64;
        let mut mean = vec![0.0; dim];
        for row in rows.chunks_exact(dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in rows.chunks_exact(dim) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var.iter().map(|s| libm::sqrt(s / n)).map(|s| if s > 1e-12 { s } else { 1.0 }).collect();
        Self { mean, scale }
    }

    #[inline]
    pub fn apply(&self, i: usize, x: f64) -> f64 {
        (x - self.mean[i]) / self.scale[i]
    }

    #[inline]
    pub fn invert(&self, i: usize, z: f64) -> f64 {
        z * self.scale[i] + self.mean[i]
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: Activation,
    pub input_norm: Normalizer,
    pub output_norm: Normalizer,
}

impl MlpModel {
    /// All-zero weights with identity normalization.
    pub fn zeros(sizes: &[usize]) -> Self {
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self::from_layers(layers, sizes)
    }

    /// Xavier-uniform weights, zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let mut layer = Layer::zeros(w[0], w[1]);
                let bound = libm::sqrt(6.0 / (w[0] + w[1]) as f64);
                layer.weights.iter_mut().for_each(|x| *x = rng.gen_range(-bound..bound));
                layer
            })
            .collect();
        Self::from_layers(layers, sizes)
    }

    fn from_layers(layers: Vec<Layer>, sizes: &[usize]) -> Self {
        Self {
            layers,
            hidden: Activation::Tanh,
            output: Activation::Identity,
            input_norm: Normalizer::identity(sizes[0]),
            output_norm: Normalizer::identity(*sizes.last().unwrap_or(&0)),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().map(|l| l.inputs).collect();
        if let Some(last) = self.layers.last() {
            s.push(last.outputs);
        }
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    /// Shapes agree layer to layer and with the normalizers; scales positive.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("model has no layers"));
        }
        for l in &self.layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Shape("weight or bias length disagrees with layer size"));
            }
        }
        if self.layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
            return Err(Error::Shape("consecutive layer sizes disagree"));
        }
        let norm_ok = |n: &Normalizer, dim: usize| n.mean.len() == dim && n.scale.len() == dim && n.scale.iter().all(|s| *s > 0.0);
        if !norm_ok(&self.input_norm, self.input_dim()) || !norm_ok(&self.output_norm, self.output_dim()) {
            return Err(Error::Shape("normalizer length or scale invalid"));
        }
        Ok(())
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    /// Network output on already-normalized input.
    pub fn forward_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::with_capacity(64);
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, self.activation(i), &mut next);
            core::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Physical-unit inference.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim());
        let xn: Vec<f64> = x.iter().enumerate().map(|(i, v)| self.input_norm.apply(i, *v)).collect();
        let mut y = self.forward_normalized(&xn);
        for (i, v) in y.iter_mut().enumerate() {
            *v = self.output_norm.invert(i, *v);
        }
        y
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Flat view: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = *it.next().unwrap_or(p));
        }
    }
}

/// Row-major feature/target matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub inputs: usize,
    pub outputs: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, x: Vec::new(), y: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) {
        debug_assert!(x.len() == self.inputs && y.len() == self.outputs);
        self.x.extend_from_slice(x);
        self.y.extend_from_slice(y);
    }

    pub fn len(&self) -> usize {
        if self.inputs == 0 {
            0
        } else {
            self.x.len() / self.inputs
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> (&[f64], &[f64]) {
        (&self.x[i * self.inputs..(i + 1) * self.inputs], &self.y[i * self.outputs..(i + 1) * self.outputs])
    }

    /// Append all rows of `other`, which must have the same shape.
    pub fn append(&mut self, other: &Self) -> Result<()> {
        if other.inputs != self.inputs || other.outputs != self.outputs {
            return Err(Error::Shape("appended dataset has different columns"));
        }
        self.x.extend_from_slice(&other.x);
        self.y.extend_from_slice(&other.y);
        Ok(())
    }

    /// Keep only the listed target columns.
    pub fn select_targets(&self, cols: &[usize]) -> Self {
        let mut out = Self::new(self.inputs, cols.len());
        out.x = self.x.clone();
        out.y = (0..self.len()).flat_map(|i| cols.iter().map(move |c| (i, *c))).map(|(i, c)| self.y[i * self.outputs + c]).collect();
        out
    }

    /// Split off the last `fraction` of rows.
    pub fn split_tail(&self, fraction: f64) -> (Self, Self) {
        let n = self.len();
        let cut = n - ((n as f64 * fraction) as usize).min(n);
        let head = Self { inputs: self.inputs, outputs: self.outputs, x: self.x[..cut * self.inputs].to_vec(), y: self.y[..cut * self.outputs].to_vec() };
        let tail = Self { inputs: self.inputs, outputs: self.outputs, x: self.x[cut * self.inputs..].to_vec(), y: self.y[cut * self.outputs..].to_vec() };
        (head, tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Refit the normalizers from the data before training.
    pub fit_normalizers: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, lr: 1e-3, batch: 64, seed: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8, fit_normalizers: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean normalized-space MSE over each epoch's batches.
    pub epoch_loss: Vec<f64>,
}

/// Per-sample scratch for forward/backward passes.
struct Tape {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Tape {
    fn new(model: &MlpModel) -> Self {
        let mut acts = vec![Vec::new(); model.layers.len() + 1];
        acts[0] = vec![0.0; model.input_dim()];
        Self { acts, delta: Vec::new(), delta_prev: Vec::new() }
    }
}

/// Accumulate gradients of `scale * sum (yhat - y)^2` for one normalized sample into `grad`.
fn backprop_sample(model: &MlpModel, x: &[f64], y: &[f64], scale: f64, tape: &mut Tape, grad: &mut [f64], offsets: &[usize]) -> f64 {
    tape.acts[0].copy_from_slice(x);
    for (i, layer) in model.layers.iter().enumerate() {
        let (done, rest) = tape.acts.split_at_mut(i + 1);
        layer.forward(&done[i], model.activation(i), &mut rest[0]);
    }
    let out = &tape.acts[model.layers.len()];
    let mut loss = 0.0;
    tape.delta.clear();
    for (o, t) in out.iter().zip(y) {
        let e = o - t;
        loss += e * e;
        tape.delta.push(2.0 * scale * e * model.output.slope(*o));
    }
    for li in (0..model.layers.len()).rev() {
        let layer = &model.layers[li];
        let input = &tape.acts[li];
        let base = offsets[li];
        let (gw, gb) = grad[base..base + layer.weights.len() + layer.bias.len()].split_at_mut(layer.weights.len());
        for (o, d) in tape.delta.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
            for (g, a) in row.iter_mut().zip(input) {
                *g += d * a;
            }
            gb[o] += d;
        }
        if li > 0 {
            tape.delta_prev.clear();
            tape.delta_prev.resize(layer.inputs, 0.0);
            for (o, d) in tape.delta.iter().enumerate() {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (acc, w) in tape.delta_prev.iter_mut().zip(row) {
                    *acc += d * w;
                }
            }
            let act = model.activation(li - 1);
            for (acc, a) in tape.delta_prev.iter_mut().zip(input) {
                *acc *= act.slope(*a);
            }
            core::mem::swap(&mut tape.delta, &mut tape.delta_prev);
        }
    }
    loss * scale
}

fn param_offsets(model: &MlpModel) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(model.layers.len());
    let mut acc = 0;
    for l in &model.layers {
        offsets.push(acc);
        acc += l.weights.len() + l.bias.len();
    }
    offsets
}

/// Normalized-space MSE over the given rows and its gradient with respect to
/// the flat parameter vector (layout of [`MlpModel::params`]).
///
/// `x` and `y` are already normalized, row-major.
pub fn mse_and_gradient(model: &MlpModel, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let (din, dout) = (model.input_dim(), model.output_dim());
    let n = x.len() / din;
    let mut grad = vec![0.0; model.param_count()];
    let offsets = param_offsets(model);
    let mut tape = Tape::new(model);
    let scale = 1.0 / (n * dout) as f64;
    let mut loss = 0.0;
    for i in 0..n {
        loss += backprop_sample(model, &x[i * din..(i + 1) * din], &y[i * dout..(i + 1) * dout], scale, &mut tape, &mut grad, &offsets);
    }
    (loss, grad)
}

/// Normalized-space MSE only.
pub fn mse_normalized(model: &MlpModel, x: &[f64], y: &[f64]) -> f64 {
    let (din, dout) = (model.input_dim(), model.output_dim());
    let n = x.len() / din;
    let mut total = 0.0;
    for i in 0..n {
        let out = model.forward_normalized(&x[i * din..(i + 1) * din]);
        total += out.iter().zip(&y[i * dout..(i + 1) * dout]).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
    }
    total / (n * dout) as f64
}

/// Per-output MSE in physical units.
pub fn evaluate_mse(model: &MlpModel, data: &Dataset) -> Vec<f64> {
    let mut sums = vec![0.0; data.outputs];
    for i in 0..data.len() {
        let (x, y) = data.row(i);
        let out = model.forward(x);
        for ((s, o), t) in sums.iter_mut().zip(&out).zip(y) {
            *s += (o - t) * (o - t);
        }
    }
    let n = data.len().max(1) as f64;
    sums.into_iter().map(|s| s / n).collect()
}

fn normalize_rows(data: &Dataset, model: &MlpModel) -> (Vec<f64>, Vec<f64>) {
    let x = data.x.chunks_exact(data.inputs).flat_map(|r| r.iter().enumerate().map(|(i, v)| model.input_norm.apply(i, *v))).collect();
    let y = data.y.chunks_exact(data.outputs).flat_map(|r| r.iter().enumerate().map(|(i, v)| model.output_norm.apply(i, *v))).collect();
    (x, y)
}

/// Mini-batch Adam on normalized MSE. Deterministic for a given seed.
pub fn train_mlp(data: &Dataset, init: MlpModel, cfg: &TrainConfig) -> Result<(MlpModel, TrainReport)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    init.validate()?;
    if data.inputs != init.input_dim() || data.outputs != init.output_dim() {
        return Err(Error::Shape("dataset columns disagree with model"));
    }
    if cfg.epochs == 0 {
        return Ok((init, TrainReport::default()));
    }
    if cfg.batch == 0 || !(cfg.lr > 0.0) {
        return Err(Error::InvalidArgument("batch must be positive and lr > 0"));
    }
    let mut model = init;
    if cfg.fit_normalizers {
        model.input_norm = Normalizer::fit(&data.x, data.inputs);
        model.output_norm = Normalizer::fit(&data.y, data.outputs);
    }
    let (xs, ys) = normalize_rows(data, &model);
    let (din, dout) = (data.inputs, data.outputs);
    let n = data.len();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut params = model.params();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut grad = vec![0.0; params.len()];
    let offsets = param_offsets(&model);
    let mut tape = Tape::new(&model);
    let mut step = 0i32;
    let mut report = TrainReport::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (bi, chunk) in order.chunks(cfg.batch).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / (chunk.len() * dout) as f64;
            let mut loss = 0.0;
            for &i in chunk {
                loss += backprop_sample(&model, &xs[i * din..(i + 1) * din], &ys[i * dout..(i + 1) * dout], scale, &mut tape, &mut grad, &offsets);
            }
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: bi, loss });
            }
            step += 1;
            let bc1 = 1.0 - libm::pow(cfg.beta1, step as f64);
            let bc2 = 1.0 - libm::pow(cfg.beta2, step as f64);
            for (((p, g), m), v) in params.iter_mut().zip(&grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *p -= cfg.lr * (*m / bc1) / (libm::sqrt(*v / bc2) + cfg.eps);
            }
            model.set_params(&params);
            epoch_loss += loss;
            batches += 1;
        }
        report.epoch_loss.push(epoch_loss / batches.max(1) as f64);
    }
    Ok((model, report))
}
