//! Fully connected network: ReLU hidden layers, one sigmoid output, binary
//! cross-entropy, plain mini-batch gradient descent.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::{sigmoid, TrainingSet};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeepNetConfig {
    pub hidden_layers: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for DeepNetConfig {
    fn default() -> Self {
        DeepNetConfig {
            hidden_layers: vec![64, 32],
            lr: 0.05,
            epochs: 40,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs × inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn he(inputs: usize, outputs: usize, rng: &mut seed::Rng) -> Self {
        let normal = Normal::new(0.0, (2.0 / inputs as f64).sqrt()).expect("positive std");
        Dense {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| normal.sample(rng)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.bias).map(|(row, b)| {
            b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        }));
    }
}

/// Parameter-shaped gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Dense>,
}

/// Numerically stable binary cross-entropy of a logit.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Network {
    pub fn new(inputs: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut widths = vec![inputs];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths.windows(2).map(|w| Dense::he(w[0], w[1], &mut rng)).collect();
        Network { layers }
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs
    }

    /// Output-layer pre-activation.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let mut z = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.forward(&a, &mut z);
            if l < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut a, &mut z);
        }
        a[0]
    }

    /// Mean cross-entropy over the batch.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        xs.iter().zip(ys).map(|(x, &y)| bce_with_logit(self.logit(x), y)).sum::<f64>() / xs.len() as f64
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    /// Mean loss over the batch and its gradient by backpropagation.
    pub fn loss_and_gradients(&self, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Gradients) {
        let mut grads = self.zero_gradients();
        let loss = self.accumulate(xs.iter().map(Vec::as_slice), ys, &mut grads);
        (loss, grads)
    }

    fn accumulate<'a>(&self, xs: impl Iterator<Item = &'a [f64]>, ys: &[f64], grads: &mut Gradients) -> f64 {
        let n = ys.len() as f64;
        let last = self.layers.len() - 1;
        let mut total = 0.0;
        // activations[l] is the input to layer l.
        let mut activations: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len() + 1];
        let mut pre = Vec::new();
        for (x, &y) in xs.zip(ys) {
            activations[0].clear();
            activations[0].extend_from_slice(x);
            for (l, layer) in self.layers.iter().enumerate() {
                layer.forward(&activations[l], &mut pre);
                if l < last {
                    pre.iter_mut().for_each(|v| *v = v.max(0.0));
                }
                activations[l + 1].clone_from(&pre);
            }
            let z = activations[last + 1][0];
            total += bce_with_logit(z, y);

            let mut delta = vec![(sigmoid(z) - y) / n];
            for l in (0..=last).rev() {
                let layer = &self.layers[l];
                let input = &activations[l];
                let (gw, gb) = &mut grads.layers[l];
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, &a) in row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                let mut back = vec![0.0; layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (b, &w) in back.iter_mut().zip(row) {
                        *b += d * w;
                    }
                }
                // ReLU derivative from the stored post-activation.
                for (b, &a) in back.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        total / n
    }

    pub fn step(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            layer.weights.iter_mut().zip(gw).for_each(|(w, g)| *w -= lr * g);
            layer.bias.iter_mut().zip(gb).for_each(|(b, g)| *b -= lr * g);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Mutable access to parameter `k` in layer order (weights, then bias).
    pub fn parameter_mut(&mut self, mut k: usize) -> &mut f64 {
        for layer in &mut self.layers {
            if k < layer.weights.len() {
                return &mut layer.weights[k];
            }
            k -= layer.weights.len();
            if k < layer.bias.len() {
                return &mut layer.bias[k];
            }
            k -= layer.bias.len();
        }
        panic!("parameter index out of range");
    }
}

impl Gradients {
    /// Gradient entries flattened in the same order as
    /// [`Network::parameter_mut`].
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepNetModel {
    pub config: DeepNetConfig,
    scaler: Standardizer,
    network: Network,
    /// Full-training-set loss before training and after each epoch.
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
}

impl DeepNetModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.network.logit(&self.scaler.transform(x)))
    }

    pub fn network(&self) -> &Network {
        &self.network
    }
}

pub fn train_deepnet(data: &TrainingSet, cfg: &DeepNetConfig, seed: u64) -> Result<DeepNetModel> {
    data.check_trainable()?;
    if cfg.batch_size == 0 || !(cfg.lr > 0.0) || cfg.hidden_layers.contains(&0) {
        return Err(Error::Config("deepnet needs lr > 0, batch_size >= 1 and non-zero widths".into()));
    }
    let scaler = Standardizer::fit(data.rows());
    let xs = scaler.transform_all(data.rows());
    let ys: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();
    let mut network = Network::new(data.d(), &cfg.hidden_layers, seed::derive(seed, "init", 0));
    let mut rng = seed::rng(seed::derive(seed, "batches", 0));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut history = vec![network.loss(&xs, &ys)];
    let mut grads = network.zero_gradients();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grads.layers.iter_mut().for_each(|(w, b)| {
                w.fill(0.0);
                b.fill(0.0);
            });
            let batch_y: Vec<f64> = batch.iter().map(|&i| ys[i]).collect();
            network.accumulate(batch.iter().map(|&i| xs[i].as_slice()), &batch_y, &mut grads);
            network.step(&grads, cfg.lr);
        }
        let loss = network.loss(&xs, &ys);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(epoch));
        }
        history.push(loss);
    }
    let final_loss = *history.last().expect("initial loss recorded");
    Ok(DeepNetModel {
        config: cfg.clone(),
        scaler,
        network,
        loss_history: history,
        final_loss,
    })
}
