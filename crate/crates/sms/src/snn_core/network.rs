use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SmsError};
use crate::spike_codec::SpikeTrain;

use super::lif::{lif_forward, LifConfig};

/// Fully connected layer, weights stored row-major as out_dim x in_dim.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Seeded uniform init on [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-scale..scale))
            .collect();
        DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.weights[i * self.in_dim..(i + 1) * self.in_dim];
            let mut acc = self.bias[i];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            *o = acc;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkShape {
    /// Spike train length (#T).
    pub steps: usize,
    pub n_in: usize,
    pub n_out: usize,
}

impl NetworkShape {
    pub fn flat_in(&self) -> usize {
        self.steps * self.n_in
    }

    pub fn flat_out(&self) -> usize {
        self.steps * self.n_out
    }
}

/// Flatten position of (spike step k, channel j): channel-major with the
/// spike step as the inner index. The same order is used for network
/// inputs, targets, and `binarize`.
#[inline]
pub fn flat_index(steps: usize, step: usize, channel: usize) -> usize {
    channel * steps + step
}

fn flatten(train: &SpikeTrain) -> Vec<f64> {
    let mut out = vec![0.0; train.steps * train.channels];
    for j in 0..train.channels {
        for k in 0..train.steps {
            out[flat_index(train.steps, k, j)] = train.get(k, j) as f64;
        }
    }
    out
}

/// LIF front-end plus two trainable dense layers. The first dense layer is
/// followed by ReLU; the loss consumes the second layer's pre-activation.
/// With `final_relu` set, a ReLU is applied after the second layer as well
/// and the loss consumes the rectified output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub lif: LifConfig,
    pub dense1: DenseLayer,
    pub dense2: DenseLayer,
    pub shape: NetworkShape,
    pub final_relu: bool,
}

impl Network {
    pub fn init(shape: NetworkShape, n_hidden: usize, lif: LifConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Network {
            lif,
            dense1: DenseLayer::init(shape.flat_in(), n_hidden, &mut rng),
            dense2: DenseLayer::init(n_hidden, shape.flat_out(), &mut rng),
            shape,
            final_relu: false,
        }
    }

    pub fn n_hidden(&self) -> usize {
        self.dense1.out_dim
    }

    fn check_input(&self, input: &SpikeTrain) -> Result<()> {
        if input.steps != self.shape.steps || input.channels != self.shape.n_in {
            return Err(SmsError::ShapeMismatch(format!(
                "input {}x{} vs network {}x{}",
                input.steps, input.channels, self.shape.steps, self.shape.n_in
            )));
        }
        Ok(())
    }

    /// Forward pass keeping the intermediates needed for the backward pass.
    pub fn forward_cached(&self, input: &SpikeTrain) -> Result<ForwardCache> {
        self.check_input(input)?;
        let spikes = lif_forward(input, &self.lif);
        let x = flatten(&spikes);
        let mut h_pre = vec![0.0; self.dense1.out_dim];
        self.dense1.matvec(&x, &mut h_pre);
        let h: Vec<f64> = h_pre.iter().map(|&v| v.max(0.0)).collect();
        let mut z = vec![0.0; self.dense2.out_dim];
        self.dense2.matvec(&h, &mut z);
        let logits = if self.final_relu {
            z.iter().map(|&v| v.max(0.0)).collect()
        } else {
            z.clone()
        };
        Ok(ForwardCache { x, h_pre, h, z, logits })
    }

    /// Logits (length steps * n_out) for a spike-train input.
    pub fn forward(&self, input: &SpikeTrain) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.logits)
    }

    /// Loss and exact gradients of sce_loss(forward(input), target) with
    /// respect to the dense parameters.
    pub fn backward(&self, input: &SpikeTrain, target: &SpikeTrain) -> Result<(f64, ParamGrads)> {
        let cache = self.forward_cached(input)?;
        let y = flatten(target);
        if y.len() != cache.logits.len() {
            return Err(SmsError::ShapeMismatch(format!(
                "target length {} vs logits {}",
                y.len(),
                cache.logits.len()
            )));
        }
        let loss = sce_loss(&cache.logits, &y);
        let m = cache.logits.len() as f64;
        // dL/dz, with the optional final-ReLU gate (subgradient 0 at 0).
        let dz: Vec<f64> = cache
            .logits
            .iter()
            .zip(&y)
            .zip(&cache.z)
            .map(|((&a, &t), &zpre)| {
                let g = (sigmoid(a) - t) / m;
                if self.final_relu && zpre <= 0.0 {
                    0.0
                } else {
                    g
                }
            })
            .collect();

        let mut grads = ParamGrads::zeros_like(self);
        // dense2: dW2 = dz h^T, db2 = dz, dh = W2^T dz
        let mut dh = vec![0.0; self.dense2.in_dim];
        for (i, &g) in dz.iter().enumerate() {
            grads.d2b[i] = g;
            let wrow = &self.dense2.weights[i * self.dense2.in_dim..(i + 1) * self.dense2.in_dim];
            let grow = &mut grads.d2w[i * self.dense2.in_dim..(i + 1) * self.dense2.in_dim];
            for j in 0..self.dense2.in_dim {
                grow[j] = g * cache.h[j];
                dh[j] += wrow[j] * g;
            }
        }
        // ReLU gate on the hidden layer, then dense1 gradients.
        for (i, d) in dh.iter_mut().enumerate() {
            if cache.h_pre[i] <= 0.0 {
                *d = 0.0;
            }
        }
        for (i, &g) in dh.iter().enumerate() {
            grads.d1b[i] = g;
            if g == 0.0 {
                continue;
            }
            let grow = &mut grads.d1w[i * self.dense1.in_dim..(i + 1) * self.dense1.in_dim];
            for (gw, &xv) in grow.iter_mut().zip(&cache.x) {
                *gw = g * xv;
            }
        }
        Ok((loss, grads))
    }
}

pub struct ForwardCache {
    pub x: Vec<f64>,
    pub h_pre: Vec<f64>,
    pub h: Vec<f64>,
    /// Pre-activation of the second dense layer.
    pub z: Vec<f64>,
    /// What the loss consumes: equal to `z` unless final_relu is set.
    pub logits: Vec<f64>,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Mean sigmoid cross entropy in the numerically stable form
/// max(z,0) - z*y + ln(1 + exp(-|z|)).
pub fn sce_loss(logits: &[f64], target: &[f64]) -> f64 {
    assert_eq!(logits.len(), target.len());
    let sum: f64 = logits
        .iter()
        .zip(target)
        .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
        .sum();
    sum / logits.len() as f64
}

/// Threshold logits at zero (logit 0 maps to 1) and fold back into the
/// spike-train layout, inverting the flatten order.
pub fn binarize(logits: &[f64], steps: usize, channels: usize) -> SpikeTrain {
    assert_eq!(logits.len(), steps * channels);
    let mut out = SpikeTrain::zeros(steps, channels);
    for j in 0..channels {
        for k in 0..steps {
            if logits[flat_index(steps, k, j)] >= 0.0 {
                out.set(k, j, 1);
            }
        }
    }
    out
}

/// Gradients (or any per-parameter accumulator) mirroring the dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub d1w: Vec<f64>,
    pub d1b: Vec<f64>,
    pub d2w: Vec<f64>,
    pub d2b: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(net: &Network) -> Self {
        ParamGrads {
            d1w: vec![0.0; net.dense1.weights.len()],
            d1b: vec![0.0; net.dense1.bias.len()],
            d2w: vec![0.0; net.dense2.weights.len()],
            d2b: vec![0.0; net.dense2.bias.len()],
        }
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (a, b) in self.d1w.iter_mut().zip(&other.d1w) {
            *a += b;
        }
        for (a, b) in self.d1b.iter_mut().zip(&other.d1b) {
            *a += b;
        }
        for (a, b) in self.d2w.iter_mut().zip(&other.d2w) {
            *a += b;
        }
        for (a, b) in self.d2b.iter_mut().zip(&other.d2b) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self
            .d1w
            .iter_mut()
            .chain(&mut self.d1b)
            .chain(&mut self.d2w)
            .chain(&mut self.d2b)
        {
            *v *= s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub m: ParamGrads,
    pub v: ParamGrads,
}

impl AdamState {
    pub fn new(net: &Network) -> Self {
        AdamState {
            t: 0,
            m: ParamGrads::zeros_like(net),
            v: ParamGrads::zeros_like(net),
        }
    }

    /// One bias-corrected Adam update over all trainable parameters.
    pub fn step(&mut self, net: &mut Network, grads: &ParamGrads, cfg: &AdamConfig) {
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
            }
        };
        update(&mut net.dense1.weights, &grads.d1w, &mut self.m.d1w, &mut self.v.d1w);
        update(&mut net.dense1.bias, &grads.d1b, &mut self.m.d1b, &mut self.v.d1b);
        update(&mut net.dense2.weights, &grads.d2w, &mut self.m.d2w, &mut self.v.d2w);
        update(&mut net.dense2.bias, &grads.d2b, &mut self.m.d2b, &mut self.v.d2b);
    }
}
