use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SmsError};
use crate::spike_codec::SpikeTrain;

use super::network::{AdamConfig, AdamState, Network, ParamGrads};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// 0 means full batch.
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl TrainConfig {
    pub fn new(epochs: usize, learning_rate: f64, seed: u64) -> Self {
        TrainConfig {
            epochs,
            learning_rate,
            batch_size: 0,
            seed,
            adam: AdamConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(SmsError::InvalidConfig(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Supervised training over (input, target) spike-train pairs. Gradients
/// within a batch are summed in sample order, so runs with the same seed
/// and data are bit-identical. Returns the mean loss per epoch.
pub fn train(
    net: &mut Network,
    inputs: &[SpikeTrain],
    targets: &[SpikeTrain],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(SmsError::InvalidConfig(format!(
            "dataset sizes: {} inputs, {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    cfg.validate()?;
    let n = inputs.len();
    let adam = AdamConfig { lr: cfg.learning_rate, ..cfg.adam };
    let mut state = AdamState::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let batch = if cfg.batch_size == 0 { n } else { cfg.batch_size.min(n) };
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        if cfg.batch_size != 0 {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (b, chunk) in order.chunks(batch).enumerate() {
            let mut grads = ParamGrads::zeros_like(net);
            let mut batch_loss = 0.0;
            for &idx in chunk {
                let (loss, g) = net.backward(&inputs[idx], &targets[idx])?;
                batch_loss += loss;
                grads.add_assign(&g);
            }
            if !batch_loss.is_finite() {
                return Err(SmsError::NonFinite(format!(
                    "loss at epoch {epoch}, batch {b}"
                )));
            }
            grads.scale(1.0 / chunk.len() as f64);
            state.step(net, &grads, &adam);
            epoch_loss += batch_loss;
        }
        history.push(epoch_loss / n as f64);
    }
    Ok(history)
}
