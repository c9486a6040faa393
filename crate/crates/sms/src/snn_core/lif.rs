use serde::{Deserialize, Serialize};

use crate::spike_codec::SpikeTrain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResetKind {
    Subtract,
    Zero,
}

/// Leaky integrate-and-fire neuron constants, shared by all channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifConfig {
    /// Membrane leak per spike step, in [0,1].
    pub decay: f64,
    /// Firing threshold, > 0.
    pub threshold: f64,
    pub reset: ResetKind,
}

impl Default for LifConfig {
    fn default() -> Self {
        LifConfig {
            decay: 0.9,
            threshold: 1.0,
            reset: ResetKind::Subtract,
        }
    }
}

impl LifConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(format!("lif decay must be in [0,1], got {}", self.decay));
        }
        if !(self.threshold > 0.0) {
            return Err(format!("lif threshold must be > 0, got {}", self.threshold));
        }
        Ok(())
    }
}

/// Run the LIF dynamics channel by channel over the spike-time axis.
/// Membrane starts at zero; a spike fires when the membrane reaches the
/// threshold and the membrane is then reset.
pub fn lif_forward(input: &SpikeTrain, cfg: &LifConfig) -> SpikeTrain {
    let mut out = SpikeTrain::zeros(input.steps, input.channels);
    for j in 0..input.channels {
        let mut u = 0.0f64;
        for k in 0..input.steps {
            u = cfg.decay * u + input.get(k, j) as f64;
            if u >= cfg.threshold {
                out.set(k, j, 1);
                match cfg.reset {
                    ResetKind::Subtract => u -= cfg.threshold,
                    ResetKind::Zero => u = 0.0,
                }
            }
        }
    }
    out
}
