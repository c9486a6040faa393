//! The trainable model: a fixed (untrained) leaky integrate-and-fire layer
//! over the spike train, flatten, then two dense layers trained with a
//! sigmoid cross entropy loss and Adam. Gradients are exact analytic
//! expressions; the LIF stage precedes all trainable parameters so no
//! surrogate gradient is needed anywhere.

mod checkpoint;
mod lif;
mod network;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use lif::{lif_forward, LifConfig, ResetKind};
pub use network::{
    binarize, flat_index, sce_loss, AdamConfig, AdamState, DenseLayer, ForwardCache, Network,
    NetworkShape, ParamGrads,
};
pub use train::{train, TrainConfig};
