//! Spiking marching scheme: a spiking-neural-network based explicit time
//! integrator for ODEs and PDEs.
//!
//! The pipeline: generate a reference trajectory (`reference_solvers`),
//! encode it into binary spike trains (`spike_codec`), train a small SNN to
//! map a window of past steps to the shifted window containing the next step
//! (`snn_core`), then run the trained network as an explicit marching scheme
//! and measure one-step and cascade errors (`marching`). The `cli` module
//! wires these into reproducible experiment commands.

pub mod cli;
pub mod error;
pub mod marching;
pub mod reference_solvers;
pub mod snn_core;
pub mod spike_codec;

pub use error::SmsError;
