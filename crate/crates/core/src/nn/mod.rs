//! Minimal trainable network stack: masking, LSTM, dense and dropout layers,
//! binary cross-entropy, Adam and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod network;
pub mod spec;
pub mod train;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, CheckpointError};
pub use network::{Linearization, Network, Seed, Sequence, Trace};
pub use spec::{Activation, LayerSpec, NetworkSpec, NnError, Shape};
pub use train::{train, TrainConfig, TrainSample, Trainer};
