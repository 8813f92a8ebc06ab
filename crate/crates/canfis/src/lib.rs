//! A from-scratch CANFIS (neuro-fuzzy) engine that learns the binary
//! half-adder from its truth table.
//!
//! The network pairs a grid of generalized bell membership functions,
//! shared by both outputs, with first-order TSK consequents per rule per
//! output and a sigmoid output stage. Training is full-batch
//! backpropagation with heavy-ball momentum, monitored on a held-out
//! cross-validation set whose minimum-error weights are snapshotted.
//!
//! The crate also carries the half-adder datasets, the regression metrics
//! used by the performance reports, and the plain modular-MLP baseline the
//! fuzzy approach is compared against.

pub mod baseline;
pub mod dataset;
pub mod error;
pub mod fuzzy;
pub mod metrics;
pub mod network;
pub mod train;

pub use error::{CanfisError, Result};
pub use network::{CanfisNetwork, NetworkConfig};
pub use train::{TrainingConfig, TrainingReport};
