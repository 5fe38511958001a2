//! Fully connected networks with hand-written backpropagation.
//!
//! Batches are row-major `(batch, features)` matrices. Hidden layers use ReLU,
//! the output layer is linear (critic) or tanh (actor).

mod adam;
mod mlp;
mod normalize;

pub use adam::AdamState;
pub use mlp::{soft_update, Dense, ForwardCache, Gradients, Mlp, OutputActivation};
pub use normalize::RunningNorm;
