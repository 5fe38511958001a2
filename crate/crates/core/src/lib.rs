//! Learning contact-rich hand-interaction policies from motion-capture derived
//! multi-objective rewards with DDPG.
//!
//! * [`mocap`]: demonstration sequences, file format, synthetic generator and
//!   reward-parameter extraction.
//! * [`reward`]: the composite final-state + imitation reward.
//! * [`sim`]: deterministic arm + hand simulator with contact sensors.
//! * [`nn`]: MLPs with manual backprop, Adam, input normalization.
//! * [`ddpg`]: replay buffer, target networks, actor/critic updates.
//! * [`train`]: episode randomization, rollouts, success rule, training loop.
//! * [`harness`]: ablations, robustness sweeps, reports and CLI commands.

pub mod config;
pub mod ddpg;
pub mod error;
pub mod geom;
pub mod harness;
pub mod mocap;
pub mod nn;
pub mod par;
pub mod reward;
pub mod rng;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
