//! Position-based machine-learning propagation loss modelling.

pub mod channel;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod fading;
pub mod linksim;
pub mod metrics;
pub mod regress;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
