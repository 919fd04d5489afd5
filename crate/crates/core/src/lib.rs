//! Heavy-tailed proxies of SGD and the fractal geometry of their trajectories.
//!
//! The crate simulates α-stable Lévy motions and stable-driven SDEs, runs
//! minibatch SGD, estimates box-counting dimensions and tail indices of the
//! resulting trajectories, measures trajectory-wise generalization gaps, and
//! evaluates dimension-dependent generalization bounds. The [`cli`] module
//! drives the end-to-end experiments.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fractal_dim;
pub mod learning;
pub mod process_sim;
pub mod rng;
pub mod stable_dist;
pub mod stats;
pub mod tail_index;

pub use error::{Error, Result};
