//! Sequential identity linkage across two networks with a deterministic
//! actor-critic agent.
//!
//! The crate is `no_std` (with `alloc`) so the numerical pipeline can be
//! embedded anywhere; file formats, configuration and the command line live
//! in the `idlink` companion crate. The `std` feature (on by default) only
//! enables runtime CPU feature detection in the matrix kernels.
//!
//! Pipeline, bottom up:
//!
//! - [`graph`]: identity networks, anchor sets, synthetic benchmark pairs.
//! - [`embedding`]: biased random walks, skip-gram pre-training and the
//!   degree-weighted network embedding.
//! - [`nn`]: dense, LSTM and attention blocks with hand-written backward
//!   passes, SGD and a finite-difference checker.
//! - [`actor`] / [`critic`]: the policy (encoder, decoder, cosine projection)
//!   and the Q-network.
//! - [`env`]: the linkage decision process and its time-discounted reward.
//! - [`ddpg`]: replay buffer, target networks and the training loop.
//! - [`eval`]: P@k, MAP, recall and reference baselines.
#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod actor;
pub mod critic;
pub mod ddpg;
pub mod embedding;
pub mod env;
pub mod error;
pub mod eval;
pub mod graph;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};

/// Identity embedding dimension used throughout unless configured otherwise.
pub const DEFAULT_EMBEDDING_DIM: usize = 128;
/// Hidden size of the history LSTM.
pub const DEFAULT_LSTM_HIDDEN: usize = 256;
/// Width of the encoded feedback vector.
pub const DEFAULT_FEEDBACK_DIM: usize = 128;
/// Degree-weighting constant of the network embedding.
pub const DEFAULT_ZETA: f64 = 1e-3;
