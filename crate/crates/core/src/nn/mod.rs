//! Differentiable building blocks with hand-written backward passes.
//!
//! Parameters of a network live in one flat [`ParamStore`]; layers are
//! descriptors holding offsets into it. Gradients, target copies and
//! optimizer updates are therefore plain slices of the same layout, which
//! keeps soft updates and checkpointing trivial.

mod attention;
mod dense;
mod gradcheck;
pub mod linalg;
mod lstm;
mod params;
mod sgd;

pub use attention::{attention_backward, attention_weights, AttentionScorer};
pub use dense::{Activation, Dense};
pub use gradcheck::{grad_check, numeric_gradient, relative_error};
pub use lstm::{LstmCell, LstmTrace};
pub use params::{Block, ParamStore};
pub use sgd::{clip_global_norm, Sgd, SgdConfig};

use rand::Rng;

/// Xavier/Glorot uniform bound for a `fan_in × fan_out` map.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

pub(crate) fn fill_uniform<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], bound: f64) {
    for v in out {
        *v = rng.random_range(-bound..=bound);
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}
