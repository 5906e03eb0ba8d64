use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::{fill_uniform, linalg, xavier_bound, ParamStore};
use crate::error::{ensure, Result};

/// Location-based attention: one logit `w·h_i + b` per hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionScorer {
    pub hidden: usize,
    weight: Range<usize>,
    bias: Range<usize>,
}

impl AttentionScorer {
    pub fn new(store: &mut ParamStore, name: &str, hidden: usize) -> Self {
        let weight = store.alloc(format!("{name}.weight"), &[hidden]);
        let bias = store.alloc(format!("{name}.bias"), &[1]);
        Self { hidden, weight, bias }
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        fill_uniform(rng, &mut store.values_mut()[self.weight.clone()], xavier_bound(self.hidden, 1));
        store.values_mut()[self.bias.clone()].fill(0.0);
    }

    pub fn weight_range(&self) -> Range<usize> {
        self.weight.clone()
    }

    pub fn logit(&self, params: &[f64], h: &[f64]) -> f64 {
        linalg::dot(&params[self.weight.clone()], h) + params[self.bias.start]
    }

    /// Softmax weights over `hs: len×H`.
    pub fn weights(&self, params: &[f64], hs: &[f64], len: usize) -> Result<Vec<f64>> {
        ensure!(len > 0, "attention over an empty sequence");
        ensure!(hs.len() == len * self.hidden, "attention: {} values for {}×{}", hs.len(), len, self.hidden);
        let logits: Vec<f64> = hs.chunks_exact(self.hidden).map(|h| self.logit(params, h)).collect();
        attention_weights(&logits)
    }

    /// `Σ γ_i h_i` together with the weights.
    pub fn pool(&self, params: &[f64], hs: &[f64], len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let gamma = self.weights(params, hs, len)?;
        let mut out = vec![0.0; self.hidden];
        for (g, h) in gamma.iter().zip(hs.chunks_exact(self.hidden)) {
            linalg::axpy(*g, h, &mut out);
        }
        Ok((out, gamma))
    }

    /// Backward of [`pool`](Self::pool): given `d_out`, accumulates scorer
    /// gradients and returns `dL/dh_i` for every step (`len×H`).
    pub fn backward(&self, params: &[f64], hs: &[f64], gamma: &[f64], d_out: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let h = self.hidden;
        let dgamma: Vec<f64> = hs.chunks_exact(h).map(|hi| linalg::dot(d_out, hi)).collect();
        let dlogit = attention_backward(gamma, &dgamma);
        let w = &params[self.weight.clone()];
        let mut dh = vec![0.0; hs.len()];
        for (i, hi) in hs.chunks_exact(h).enumerate() {
            let row = &mut dh[i * h..(i + 1) * h];
            linalg::axpy(gamma[i], d_out, row);
            linalg::axpy(dlogit[i], w, row);
            linalg::axpy(dlogit[i], hi, &mut grads[self.weight.clone()]);
            grads[self.bias.start] += dlogit[i];
        }
        dh
    }
}

/// Max-shifted softmax.
pub fn attention_weights(logits: &[f64]) -> Result<Vec<f64>> {
    ensure!(!logits.is_empty(), "attention over an empty sequence");
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logits.iter().map(|&l| libm::exp(l - max)).collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    Ok(w)
}

/// Softmax Jacobian-vector product: `dl_i = γ_i (dγ_i − Σ_j γ_j dγ_j)`.
pub fn attention_backward(gamma: &[f64], dgamma: &[f64]) -> Vec<f64> {
    let mean: f64 = gamma.iter().zip(dgamma).map(|(g, d)| g * d).sum();
    gamma.iter().zip(dgamma).map(|(g, d)| g * (d - mean)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, linalg::dot};
    use crate::seed;

    #[test]
    fn softmax_cases() {
        assert_eq!(attention_weights(&[0.7, 0.7]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(attention_weights(&[-3.0]).unwrap(), vec![1.0]);
        let w = attention_weights(&[0.0, libm::log(3.0)]).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.75).abs() < 1e-15);
        assert!(attention_weights(&[]).is_err());
    }

    #[test]
    fn huge_logits_stay_finite() {
        let w = attention_weights(&[1000.0, 999.0, -1000.0]).unwrap();
        assert!(w.iter().all(|v| v.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pool_gradients_match_finite_differences() {
        let mut store = ParamStore::new();
        let att = AttentionScorer::new(&mut store, "a", 4);
        let mut rng = seed::rng(4, "att");
        att.init(&mut store, &mut rng);
        store.values_mut()[4] = 0.3;
        let len = 3;
        let hs: Vec<f64> = (0..len * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let proj: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |p: &[f64], hs: &[f64]| dot(&att.pool(p, hs, len).unwrap().0, &proj);

        let (_, gamma) = att.pool(store.values(), &hs, len).unwrap();
        let mut grads = store.zeros_like();
        let dh = att.backward(store.values(), &hs, &gamma, &proj, &mut grads);
        let p0 = store.values().to_vec();
        assert!(grad_check(|p| loss(p, &hs), &p0, &grads, 1e-5) < 1e-4);
        assert!(grad_check(|h| loss(&p0, h), &hs, &dh, 1e-5) < 1e-4);
    }
}
