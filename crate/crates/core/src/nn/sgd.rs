use alloc::format;

use super::{linalg, ParamStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    /// Global-norm clipping threshold; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, clip_norm: Some(5.0) }
    }
}

/// Plain stochastic gradient descent, `p ← p − η·g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sgd {
    cfg: SgdConfig,
}

impl Sgd {
    pub fn new(cfg: SgdConfig) -> Result<Self> {
        if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be > 0", cfg.learning_rate)));
        }
        if let Some(c) = cfg.clip_norm {
            if !(c > 0.0) {
                return Err(Error::Config(format!("clip norm {c} must be > 0")));
            }
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> SgdConfig {
        self.cfg
    }

    /// Applies one step in place. Fails without touching `store` if any
    /// gradient is non-finite, naming the offending block.
    pub fn step(&self, store: &mut ParamStore, grads: &mut [f64]) -> Result<()> {
        if grads.len() != store.len() {
            return Err(Error::Contract(format!(
                "gradient length {} != parameter count {}",
                grads.len(),
                store.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite { block: store.block_of(i).into(), detail: format!("gradient {}", grads[i]) });
        }
        if let Some(c) = self.cfg.clip_norm {
            clip_global_norm(grads, c);
        }
        linalg::axpy(-self.cfg.learning_rate, grads, store.values_mut());
        if let Some(i) = store.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { block: store.block_of(i).into(), detail: "parameter after update".into() });
        }
        Ok(())
    }
}

/// Rescales `g` so its Euclidean norm is at most `max_norm`. Returns the
/// scale applied.
pub fn clip_global_norm(g: &mut [f64], max_norm: f64) -> f64 {
    let n = linalg::norm(g);
    if n > max_norm {
        let s = max_norm / n;
        for v in g.iter_mut() {
            *v *= s;
        }
        s
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn store(values: &[f64]) -> ParamStore {
        let mut s = ParamStore::new();
        s.alloc("w", &[values.len()]);
        s.values_mut().copy_from_slice(values);
        s
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut s = store(&[1.0, -2.0]);
        let sgd = Sgd::new(SgdConfig { learning_rate: 0.1, clip_norm: None }).unwrap();
        sgd.step(&mut s, &mut [0.0, 0.0]).unwrap();
        assert_eq!(s.values(), &[1.0, -2.0]);
    }

    #[test]
    fn single_step_arithmetic() {
        let mut s = store(&[1.0]);
        let sgd = Sgd::new(SgdConfig { learning_rate: 0.001, clip_norm: None }).unwrap();
        sgd.step(&mut s, &mut [2.0]).unwrap();
        assert_eq!(s.values()[0], 1.0 - 0.001 * 2.0);
        assert!((s.values()[0] - 0.998).abs() < 1e-15);
    }

    #[test]
    fn clipping_scales_by_norm_ratio() {
        let mut g = vec![2.0, 2.0, 2.0, 2.0]; // norm 4
        assert_eq!(clip_global_norm(&mut g, 1.0), 0.25);
        assert_eq!(g, vec![0.5; 4]);
        let mut s = store(&[0.0; 4]);
        let sgd = Sgd::new(SgdConfig { learning_rate: 1.0, clip_norm: Some(1.0) }).unwrap();
        sgd.step(&mut s, &mut [2.0; 4]).unwrap();
        assert_eq!(s.values(), &[-0.5; 4]);
    }

    #[test]
    fn non_finite_gradient_names_block() {
        let mut s = ParamStore::new();
        s.alloc("a", &[1]);
        s.alloc("b", &[1]);
        let sgd = Sgd::new(SgdConfig::default()).unwrap();
        let err = sgd.step(&mut s, &mut [0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { ref block, .. } if block == "b"));
        assert_eq!(s.values(), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_learning_rate() {
        assert!(Sgd::new(SgdConfig { learning_rate: 0.0, clip_norm: None }).is_err());
    }
}
