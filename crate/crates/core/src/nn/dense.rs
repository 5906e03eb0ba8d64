use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::{fill_uniform, linalg, sigmoid, xavier_bound, ParamStore};
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Tanh => libm::tanh(z),
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the activated output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

/// Affine map `φ(W·x + b)` with `W: outputs×inputs`, stored in a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    weight: Range<usize>,
    bias: Range<usize>,
}

impl Dense {
    /// Allocates `<name>.weight` and `<name>.bias` (zeros).
    pub fn new(store: &mut ParamStore, name: &str, inputs: usize, outputs: usize, activation: Activation) -> Self {
        let weight = store.alloc(format!("{name}.weight"), &[outputs, inputs]);
        let bias = store.alloc(format!("{name}.bias"), &[outputs]);
        Self { inputs, outputs, activation, weight, bias }
    }

    pub fn init_xavier<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        let bound = xavier_bound(self.inputs, self.outputs);
        fill_uniform(rng, &mut store.values_mut()[self.weight.clone()], bound);
        store.values_mut()[self.bias.clone()].fill(0.0);
    }

    pub fn weight<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.weight.clone()]
    }

    pub fn bias<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.bias.clone()]
    }

    pub fn weight_range(&self) -> Range<usize> {
        self.weight.clone()
    }

    pub fn bias_range(&self) -> Range<usize> {
        self.bias.clone()
    }

    /// Forward pass over a row-major batch `x: batch×inputs`.
    pub fn forward(&self, params: &[f64], x: &[f64], batch: usize) -> Result<Vec<f64>> {
        ensure!(
            x.len() == batch * self.inputs,
            "dense forward: input has {} values, expected {}×{}",
            x.len(),
            batch,
            self.inputs
        );
        let mut y = vec![0.0; batch * self.outputs];
        let b = self.bias(params);
        for row in y.chunks_exact_mut(self.outputs) {
            row.copy_from_slice(b);
        }
        if batch == 1 {
            let w = self.weight(params);
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += linalg::dot(&w[r * self.inputs..(r + 1) * self.inputs], x);
            }
        } else {
            linalg::gemm(batch, self.inputs, self.outputs, x, false, self.weight(params), true, 1.0, &mut y);
        }
        if self.activation != Activation::Identity {
            for v in &mut y {
                *v = self.activation.apply(*v);
            }
        }
        Ok(y)
    }

    /// Input gradient only, leaving parameter gradients untouched.
    pub fn backward_input(&self, params: &[f64], y: &[f64], dy: &[f64], batch: usize) -> Result<Vec<f64>> {
        ensure!(y.len() == batch * self.outputs && dy.len() == y.len(), "dense backward: shape mismatch");
        let dz = self.pre_activation_grad(y, dy);
        let mut dx = vec![0.0; batch * self.inputs];
        if batch == 1 {
            linalg::matvec_t_acc(self.weight(params), self.outputs, self.inputs, &dz, &mut dx);
        } else {
            linalg::gemm(batch, self.outputs, self.inputs, &dz, false, self.weight(params), false, 0.0, &mut dx);
        }
        Ok(dx)
    }

    fn pre_activation_grad(&self, y: &[f64], dy: &[f64]) -> Vec<f64> {
        if self.activation == Activation::Identity {
            dy.to_vec()
        } else {
            y.iter().zip(dy).map(|(&yv, &g)| g * self.activation.derivative_from_output(yv)).collect()
        }
    }

    /// Backward pass. `y` is the forward output, `dy` the upstream gradient
    /// with respect to it. Parameter gradients are accumulated into `grads`
    /// (same layout as the store); the input gradient is returned when asked.
    pub fn backward(
        &self,
        params: &[f64],
        x: &[f64],
        y: &[f64],
        dy: &[f64],
        batch: usize,
        grads: &mut [f64],
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        ensure!(
            x.len() == batch * self.inputs && y.len() == batch * self.outputs && dy.len() == y.len(),
            "dense backward: shape mismatch"
        );
        ensure!(grads.len() >= self.bias.end, "dense backward: gradient buffer too short");
        let dz = self.pre_activation_grad(y, dy);
        {
            let gb = &mut grads[self.bias.clone()];
            for row in dz.chunks_exact(self.outputs) {
                linalg::axpy(1.0, row, gb);
            }
        }
        if batch == 1 {
            linalg::rank1_acc(1.0, &dz, x, &mut grads[self.weight.clone()]);
        } else {
            linalg::gemm(self.outputs, batch, self.inputs, &dz, true, x, false, 1.0, &mut grads[self.weight.clone()]);
        }
        if !want_input_grad {
            return Ok(None);
        }
        let mut dx = vec![0.0; batch * self.inputs];
        if batch == 1 {
            linalg::matvec_t_acc(self.weight(params), self.outputs, self.inputs, &dz, &mut dx);
        } else {
            linalg::gemm(batch, self.outputs, self.inputs, &dz, false, self.weight(params), false, 0.0, &mut dx);
        }
        Ok(Some(dx))
    }
}
