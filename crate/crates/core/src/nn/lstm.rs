use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::{fill_uniform, linalg, sigmoid, xavier_bound, ParamStore};
use crate::error::{ensure, Result};

/// Standard LSTM cell. Gate blocks are stacked in the order
/// input, forget, output, candidate along the `4H` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    pub inputs: usize,
    pub hidden: usize,
    w_x: Range<usize>,
    w_h: Range<usize>,
    bias: Range<usize>,
}

/// Forward activations of a whole sequence, kept for backpropagation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LstmTrace {
    pub len: usize,
    /// `len×inputs`
    pub xs: Vec<f64>,
    /// Activated gates, `len×4H`.
    pub gates: Vec<f64>,
    /// Cell states `c_1..c_len`, `len×H`.
    pub cs: Vec<f64>,
    /// Hidden states `h_1..h_len`, `len×H`.
    pub hs: Vec<f64>,
}

impl LstmTrace {
    pub fn h(&self, i: usize, hidden: usize) -> &[f64] {
        &self.hs[i * hidden..(i + 1) * hidden]
    }
}

impl LstmCell {
    pub fn new(store: &mut ParamStore, name: &str, inputs: usize, hidden: usize) -> Self {
        let w_x = store.alloc(format!("{name}.w_x"), &[4 * hidden, inputs]);
        let w_h = store.alloc(format!("{name}.w_h"), &[4 * hidden, hidden]);
        let bias = store.alloc(format!("{name}.bias"), &[4 * hidden]);
        Self { inputs, hidden, w_x, w_h, bias }
    }

    /// Xavier-uniform weights per gate, zero biases except forget = 1.
    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        let v = store.values_mut();
        fill_uniform(rng, &mut v[self.w_x.clone()], xavier_bound(self.inputs, self.hidden));
        fill_uniform(rng, &mut v[self.w_h.clone()], xavier_bound(self.hidden, self.hidden));
        let b = &mut v[self.bias.clone()];
        b.fill(0.0);
        b[self.hidden..2 * self.hidden].fill(1.0);
    }

    pub fn w_x_range(&self) -> Range<usize> {
        self.w_x.clone()
    }

    pub fn w_h_range(&self) -> Range<usize> {
        self.w_h.clone()
    }

    pub fn bias_range(&self) -> Range<usize> {
        self.bias.clone()
    }

    fn check(&self, x: &[f64], h: &[f64], c: &[f64]) -> Result<()> {
        ensure!(x.len() == self.inputs, "lstm: input size {} != {}", x.len(), self.inputs);
        ensure!(
            h.len() == self.hidden && c.len() == self.hidden,
            "lstm: state sizes {}/{} != {}",
            h.len(),
            c.len(),
            self.hidden
        );
        Ok(())
    }

    /// One step; returns `(h, c)`.
    pub fn step(&self, params: &[f64], x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(x, h_prev, c_prev)?;
        let mut z = params[self.bias.clone()].to_vec();
        let mut tmp = vec![0.0; 4 * self.hidden];
        linalg::matvec(&params[self.w_x.clone()], 4 * self.hidden, self.inputs, x, &mut tmp);
        linalg::axpy(1.0, &tmp, &mut z);
        linalg::matvec(&params[self.w_h.clone()], 4 * self.hidden, self.hidden, h_prev, &mut tmp);
        linalg::axpy(1.0, &tmp, &mut z);
        let mut h = vec![0.0; self.hidden];
        let mut c = vec![0.0; self.hidden];
        self.cell(&mut z, c_prev, &mut h, &mut c);
        Ok((h, c))
    }

    /// Gate nonlinearities on pre-activations `z` (overwritten with the
    /// activated gates), then the state update.
    fn cell(&self, z: &mut [f64], c_prev: &[f64], h: &mut [f64], c: &mut [f64]) {
        let hs = self.hidden;
        for v in &mut z[..3 * hs] {
            *v = sigmoid(*v);
        }
        for v in &mut z[3 * hs..] {
            *v = libm::tanh(*v);
        }
        for k in 0..hs {
            let (i, f, o, g) = (z[k], z[hs + k], z[2 * hs + k], z[3 * hs + k]);
            c[k] = f * c_prev[k] + i * g;
            h[k] = o * libm::tanh(c[k]);
        }
    }

    /// Runs a sequence `xs: len×inputs` from `h_0 = c_0 = 0`.
    pub fn forward_sequence(&self, params: &[f64], xs: &[f64], len: usize) -> Result<LstmTrace> {
        ensure!(xs.len() == len * self.inputs, "lstm: sequence has {} values, expected {}×{}", xs.len(), len, self.inputs);
        let g4 = 4 * self.hidden;
        let hs = self.hidden;
        let mut gates = vec![0.0; len * g4];
        for row in gates.chunks_exact_mut(g4) {
            row.copy_from_slice(&params[self.bias.clone()]);
        }
        // input projections for every step at once
        linalg::gemm(len, self.inputs, g4, xs, false, &params[self.w_x.clone()], true, 1.0, &mut gates);
        let mut cs = vec![0.0; len * hs];
        let mut hsv = vec![0.0; len * hs];
        let zero = vec![0.0; hs];
        let mut rec = vec![0.0; g4];
        for t in 0..len {
            let (h_prev, c_prev): (&[f64], &[f64]) = if t == 0 {
                (&zero, &zero)
            } else {
                (&hsv[(t - 1) * hs..t * hs], &cs[(t - 1) * hs..t * hs])
            };
            linalg::matvec(&params[self.w_h.clone()], g4, hs, h_prev, &mut rec);
            let z = &mut gates[t * g4..(t + 1) * g4];
            linalg::axpy(1.0, &rec, z);
            let c_prev = c_prev.to_vec();
            let (h_out, c_out) = (&mut hsv[t * hs..(t + 1) * hs], &mut cs[t * hs..(t + 1) * hs]);
            self.cell(z, &c_prev, h_out, c_out);
        }
        Ok(LstmTrace { len, xs: xs.to_vec(), gates, cs, hs: hsv })
    }

    /// Backpropagation through time. `dh: len×H` holds the external gradient
    /// on each `h_t`. Parameter gradients accumulate into `grads`; the
    /// gradient with respect to the inputs (`len×inputs`) is returned when
    /// requested.
    pub fn backward_sequence(
        &self,
        params: &[f64],
        trace: &LstmTrace,
        dh: &[f64],
        grads: &mut [f64],
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        let len = trace.len;
        let hs = self.hidden;
        let g4 = 4 * hs;
        ensure!(dh.len() == len * hs, "lstm backward: dh has {} values, expected {}", dh.len(), len * hs);
        let mut dz_all = vec![0.0; len * g4];
        let mut dh_next = vec![0.0; hs];
        let mut dc_next = vec![0.0; hs];
        for t in (0..len).rev() {
            let gates = &trace.gates[t * g4..(t + 1) * g4];
            let c = &trace.cs[t * hs..(t + 1) * hs];
            let dz = &mut dz_all[t * g4..(t + 1) * g4];
            for k in 0..hs {
                let (i, f, o, g) = (gates[k], gates[hs + k], gates[2 * hs + k], gates[3 * hs + k]);
                let c_prev = if t == 0 { 0.0 } else { trace.cs[(t - 1) * hs + k] };
                let tc = libm::tanh(c[k]);
                let dhk = dh[t * hs + k] + dh_next[k];
                let dc = dc_next[k] + dhk * o * (1.0 - tc * tc);
                dz[k] = dc * g * i * (1.0 - i);
                dz[hs + k] = dc * c_prev * f * (1.0 - f);
                dz[2 * hs + k] = dhk * tc * o * (1.0 - o);
                dz[3 * hs + k] = dc * i * (1.0 - g * g);
                dc_next[k] = dc * f;
            }
            dh_next.fill(0.0);
            if t > 0 {
                linalg::matvec_t_acc(&params[self.w_h.clone()], g4, hs, dz, &mut dh_next);
            }
        }
        {
            let gb = &mut grads[self.bias.clone()];
            for row in dz_all.chunks_exact(g4) {
                linalg::axpy(1.0, row, gb);
            }
        }
        linalg::gemm(g4, len, self.inputs, &dz_all, true, &trace.xs, false, 1.0, &mut grads[self.w_x.clone()]);
        if len > 1 {
            // h_{t-1} for t = 1..len pairs with dz rows 1..len
            linalg::gemm(g4, len - 1, hs, &dz_all[g4..], true, &trace.hs[..(len - 1) * hs], false, 1.0, &mut grads[self.w_h.clone()]);
        }
        if !want_input_grad {
            return Ok(None);
        }
        let mut dx = vec![0.0; len * self.inputs];
        linalg::gemm(len, g4, self.inputs, &dz_all, false, &params[self.w_x.clone()], false, 0.0, &mut dx);
        Ok(Some(dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, linalg::dot};
    use crate::seed;

    #[test]
    fn zero_cell_outputs_zero() {
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "l", 3, 4);
        let (h, c) = cell.step(store.values(), &[1.0, -2.0, 0.5], &[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(c, vec![0.0; 4]);
    }

    #[test]
    fn shape_errors() {
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "l", 3, 4);
        assert!(cell.step(store.values(), &[1.0; 2], &[0.0; 4], &[0.0; 4]).is_err());
        assert!(cell.step(store.values(), &[1.0; 3], &[0.0; 3], &[0.0; 4]).is_err());
    }

    #[test]
    fn sequence_matches_repeated_steps() {
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "l", 3, 5);
        let mut rng = seed::rng(2, "lstm");
        cell.init(&mut store, &mut rng);
        let xs: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trace = cell.forward_sequence(store.values(), &xs, 4).unwrap();
        let (mut h, mut c) = (vec![0.0; 5], vec![0.0; 5]);
        for t in 0..4 {
            let (h2, c2) = cell.step(store.values(), &xs[t * 3..(t + 1) * 3], &h, &c).unwrap();
            h = h2;
            c = c2;
            for k in 0..5 {
                assert!((trace.h(t, 5)[k] - h[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "l", 4, 3);
        let mut rng = seed::rng(5, "lstm-grad");
        cell.init(&mut store, &mut rng);
        fill_uniform(&mut rng, &mut store.values_mut()[cell.bias_range()], 0.5);
        let len = 3;
        let xs: Vec<f64> = (0..len * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let proj: Vec<f64> = (0..len * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |p: &[f64], xs: &[f64]| dot(&cell.forward_sequence(p, xs, len).unwrap().hs, &proj);

        let trace = cell.forward_sequence(store.values(), &xs, len).unwrap();
        let mut grads = store.zeros_like();
        let dx = cell.backward_sequence(store.values(), &trace, &proj, &mut grads, true).unwrap().unwrap();
        let p0 = store.values().to_vec();
        assert!(grad_check(|p| loss(p, &xs), &p0, &grads, 1e-5) < 1e-4);
        assert!(grad_check(|x| loss(&p0, x), &xs, &dx, 1e-5) < 1e-4);
    }
}
