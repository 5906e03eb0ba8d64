//! Q-network over `concat(s, a)`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{ensure, Result};
use crate::nn::{linalg, Activation, Dense, ParamStore};

pub const DEFAULT_HIDDEN: [usize; 4] = [512, 256, 128, 64];

/// How the action enters the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionInput {
    /// As given.
    Raw,
    /// Each half (original side, target side) scaled to unit length, so the
    /// critic sees only the directions the cosine projection acts on.
    #[default]
    UnitHalves,
}

/// Activations of a batch forward pass; `layers[0]` is the network input.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticTrace {
    pub batch: usize,
    pub layers: Vec<Vec<f64>>,
    /// Norm of each action half (`batch×2`) under `UnitHalves`.
    half_norms: Vec<f64>,
}

impl CriticTrace {
    /// One Q-value per batch row.
    pub fn q(&self) -> &[f64] {
        self.layers.last().expect("trace has an output layer")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    state_dim: usize,
    action_dim: usize,
    action_input: ActionInput,
    params: ParamStore,
    layers: Vec<Dense>,
}

const MIN_NORM: f64 = 1e-12;

impl QNetwork {
    pub fn zeroed(state_dim: usize, action_dim: usize, hidden: &[usize]) -> Result<Self> {
        Self::zeroed_with(state_dim, action_dim, hidden, ActionInput::default())
    }

    pub fn zeroed_with(state_dim: usize, action_dim: usize, hidden: &[usize], action_input: ActionInput) -> Result<Self> {
        ensure!(state_dim > 0 && action_dim > 0, "critic: empty input");
        ensure!(
            action_input == ActionInput::Raw || action_dim.is_multiple_of(2),
            "critic: unit-half action input needs an even action size, got {action_dim}"
        );
        ensure!(hidden.iter().all(|&h| h > 0), "critic: zero-width hidden layer");
        let mut params = ParamStore::new();
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = state_dim + action_dim;
        for (i, &h) in hidden.iter().enumerate() {
            layers.push(Dense::new(&mut params, &format!("critic.hidden{i}"), width, h, Activation::Relu));
            width = h;
        }
        layers.push(Dense::new(&mut params, "critic.out", width, 1, Activation::Identity));
        Ok(Self { state_dim, action_dim, action_input, params, layers })
    }

    pub fn new<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        Self::new_with(state_dim, action_dim, hidden, ActionInput::default(), rng)
    }

    pub fn new_with<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, hidden: &[usize], action_input: ActionInput, rng: &mut R) -> Result<Self> {
        let mut q = Self::zeroed_with(state_dim, action_dim, hidden, action_input)?;
        for l in &q.layers {
            l.init_xavier(&mut q.params, rng);
        }
        Ok(q)
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn action_input(&self) -> ActionInput {
        self.action_input
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    fn input_width(&self) -> usize {
        self.state_dim + self.action_dim
    }

    /// Builds the `batch×(|s|+|a|)` network input from row-major state and
    /// action batches, returning the action half norms alongside.
    pub fn stack_inputs(&self, states: &[f64], actions: &[f64], batch: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        ensure!(
            states.len() == batch * self.state_dim && actions.len() == batch * self.action_dim,
            "critic: got {} state and {} action values for batch {}",
            states.len(),
            actions.len(),
            batch
        );
        let mut x = Vec::with_capacity(batch * self.input_width());
        let mut norms = Vec::new();
        for (s, a) in states.chunks_exact(self.state_dim).zip(actions.chunks_exact(self.action_dim)) {
            x.extend_from_slice(s);
            match self.action_input {
                ActionInput::Raw => x.extend_from_slice(a),
                ActionInput::UnitHalves => {
                    for half in a.chunks_exact(self.action_dim / 2) {
                        let n = linalg::norm(half).max(MIN_NORM);
                        norms.push(n);
                        x.extend(half.iter().map(|v| v / n));
                    }
                }
            }
        }
        Ok((x, norms))
    }

    pub fn forward(&self, states: &[f64], actions: &[f64], batch: usize) -> Result<CriticTrace> {
        let (x, half_norms) = self.stack_inputs(states, actions, batch)?;
        let p = self.params.values();
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(x);
        for l in &self.layers {
            let y = l.forward(p, layers.last().expect("non-empty"), batch)?;
            layers.push(y);
        }
        Ok(CriticTrace { batch, layers, half_norms })
    }

    pub fn q_value(&self, s: &[f64], a: &[f64]) -> Result<f64> {
        Ok(self.forward(s, a, 1)?.q()[0])
    }

    pub fn q_batch(&self, states: &[f64], actions: &[f64], batch: usize) -> Result<Vec<f64>> {
        Ok(self.forward(states, actions, batch)?.q().to_vec())
    }

    /// Backpropagates `dq` (one value per row). Parameter gradients go into
    /// `grads` when given; returns the gradient with respect to the actions
    /// (`batch×|a|`) when `want_action_grad`.
    pub fn backward(&self, trace: &CriticTrace, dq: &[f64], grads: Option<&mut [f64]>, want_action_grad: bool) -> Result<Option<Vec<f64>>> {
        ensure!(dq.len() == trace.batch, "critic backward: {} upstream values for batch {}", dq.len(), trace.batch);
        let p = self.params.values();
        let mut upstream = dq.to_vec();
        match grads {
            Some(g) => {
                ensure!(g.len() == self.params.len(), "critic backward: gradient buffer size");
                for (i, l) in self.layers.iter().enumerate().rev() {
                    let need_input = i > 0 || want_action_grad;
                    match l.backward(p, &trace.layers[i], &trace.layers[i + 1], &upstream, trace.batch, g, need_input)? {
                        Some(dx) => upstream = dx,
                        None => return Ok(None),
                    }
                }
            }
            None => {
                if !want_action_grad {
                    return Ok(None);
                }
                for (i, l) in self.layers.iter().enumerate().rev() {
                    upstream = l.backward_input(p, &trace.layers[i + 1], &upstream, trace.batch)?;
                }
            }
        }
        let w = self.input_width();
        let mut da: Vec<f64> = upstream.chunks_exact(w).flat_map(|row| row[self.state_dim..].iter().copied()).collect();
        if self.action_input == ActionInput::UnitHalves {
            // d/da of a/|a| applied to the upstream gradient: (g − (g·u)u)/|a|
            let half = self.action_dim / 2;
            for (b, row) in da.chunks_exact_mut(self.action_dim).enumerate() {
                let x = &trace.layers[0][b * w + self.state_dim..(b + 1) * w];
                for (h, (g, u)) in row.chunks_exact_mut(half).zip(x.chunks_exact(half)).enumerate() {
                    let n = trace.half_norms[2 * b + h];
                    let gu = linalg::dot(g, u);
                    for (gi, ui) in g.iter_mut().zip(u) {
                        *gi = (*gi - gu * ui) / n;
                    }
                }
            }
        }
        Ok(Some(da))
    }

    /// `∂Q/∂a` at a single `(s, a)`.
    pub fn q_gradient_wrt_action(&self, s: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward(s, a, 1)?;
        Ok(self.backward(&trace, &[1.0], None, true)?.expect("action gradient requested"))
    }
}
