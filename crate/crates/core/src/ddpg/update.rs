use alloc::vec::Vec;

use super::replay::Transition;
use crate::actor::{Actor, HistoryRecord, HistoryTrace};
use crate::critic::QNetwork;
use crate::embedding::EmbeddingMatrix;
use crate::error::{ensure, Error, Result};
use crate::nn::{ParamStore, Sgd};

/// Slowly tracking copies of the live networks.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetNets {
    pub actor: Actor,
    pub critic: QNetwork,
}

impl TargetNets {
    pub fn from_live(actor: &Actor, critic: &QNetwork) -> Self {
        Self { actor: actor.clone(), critic: critic.clone() }
    }

    /// `θ′ ← τθ + (1−τ)θ′` for both networks.
    pub fn soft_update(&mut self, actor: &Actor, critic: &QNetwork, tau: f64) -> Result<()> {
        soft_update(actor.params(), self.actor.params_mut(), tau)?;
        soft_update(critic.params(), self.critic.params_mut(), tau)
    }
}

pub fn soft_update(live: &ParamStore, target: &mut ParamStore, tau: f64) -> Result<()> {
    target.soft_update_from(live, tau)
}

fn stack<'a, F: Fn(&'a Transition) -> &'a [f64]>(batch: &[&'a Transition], f: F) -> Vec<f64> {
    batch.iter().flat_map(|t| f(t).iter().copied()).collect()
}

/// Bootstrapped regression targets `y = r + ρ·Q′(s′, f′(s′))`, or `r` for
/// terminal transitions. Only target networks are read.
pub fn critic_targets(targets: &TargetNets, batch: &[&Transition], discount: f64) -> Result<Vec<f64>> {
    let live: Vec<&Transition> = batch.iter().copied().filter(|t| !t.done).collect();
    let mut boot = Vec::new();
    if !live.is_empty() && discount != 0.0 {
        let s_next = stack(&live, |t| &t.s_next);
        let proto = targets.actor.decode_batch(&s_next, live.len())?;
        boot = targets.critic.q_batch(&s_next, &proto, live.len())?;
    }
    let mut next = boot.into_iter();
    Ok(batch
        .iter()
        .map(|t| {
            if t.done {
                t.r
            } else {
                t.r + discount * next.next().unwrap_or(0.0)
            }
        })
        .collect())
}

/// Mean squared error of the live critic against fixed targets, with its
/// parameter gradient.
pub fn critic_loss_gradient(critic: &QNetwork, batch: &[&Transition], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    ensure!(!batch.is_empty() && y.len() == batch.len(), "critic update: empty batch or target size mismatch");
    let n = batch.len();
    let trace = critic.forward(&stack(batch, |t| &t.s), &stack(batch, |t| &t.a), n)?;
    let q = trace.q();
    let mut loss = 0.0;
    let dq: Vec<f64> = q
        .iter()
        .zip(y)
        .map(|(q, y)| {
            loss += (q - y) * (q - y);
            2.0 * (q - y) / n as f64
        })
        .collect();
    loss /= n as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite { block: "critic".into(), detail: alloc::format!("loss {loss}") });
    }
    let mut grads = critic.params().zeros_like();
    critic.backward(&trace, &dq, Some(&mut grads), false)?;
    Ok((loss, grads))
}

/// One SGD step on the critic. Returns the loss before the step.
pub fn critic_update(critic: &mut QNetwork, targets: &TargetNets, batch: &[&Transition], discount: f64, sgd: &Sgd) -> Result<f64> {
    let y = critic_targets(targets, batch, discount)?;
    let (loss, mut grads) = critic_loss_gradient(critic, batch, &y)?;
    sgd.step(critic.params_mut(), &mut grads)?;
    Ok(loss)
}

/// Inputs needed to re-encode stored histories.
#[derive(Debug, Clone, Copy)]
pub struct EncoderContext<'a> {
    pub u_o: &'a EmbeddingMatrix,
    pub u_t: &'a EmbeddingMatrix,
    pub s_net: &'a [f64],
}

/// Policy objective `J = mean Q(s, f(s))` and the gradient of `−J`.
///
/// `histories[i]`, when present, is re-encoded with the current encoder so
/// the gradient also reaches the history encoder for that sample; other
/// samples use their stored state. The critic's state input is treated as
/// fixed: only `∇_a Q` flows back into the actor.
pub fn actor_objective_gradient(
    actor: &Actor,
    critic: &QNetwork,
    batch: &[&Transition],
    histories: &[Option<&[HistoryRecord]>],
    ctx: Option<EncoderContext<'_>>,
) -> Result<(f64, Vec<f64>)> {
    ensure!(!batch.is_empty() && histories.len() == batch.len(), "actor update: empty batch or history size mismatch");
    let n = batch.len();
    let dim = actor.config().state_dim();
    let mut states = stack(batch, |t| &t.s);
    let mut traces: Vec<(usize, HistoryTrace)> = Vec::new();
    for (i, h) in histories.iter().enumerate() {
        let Some(records) = h.filter(|r| !r.is_empty()) else { continue };
        let ctx = ctx.ok_or_else(|| Error::Contract("history re-encoding needs embeddings".into()))?;
        let trace = actor.trace_history(records, ctx.u_o, ctx.u_t)?;
        for (k, v) in states[i * dim..(i + 1) * dim].iter_mut().enumerate() {
            *v = ctx.s_net[k] + trace.s_pair[k];
        }
        traces.push((i, trace));
    }
    let proto = actor.decode_batch(&states, n)?;
    let trace = critic.forward(&states, &proto, n)?;
    let objective = trace.q().iter().sum::<f64>() / n as f64;
    let dq = alloc::vec![-1.0 / n as f64; n];
    let d_proto = critic.backward(&trace, &dq, None, true)?.expect("action gradient requested");
    let mut grads = actor.params().zeros_like();
    let ds = actor
        .decoder()
        .backward(actor.params().values(), &states, &proto, &d_proto, n, &mut grads, !traces.is_empty())?;
    if let Some(ds) = ds {
        for (i, tr) in &traces {
            actor.history_backward(tr, &ds[i * dim..(i + 1) * dim], &mut grads)?;
        }
    }
    Ok((objective, grads))
}

/// One SGD step on the actor along `∇_a Q · ∇_θ f`. Returns the objective
/// before the step.
pub fn actor_update(
    actor: &mut Actor,
    critic: &QNetwork,
    batch: &[&Transition],
    histories: &[Option<&[HistoryRecord]>],
    ctx: Option<EncoderContext<'_>>,
    sgd: &Sgd,
) -> Result<f64> {
    let (objective, mut grads) = actor_objective_gradient(actor, critic, batch, histories, ctx)?;
    sgd.step(actor.params_mut(), &mut grads)?;
    Ok(objective)
}
