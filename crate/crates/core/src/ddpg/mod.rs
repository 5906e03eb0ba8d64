//! Deterministic actor-critic training with replay and target networks.

mod replay;
mod update;

pub use replay::{HistoryRef, ReplayBuffer, Transition};
pub use update::{
    actor_objective_gradient, actor_update, critic_loss_gradient, critic_targets, critic_update, soft_update, EncoderContext, TargetNets,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::actor::{project_action, rank_by_cosine, Actor, ActorConfig, HistoryRecord};
use crate::critic::{ActionInput, QNetwork, DEFAULT_HIDDEN};
use crate::embedding::EmbeddingMatrix;
use crate::env::{Environment, RewardConfig, TraceRow};
use crate::error::{Error, Result};
use crate::eval::RankedCandidates;
use crate::graph::AnchorSet;
use crate::nn::{Sgd, SgdConfig};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    /// Steps per episode; `None` means one step per training anchor.
    pub steps_per_episode: Option<usize>,
    pub batch_size: usize,
    pub discount: f64,
    pub tau: f64,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    pub clip_norm: Option<f64>,
    pub buffer_capacity: usize,
    pub noise_start: f64,
    pub noise_end: f64,
    /// Samples per batch whose history is re-encoded so the history encoder
    /// receives gradient.
    pub encoder_samples: usize,
    pub feedback_dim: usize,
    pub critic_hidden: Vec<usize>,
    pub critic_action_input: ActionInput,
    pub rewards: RewardConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 200,
            steps_per_episode: None,
            batch_size: 64,
            discount: 0.9,
            tau: 0.001,
            actor_learning_rate: 1e-3,
            critic_learning_rate: 1e-3,
            clip_norm: Some(5.0),
            buffer_capacity: 10_000,
            noise_start: 0.2,
            noise_end: 0.01,
            encoder_samples: 1,
            feedback_dim: crate::DEFAULT_FEEDBACK_DIM,
            critic_hidden: DEFAULT_HIDDEN.to_vec(),
            critic_action_input: ActionInput::UnitHalves,
            rewards: RewardConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount must lie in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.steps_per_episode == Some(0) {
            return bad("steps per episode must be at least 1");
        }
        if !(self.noise_start >= 0.0 && self.noise_end >= 0.0) {
            return bad("noise scales must be non-negative");
        }
        Ok(())
    }

    /// Linear decay from `noise_start` at the first episode to `noise_end`
    /// at the last.
    pub fn noise_scale(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.noise_start;
        }
        let frac = episode as f64 / (self.episodes - 1) as f64;
        self.noise_start + (self.noise_end - self.noise_start) * frac
    }

    pub fn steps_for(&self, train: &AnchorSet) -> usize {
        self.steps_per_episode.unwrap_or(train.len()).max(1)
    }
}

/// Embeddings and ground truth for one linkage problem.
#[derive(Debug, Clone, Copy)]
pub struct LinkageTask<'a> {
    pub u_o: &'a EmbeddingMatrix,
    pub u_t: &'a EmbeddingMatrix,
    pub s_net: &'a [f64],
    pub train: &'a AnchorSet,
}

impl LinkageTask<'_> {
    fn encoder(&self) -> EncoderContext<'_> {
        EncoderContext { u_o: self.u_o, u_t: self.u_t, s_net: self.s_net }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub actor: Actor,
    pub critic: QNetwork,
    pub targets: TargetNets,
}

impl Agent {
    pub fn new(actor_cfg: ActorConfig, critic_hidden: &[usize], action_input: ActionInput, seed_v: u64) -> Result<Self> {
        let actor = Actor::new(actor_cfg, &mut seed::rng(seed_v, "init.actor"))?;
        let dim = actor_cfg.state_dim();
        let critic = QNetwork::new_with(dim, dim, critic_hidden, action_input, &mut seed::rng(seed_v, "init.critic"))?;
        let targets = TargetNets::from_live(&actor, &critic);
        Ok(Self { actor, critic, targets })
    }

    /// All-zero networks with the given shapes, ready for loading.
    pub fn zeroed(actor_cfg: ActorConfig, critic_hidden: &[usize], action_input: ActionInput) -> Result<Self> {
        let actor = Actor::zeroed(actor_cfg)?;
        let dim = actor_cfg.state_dim();
        let critic = QNetwork::zeroed_with(dim, dim, critic_hidden, action_input)?;
        let targets = TargetNets::from_live(&actor, &critic);
        Ok(Self { actor, critic, targets })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub total_reward: f64,
    /// `None` when no update ran during the episode.
    pub critic_loss_mean: Option<f64>,
    pub actor_objective_mean: Option<f64>,
    pub steps: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeSummary>,
    pub trace: Vec<TraceRow>,
}

impl TrainingLog {
    /// Mean episode reward over `[from, to)`.
    pub fn mean_reward(&self, from: usize, to: usize) -> Option<f64> {
        let slice = self.episodes.get(from..to.min(self.episodes.len()))?;
        (!slice.is_empty()).then(|| slice.iter().map(|e| e.total_reward).sum::<f64>() / slice.len() as f64)
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Runs `cfg.episodes` training episodes. `observer` is called after each
/// episode with its summary and the current agent.
pub fn train_with<F, E>(task: &LinkageTask<'_>, cfg: &TrainConfig, mut observer: F) -> Result<(Agent, TrainingLog), E>
where
    F: FnMut(&EpisodeSummary, &Agent) -> Result<(), E>,
    E: From<Error>,
{
    cfg.validate()?;
    let d = task.u_o.dim();
    if task.u_t.dim() != d || task.s_net.len() != 2 * d {
        return Err(Error::Contract("train: embedding and network summary dimensions disagree".into()).into());
    }
    let steps = cfg.steps_for(task.train);
    let actor_cfg = ActorConfig { feedback_dim: cfg.feedback_dim, ..ActorConfig::new(d, steps) };
    let mut agent = Agent::new(actor_cfg, &cfg.critic_hidden, cfg.critic_action_input, cfg.seed)?;
    let actor_sgd = Sgd::new(SgdConfig { learning_rate: cfg.actor_learning_rate, clip_norm: cfg.clip_norm })?;
    let critic_sgd = Sgd::new(SgdConfig { learning_rate: cfg.critic_learning_rate, clip_norm: cfg.clip_norm })?;
    let env = Environment::new(task.u_o.len(), task.u_t.len(), task.train, steps, cfg.rewards)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let mut noise_rng = seed::rng(cfg.seed, "noise");
    let mut replay_rng = seed::rng(cfg.seed, "replay");
    let mut logs: Vec<Vec<HistoryRecord>> = Vec::with_capacity(cfg.episodes);
    let mut log = TrainingLog::default();

    for episode in 0..cfg.episodes {
        let sigma = cfg.noise_scale(episode);
        let mut state = env.reset();
        let mut enc = agent.actor.start_episode();
        logs.push(Vec::with_capacity(steps));
        let mut s = agent.actor.encode_state(task.s_net, &enc)?.s;
        let (mut losses, mut objectives) = (Vec::new(), Vec::new());

        while !state.is_done() {
            let proto = agent.actor.decode_action(&s, sigma, &mut noise_rng)?;
            let action = match project_action(&proto, task.u_o, task.u_t, &state.availability()) {
                Ok(a) => a,
                Err(Error::Exhausted(_)) => break,
                Err(e) => return Err(e.into()),
            };
            let history_len = state.history.len();
            let out = env.step(&mut state, action.original, action.target)?;
            let rec = *state.history.last().expect("step recorded");
            logs[episode].push(rec);
            log.trace.push(TraceRow {
                episode,
                t: rec.step,
                original: rec.original,
                target: rec.target,
                immediate: out.immediate,
                reward: out.reward,
            });
            agent.actor.push_record(&mut enc, &rec, task.u_o, task.u_t)?;
            let s_next = agent.actor.encode_state(task.s_net, &enc)?.s;
            let transition = Transition {
                s: core::mem::take(&mut s),
                a: action.embedding,
                r: out.reward,
                s_next: s_next.clone(),
                done: out.done,
                history: HistoryRef { episode, len: history_len },
            };
            if !transition.is_finite() {
                return Err(Error::NonFinite { block: "transition".into(), detail: format!("episode {episode}") }.into());
            }
            buffer.store(transition);

            if let Some(batch) = buffer.sample(cfg.batch_size, &mut replay_rng) {
                losses.push(critic_update(&mut agent.critic, &agent.targets, &batch, cfg.discount, &critic_sgd)?);
                let mut chosen = 0;
                let histories: Vec<Option<&[HistoryRecord]>> = batch
                    .iter()
                    .map(|t| {
                        if chosen < cfg.encoder_samples && t.history.len > 0 {
                            chosen += 1;
                            Some(&logs[t.history.episode][..t.history.len])
                        } else {
                            None
                        }
                    })
                    .collect();
                objectives.push(actor_update(&mut agent.actor, &agent.critic, &batch, &histories, Some(task.encoder()), &actor_sgd)?);
                agent.targets.soft_update(&agent.actor, &agent.critic, cfg.tau)?;
            }
            s = s_next;
        }

        let summary = EpisodeSummary {
            episode,
            total_reward: state.total_reward(),
            critic_loss_mean: mean(&losses),
            actor_objective_mean: mean(&objectives),
            steps: state.history.len(),
            correct: state.correct_count(),
        };
        log.episodes.push(summary);
        observer(&summary, &agent)?;
    }
    Ok((agent, log))
}

pub fn train(task: &LinkageTask<'_>, cfg: &TrainConfig) -> Result<(Agent, TrainingLog)> {
    train_with(task, cfg, |_, _| Ok::<(), Error>(()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    /// `(original, target, correct)` in proposal order.
    pub proposals: Vec<(usize, usize, bool)>,
    /// Per test anchor, in `AnchorSet` order.
    pub ranks: RankedCandidates,
    pub correct: usize,
}

/// One noise-free episode against the test anchors, with training-anchor
/// endpoints excluded from selection.
///
/// Each test original is ranked the first time the policy proposes it: its
/// true partner's position among selectable targets, ordered by cosine to
/// the target half of the proto-action. Originals never proposed are
/// unranked.
pub fn evaluate_policy(
    actor: &Actor,
    u_o: &EmbeddingMatrix,
    u_t: &EmbeddingMatrix,
    s_net: &[f64],
    train: &AnchorSet,
    test: &AnchorSet,
    steps: Option<usize>,
) -> Result<PolicyEvaluation> {
    let mut masked_o = vec![false; u_o.len()];
    let mut masked_t = vec![false; u_t.len()];
    for a in train.iter() {
        masked_o[a.original] = true;
        masked_t[a.target] = true;
    }
    let steps = steps.unwrap_or(test.len()).max(1);
    let env = Environment::new(u_o.len(), u_t.len(), test, steps, RewardConfig::default())?;
    let mut state = env.reset_masked(&masked_o, &masked_t)?;
    let mut enc = actor.start_episode();
    let mut rank_of: Vec<Option<usize>> = vec![None; u_o.len()];
    let mut seen = vec![false; u_o.len()];
    let mut proposals = Vec::new();
    while !state.is_done() {
        let s = actor.encode_state(s_net, &enc)?.s;
        let proto = actor.act(&s)?;
        let action = match project_action(&proto, u_o, u_t, &state.availability()) {
            Ok(a) => a,
            Err(Error::Exhausted(_)) => break,
            Err(e) => return Err(e),
        };
        let o = action.original;
        if !seen[o] {
            seen[o] = true;
            if let Some(truth) = test.partner_of_original(o) {
                let order = rank_by_cosine(proto.target_half(), u_t, |v| !state.masked_target[v]);
                rank_of[o] = order.iter().position(|&v| v == truth).map(|p| p + 1);
            }
        }
        let out = env.step(&mut state, o, action.target)?;
        proposals.push((o, action.target, out.correct));
        actor.push_record(&mut enc, state.history.last().expect("step recorded"), u_o, u_t)?;
    }
    let ranks = RankedCandidates::new(test.iter().map(|a| rank_of[a.original]).collect())?;
    Ok(PolicyEvaluation { correct: state.correct_count(), proposals, ranks })
}
