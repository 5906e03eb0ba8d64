//! The linkage decision process: masking, rewards and termination.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::actor::{Availability, HistoryRecord};
use crate::error::{ensure, Error, Result};
use crate::graph::AnchorSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    pub correct_reward: f64,
    pub incorrect_reward: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { correct_reward: 1.0, incorrect_reward: -1.0 }
    }
}

impl RewardConfig {
    /// `λ_t = 1/t` for 1-based `t`.
    pub fn discount(t: usize) -> f64 {
        1.0 / t as f64
    }

    pub fn immediate(&self, correct: bool) -> f64 {
        if correct {
            self.correct_reward
        } else {
            self.incorrect_reward
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    /// Next step to play, 1-based.
    pub t: usize,
    pub t_max: usize,
    /// Proposed pairs in order, each with its immediate reward.
    pub history: Vec<HistoryRecord>,
    /// Discounted reward of each step.
    pub rewards: Vec<f64>,
    pub masked_original: Vec<bool>,
    pub masked_target: Vec<bool>,
    pub proposed: BTreeSet<(usize, usize)>,
    open_original: usize,
    open_target: usize,
    done: bool,
}

impl EpisodeState {
    pub fn availability(&self) -> Availability<'_> {
        Availability { masked_original: &self.masked_original, masked_target: &self.masked_target, proposed: Some(&self.proposed) }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn correct_count(&self) -> usize {
        self.history.iter().filter(|r| r.reward > 0.0).count()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    fn untried_open_pairs(&self) -> usize {
        let tried = self.proposed.iter().filter(|&&(o, t)| !self.masked_original[o] && !self.masked_target[t]).count();
        self.open_original * self.open_target - tried
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub correct: bool,
    pub immediate: f64,
    /// `r_t = λ_t · r_tm`
    pub reward: f64,
    pub done: bool,
}

/// Environment over a pair of graphs with node counts `n_original`/`n_target`,
/// rewarding proposals found in `truth`.
#[derive(Debug, Clone)]
pub struct Environment<'a> {
    truth: &'a AnchorSet,
    n_original: usize,
    n_target: usize,
    t_max: usize,
    rewards: RewardConfig,
}

impl<'a> Environment<'a> {
    pub fn new(n_original: usize, n_target: usize, truth: &'a AnchorSet, t_max: usize, rewards: RewardConfig) -> Result<Self> {
        if t_max == 0 {
            return Err(Error::Config("steps per episode must be at least 1".into()));
        }
        ensure!(
            truth.iter().all(|a| a.original < n_original && a.target < n_target),
            "ground truth refers to nodes outside the graphs"
        );
        Ok(Self { truth, n_original, n_target, t_max, rewards })
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn truth(&self) -> &AnchorSet {
        self.truth
    }

    /// Fresh episode with every node selectable.
    pub fn reset(&self) -> EpisodeState {
        self.reset_masked(&vec![false; self.n_original], &vec![false; self.n_target]).expect("mask sizes match")
    }

    /// Fresh episode with some nodes excluded up front.
    pub fn reset_masked(&self, masked_original: &[bool], masked_target: &[bool]) -> Result<EpisodeState> {
        ensure!(
            masked_original.len() == self.n_original && masked_target.len() == self.n_target,
            "initial masks do not match node counts"
        );
        let open_original = masked_original.iter().filter(|m| !**m).count();
        let open_target = masked_target.iter().filter(|m| !**m).count();
        Ok(EpisodeState {
            t: 1,
            t_max: self.t_max,
            history: Vec::new(),
            rewards: Vec::new(),
            masked_original: masked_original.to_vec(),
            masked_target: masked_target.to_vec(),
            proposed: BTreeSet::new(),
            open_original,
            open_target,
            done: open_original == 0 || open_target == 0,
        })
    }

    pub fn step(&self, state: &mut EpisodeState, original: usize, target: usize) -> Result<StepOutcome> {
        ensure!(!state.done, "step on a finished episode");
        ensure!(original < self.n_original && target < self.n_target, "pair ({original}, {target}) out of range");
        ensure!(
            !state.masked_original[original] && !state.masked_target[target],
            "pair ({original}, {target}) uses a masked identity"
        );
        ensure!(state.proposed.insert((original, target)), "pair ({original}, {target}) already proposed");
        let correct = self.truth.partner_of_original(original) == Some(target);
        let immediate = self.rewards.immediate(correct);
        let reward = RewardConfig::discount(state.t) * immediate;
        if correct {
            state.masked_original[original] = true;
            state.masked_target[target] = true;
            state.open_original -= 1;
            state.open_target -= 1;
        }
        state.history.push(HistoryRecord { original, target, reward: immediate, step: state.t });
        state.rewards.push(reward);
        state.t += 1;
        state.done = state.t > state.t_max || state.untried_open_pairs() == 0;
        Ok(StepOutcome { correct, immediate, reward, done: state.done })
    }
}

/// `Σ r_t` over an episode.
pub fn episode_return(rewards: &[f64]) -> f64 {
    rewards.iter().sum()
}

/// One row of the exported episode trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub episode: usize,
    pub t: usize,
    pub original: usize,
    pub target: usize,
    pub immediate: f64,
    pub reward: f64,
}
