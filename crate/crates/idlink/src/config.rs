//! Run configuration: a TOML file of `key = value` lines grouped into
//! sections, merged with command-line overrides.

use std::path::{Path, PathBuf};

use idlink_core::critic::ActionInput;
use idlink_core::ddpg::TrainConfig;
use idlink_core::embedding::WalkConfig;
use idlink_core::env::RewardConfig;
use idlink_core::eval::SdmConfig;
use idlink_core::graph::{BaseGraph, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BASELINES: [&str; 3] = ["greedy", "random", "sdm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root of every random stream.
    pub seed: u64,
    pub out: PathBuf,
    /// Fraction of anchors used for training.
    pub train_ratio: f64,
    pub synthetic: SyntheticSection,
    pub embedding: EmbeddingSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub sdm: SdmSection,
    pub paths: PathsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            train_ratio: 0.6,
            synthetic: SyntheticSection::default(),
            embedding: EmbeddingSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            sdm: SdmSection::default(),
            paths: PathsSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    ErdosRenyi,
    PreferentialAttachment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub node_count: usize,
    pub base: BaseKind,
    pub edge_prob: f64,
    pub edges_per_node: usize,
    pub edge_overlap: f64,
    pub anchor_fraction: f64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self { node_count: 100, base: BaseKind::ErdosRenyi, edge_prob: 0.1, edges_per_node: 3, edge_overlap: 0.95, anchor_fraction: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub p: f64,
    pub q: f64,
    /// Degree weighting constant of the network summary.
    pub zeta: f64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        let w = WalkConfig::default();
        Self {
            dim: w.dim,
            walks_per_node: w.walks_per_node,
            walk_length: w.walk_length,
            window: w.window,
            negatives: w.negatives,
            epochs: w.epochs,
            learning_rate: w.learning_rate,
            p: w.p,
            q: w.q,
            zeta: idlink_core::DEFAULT_ZETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionInputKind {
    Raw,
    UnitHalves,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub episodes: usize,
    /// Defaults to the number of training anchors.
    pub steps_per_episode: Option<usize>,
    pub batch_size: usize,
    pub discount: f64,
    pub tau: f64,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    /// Global gradient-norm clip; 0 disables.
    pub clip_norm: f64,
    pub buffer_capacity: usize,
    pub noise_start: f64,
    pub noise_end: f64,
    pub encoder_samples: usize,
    pub feedback_dim: usize,
    pub critic_hidden: Vec<usize>,
    pub critic_action_input: ActionInputKind,
    pub correct_reward: f64,
    pub incorrect_reward: f64,
    /// Write an intermediate checkpoint every this many episodes; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            episodes: t.episodes,
            steps_per_episode: t.steps_per_episode,
            batch_size: t.batch_size,
            discount: t.discount,
            tau: t.tau,
            actor_learning_rate: t.actor_learning_rate,
            critic_learning_rate: t.critic_learning_rate,
            clip_norm: t.clip_norm.unwrap_or(0.0),
            buffer_capacity: t.buffer_capacity,
            noise_start: t.noise_start,
            noise_end: t.noise_end,
            encoder_samples: t.encoder_samples,
            feedback_dim: t.feedback_dim,
            critic_hidden: t.critic_hidden,
            critic_action_input: ActionInputKind::UnitHalves,
            correct_reward: t.rewards.correct_reward,
            incorrect_reward: t.rewards.incorrect_reward,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub k: Vec<usize>,
    pub baselines: Vec<String>,
    /// Steps of the test episode; defaults to the number of test anchors.
    pub test_steps: Option<usize>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { k: vec![1, 5, 10, 30], baselines: BASELINES.iter().map(|s| s.to_string()).collect(), test_steps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdmSection {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for SdmSection {
    fn default() -> Self {
        let s = SdmConfig::default();
        Self { hidden: s.hidden, epochs: s.epochs, learning_rate: s.learning_rate }
    }
}

/// Input files that replace the generated ones under `out`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub original_edges: Option<PathBuf>,
    pub target_edges: Option<PathBuf>,
    pub anchors: Option<PathBuf>,
    pub original_embedding: Option<PathBuf>,
    pub target_embedding: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub baselines: Option<Vec<String>>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).in_file(p))?;
                Self::from_toml(&text).map_err(|e| e.in_file(p))?
            }
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(b) = &o.baselines {
            self.eval.baselines = b.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::Config(format!("train_ratio {} must lie in (0, 1)", self.train_ratio)));
        }
        if let Some(b) = self.eval.baselines.iter().find(|b| !BASELINES.contains(&b.as_str())) {
            return Err(Error::Config(format!("unknown baseline `{b}` (known: {})", BASELINES.join(", "))));
        }
        if self.eval.k.is_empty() || self.eval.k.contains(&0) {
            return Err(Error::Config("eval.k needs at least one k, all >= 1".into()));
        }
        self.synthetic_spec().validate()?;
        self.walk_config().validate()?;
        self.train_config().validate()?;
        Ok(())
    }

    /// Fully resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let s = &self.synthetic;
        let base = match s.base {
            BaseKind::ErdosRenyi => BaseGraph::ErdosRenyi { edge_prob: s.edge_prob },
            BaseKind::PreferentialAttachment => BaseGraph::PreferentialAttachment { edges_per_node: s.edges_per_node },
        };
        SyntheticSpec { node_count: s.node_count, base, edge_overlap: s.edge_overlap, anchor_fraction: s.anchor_fraction, seed: self.seed }
    }

    pub fn walk_config(&self) -> WalkConfig {
        let e = &self.embedding;
        WalkConfig {
            dim: e.dim,
            walks_per_node: e.walks_per_node,
            walk_length: e.walk_length,
            window: e.window,
            negatives: e.negatives,
            epochs: e.epochs,
            learning_rate: e.learning_rate,
            p: e.p,
            q: e.q,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            episodes: t.episodes,
            steps_per_episode: t.steps_per_episode,
            batch_size: t.batch_size,
            discount: t.discount,
            tau: t.tau,
            actor_learning_rate: t.actor_learning_rate,
            critic_learning_rate: t.critic_learning_rate,
            clip_norm: (t.clip_norm > 0.0).then_some(t.clip_norm),
            buffer_capacity: t.buffer_capacity,
            noise_start: t.noise_start,
            noise_end: t.noise_end,
            encoder_samples: t.encoder_samples,
            feedback_dim: t.feedback_dim,
            critic_hidden: t.critic_hidden.clone(),
            critic_action_input: match t.critic_action_input {
                ActionInputKind::Raw => ActionInput::Raw,
                ActionInputKind::UnitHalves => ActionInput::UnitHalves,
            },
            rewards: RewardConfig { correct_reward: t.correct_reward, incorrect_reward: t.incorrect_reward },
            seed: self.seed,
        }
    }

    pub fn sdm_config(&self) -> SdmConfig {
        SdmConfig { hidden: self.sdm.hidden, epochs: self.sdm.epochs, learning_rate: self.sdm.learning_rate, clip_norm: Some(5.0), seed: self.seed }
    }
}
