//! Second-order (node2vec-style) biased random walks.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial skip-gram step size, decayed linearly over training.
    pub learning_rate: f64,
    /// Return parameter: weight `1/p` on stepping back to the previous node.
    pub p: f64,
    /// In-out parameter: weight `1/q` on moving away from the previous node.
    pub q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            dim: crate::DEFAULT_EMBEDDING_DIM,
            walks_per_node: 10,
            walk_length: 40,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            p: 1.0,
            q: 1.0,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dim", self.dim),
            ("walks_per_node", self.walks_per_node),
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        for (name, v) in [("learning_rate", self.learning_rate), ("p", self.p), ("q", self.q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Walk corpus. Each walk draws from its own stream derived from
/// `(seed, round, start)`, so the corpus does not depend on how walks are
/// scheduled; start order within a round is a seeded shuffle.
pub fn generate_walks(g: &Graph, cfg: &WalkConfig) -> Vec<Vec<usize>> {
    let base = seed::derive(cfg.seed, "walks");
    let mut order: Vec<usize> = (0..g.len()).collect();
    let mut walks = Vec::with_capacity(g.len() * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        let mut shuffler = seed::Rng::seed_from_u64(seed::splitmix(base ^ (round as u64).wrapping_mul(0x9e37)));
        order.sort_unstable();
        order.shuffle(&mut shuffler);
        for &start in &order {
            if g.degree(start) == 0 {
                continue;
            }
            let stream = base ^ seed::splitmix(((round as u64) << 32) | start as u64);
            let mut rng = seed::Rng::seed_from_u64(stream);
            walks.push(walk(g, start, cfg, &mut rng));
        }
    }
    walks
}

fn walk<R: Rng>(g: &Graph, start: usize, cfg: &WalkConfig, rng: &mut R) -> Vec<usize> {
    let mut path = Vec::with_capacity(cfg.walk_length);
    path.push(start);
    let uniform = cfg.p == 1.0 && cfg.q == 1.0;
    let mut weights: Vec<f64> = Vec::new();
    while path.len() < cfg.walk_length {
        let cur = *path.last().unwrap();
        let ns = g.neighbors(cur);
        if ns.is_empty() {
            break;
        }
        let next = if path.len() == 1 || uniform {
            ns[rng.random_range(0..ns.len())]
        } else {
            let prev = path[path.len() - 2];
            weights.clear();
            weights.extend(ns.iter().map(|&x| {
                if x == prev {
                    1.0 / cfg.p
                } else if g.has_edge(x, prev) {
                    1.0
                } else {
                    1.0 / cfg.q
                }
            }));
            let total: f64 = weights.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut pick = ns[ns.len() - 1];
            for (&x, &w) in ns.iter().zip(&weights) {
                if r < w {
                    pick = x;
                    break;
                }
                r -= w;
            }
            pick
        };
        path.push(next);
    }
    path
}
