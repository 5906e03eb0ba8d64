//! Seeded benchmark pairs: one latent network, two perturbed copies, and a
//! relabeled target side so node indices carry no alignment signal.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Anchor, AnchorSet, Graph};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseGraph {
    /// Each unordered pair is an edge with probability `edge_prob`.
    ErdosRenyi { edge_prob: f64 },
    /// Barabási–Albert growth, `edges_per_node` attachments per new node.
    PreferentialAttachment { edges_per_node: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub base: BaseGraph,
    /// Target fraction of base edges present in both copies.
    pub edge_overlap: f64,
    /// Fraction of latent nodes that receive a ground-truth pair.
    pub anchor_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            node_count: 100,
            base: BaseGraph::ErdosRenyi { edge_prob: 0.1 },
            edge_overlap: 0.95,
            anchor_fraction: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::Config(format!("node_count {} < 2", self.node_count)));
        }
        if !(0.0..=1.0).contains(&self.edge_overlap) {
            return Err(Error::Config(format!("edge_overlap {} outside [0, 1]", self.edge_overlap)));
        }
        if !(0.0..=1.0).contains(&self.anchor_fraction) {
            return Err(Error::Config(format!("anchor_fraction {} outside [0, 1]", self.anchor_fraction)));
        }
        match self.base {
            BaseGraph::ErdosRenyi { edge_prob } if !(0.0..=1.0).contains(&edge_prob) => {
                Err(Error::Config(format!("edge_prob {edge_prob} outside [0, 1]")))
            }
            BaseGraph::PreferentialAttachment { edges_per_node: 0 } => {
                Err(Error::Config("edges_per_node must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Probability that a base edge survives in one copy.
    pub fn keep_prob(&self) -> f64 {
        self.edge_overlap + (1.0 - self.edge_overlap) / 2.0
    }

    fn expected_degree(&self) -> f64 {
        let base = match self.base {
            BaseGraph::ErdosRenyi { edge_prob } => edge_prob * (self.node_count - 1) as f64,
            BaseGraph::PreferentialAttachment { edges_per_node } => 2.0 * edges_per_node as f64,
        };
        base * self.keep_prob()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub original: Graph,
    pub target: Graph,
    pub anchors: AnchorSet,
    /// Non-fatal diagnostics (e.g. a very sparse configuration).
    pub warnings: Vec<String>,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticPair> {
    spec.validate()?;
    let n = spec.node_count;
    let mut warnings = Vec::new();
    if spec.expected_degree() < 1.0 {
        warnings.push(format!(
            "expected degree {:.3} < 1: copies will be mostly disconnected",
            spec.expected_degree()
        ));
    }

    let mut rng = seed::rng(spec.seed, "synthetic");
    let base = base_edges(spec, &mut rng);

    // target index j holds latent node perm[j]
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut target_of = alloc::vec![0usize; n];
    for (j, &latent) in perm.iter().enumerate() {
        target_of[latent] = j;
    }

    let width = digits(n);
    let mut original = Graph::new();
    let mut target = Graph::new();
    for i in 0..n {
        original.add_node(&format!("o{i:0width$}"));
    }
    for j in 0..n {
        target.add_node(&format!("t{j:0width$}"));
    }

    let keep = spec.keep_prob();
    for &(u, v) in &base {
        if keep >= 1.0 || rng.random::<f64>() < keep {
            original.add_edge(u, v)?;
        }
        if keep >= 1.0 || rng.random::<f64>() < keep {
            target.add_edge(target_of[u], target_of[v])?;
        }
    }

    let count = libm::round(spec.anchor_fraction * n as f64) as usize;
    let mut chosen: Vec<usize> = (0..n).collect();
    chosen.shuffle(&mut rng);
    chosen.truncate(count);
    chosen.sort_unstable();
    let anchors = AnchorSet::from_indices(
        chosen.into_iter().map(|i| Anchor { original: i, target: target_of[i] }),
        &original,
        &target,
    )?;

    Ok(SyntheticPair { original, target, anchors, warnings })
}

fn base_edges(spec: &SyntheticSpec, rng: &mut seed::Rng) -> Vec<(usize, usize)> {
    let n = spec.node_count;
    let mut edges = Vec::new();
    match spec.base {
        BaseGraph::ErdosRenyi { edge_prob } => {
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random::<f64>() < edge_prob {
                        edges.push((u, v));
                    }
                }
            }
        }
        BaseGraph::PreferentialAttachment { edges_per_node } => {
            let m = edges_per_node.min(n - 1);
            // endpoint multiset: sampling from it is degree-proportional
            let mut ends: Vec<usize> = Vec::new();
            for u in 0..=m {
                for v in (u + 1)..=m {
                    edges.push((u, v));
                    ends.push(u);
                    ends.push(v);
                }
            }
            for new in (m + 1)..n {
                let mut picked: Vec<usize> = Vec::with_capacity(m);
                while picked.len() < m {
                    let t = ends[rng.random_range(0..ends.len())];
                    if !picked.contains(&t) {
                        picked.push(t);
                    }
                }
                picked.sort_unstable();
                for t in picked {
                    edges.push((t, new));
                    ends.push(t);
                    ends.push(new);
                }
            }
        }
    }
    edges
}

fn digits(mut n: usize) -> usize {
    let mut d = 1;
    while n >= 10 {
        n /= 10;
        d += 1;
    }
    d
}
