//! Identity networks and ground-truth anchor links.

mod synthetic;

pub use synthetic::{generate_synthetic, BaseGraph, SyntheticPair, SyntheticSpec};

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Undirected, unweighted identity network.
///
/// Labels are opaque strings mapped to dense indices in insertion order.
/// Neighbor lists are kept sorted, which makes every traversal (and so every
/// seeded random walk) independent of edge insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `label`, inserting an isolated node if needed.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.adjacency.push(Vec::new());
        i
    }

    /// Inserts the undirected edge `{u, v}`. Returns `false` for a duplicate.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        if u >= self.len() || v >= self.len() {
            return Err(Error::Contract(alloc::format!(
                "edge ({u}, {v}) out of range for {} nodes",
                self.len()
            )));
        }
        if u == v {
            return Err(Error::SelfLoop { label: self.labels[u].clone(), line: 0 });
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let pos = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(pos, u);
                self.edges += 1;
                Ok(true)
            }
        }
    }

    /// Adds an edge by label; `line` is reported if the edge is a self-loop.
    pub fn add_labeled_edge(&mut self, a: &str, b: &str, line: usize) -> Result<bool> {
        if a == b {
            return Err(Error::SelfLoop { label: a.to_string(), line });
        }
        let u = self.add_node(a);
        let v = self.add_node(b);
        self.add_edge(u, v)
    }

    /// Builds a graph from label pairs; line numbers in errors are 1-based
    /// positions in the iterator.
    pub fn from_labeled_edges<'a, I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = Self::new();
        for (i, (a, b)) in edges.into_iter().enumerate() {
            g.add_labeled_edge(a, b, i + 1)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }
}

/// One ground-truth link: node `original` of the original network is the
/// same person as node `target` of the target network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Anchor {
    pub original: usize,
    pub target: usize,
}

/// One-to-one set of anchor links between two graphs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnchorSet {
    pairs: Vec<Anchor>,
    // original-side label of each pair, used for the identity-number sort
    keys: Vec<String>,
    by_original: BTreeMap<usize, usize>,
    by_target: BTreeMap<usize, usize>,
}

impl AnchorSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves label pairs against both graphs and checks one-to-one.
    pub fn from_labels<'a, I>(pairs: I, original: &Graph, target: &Graph) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut set = Self::new();
        for (a, b) in pairs {
            let o = original
                .index_of(a)
                .ok_or_else(|| Error::UnknownLabel { label: a.to_string(), side: "original" })?;
            let t = target
                .index_of(b)
                .ok_or_else(|| Error::UnknownLabel { label: b.to_string(), side: "target" })?;
            set.push(Anchor { original: o, target: t }, a, b)?;
        }
        Ok(set)
    }

    /// Builds a set from index pairs, taking sort keys from `original`.
    pub fn from_indices<I>(pairs: I, original: &Graph, target: &Graph) -> Result<Self>
    where
        I: IntoIterator<Item = Anchor>,
    {
        let mut set = Self::new();
        for p in pairs {
            if p.original >= original.len() || p.target >= target.len() {
                return Err(Error::Contract(alloc::format!("anchor {p:?} out of range")));
            }
            set.push(p, original.label(p.original), target.label(p.target))?;
        }
        Ok(set)
    }

    fn push(&mut self, p: Anchor, original_label: &str, target_label: &str) -> Result<()> {
        if self.by_original.contains_key(&p.original) {
            return Err(Error::DuplicateAnchor { label: original_label.to_string(), side: "original" });
        }
        if self.by_target.contains_key(&p.target) {
            return Err(Error::DuplicateAnchor { label: target_label.to_string(), side: "target" });
        }
        let i = self.pairs.len();
        self.by_original.insert(p.original, i);
        self.by_target.insert(p.target, i);
        self.pairs.push(p);
        self.keys.push(original_label.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Anchor] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = Anchor> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, original: usize, target: usize) -> bool {
        self.partner_of_original(original) == Some(target)
    }

    pub fn partner_of_original(&self, original: usize) -> Option<usize> {
        self.by_original.get(&original).map(|&i| self.pairs[i].target)
    }

    pub fn partner_of_target(&self, target: usize) -> Option<usize> {
        self.by_target.get(&target).map(|&i| self.pairs[i].original)
    }

    /// Sorts by original-side label, then sends the first `⌊ratio·n⌋` pairs
    /// to the training set and the rest to the test set.
    pub fn split(&self, ratio: f64) -> Result<(AnchorSet, AnchorSet)> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Config(alloc::format!("train ratio {ratio} outside (0, 1)")));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.keys[a].cmp(&self.keys[b]));
        let cut = libm::floor(ratio * self.len() as f64) as usize;
        let mut train = AnchorSet::new();
        let mut test = AnchorSet::new();
        for (rank, &i) in order.iter().enumerate() {
            let dst = if rank < cut { &mut train } else { &mut test };
            // labels were unique in `self`, so this cannot fail
            let _ = dst.push_keyed(self.pairs[i], self.keys[i].clone());
        }
        Ok((train, test))
    }

    fn push_keyed(&mut self, p: Anchor, key: String) -> Result<()> {
        let i = self.pairs.len();
        self.by_original.insert(p.original, i);
        self.by_target.insert(p.target, i);
        self.pairs.push(p);
        self.keys.push(key);
        Ok(())
    }

    pub fn original_label(&self, i: usize) -> &str {
        &self.keys[i]
    }
}

/// [`AnchorSet::split`] as a free function.
pub fn split_anchors(anchors: &AnchorSet, ratio: f64) -> Result<(AnchorSet, AnchorSet)> {
    anchors.split(ratio)
}
