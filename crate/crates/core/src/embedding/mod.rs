//! Identity embeddings: biased random walks, skip-gram with negative
//! sampling, and the degree-weighted network summary vector.

mod skipgram;
mod walks;

pub use skipgram::{pretrain_anchored, pretrain_embeddings, Pretrained, SkipGramReport};
pub use walks::{generate_walks, WalkConfig};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::nn::linalg;

/// One `d`-dimensional vector per node, plus the unit-normalized copy used
/// by cosine projection.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: Vec<f64>,
    norm_rows: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Row-major `n×dim` data. Zero or non-finite rows are rejected.
    pub fn from_rows(dim: usize, rows: Vec<f64>) -> Result<Self> {
        ensure!(dim > 0, "embedding dimension must be positive");
        if !rows.len().is_multiple_of(dim) {
            return Err(Error::Format(format!("{} values is not a multiple of dim {dim}", rows.len())));
        }
        let mut norm_rows = rows.clone();
        for (i, r) in norm_rows.chunks_exact_mut(dim).enumerate() {
            if !linalg::all_finite(r) {
                return Err(Error::Format(format!("row {i} has non-finite entries")));
            }
            let n = linalg::norm(r);
            if n == 0.0 {
                return Err(Error::Format(format!("row {i} is zero")));
            }
            for v in r.iter_mut() {
                *v /= n;
            }
        }
        Ok(Self { dim, rows, norm_rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn norm_row(&self, i: usize) -> &[f64] {
        &self.norm_rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn norm_rows(&self) -> &[f64] {
        &self.norm_rows
    }

    pub fn cosine(&self, i: usize, other: &EmbeddingMatrix, j: usize) -> f64 {
        linalg::dot(self.norm_row(i), other.norm_row(j))
    }
}

/// Weight of a node of the given degree in the network embedding.
pub fn degree_weight(zeta: f64, degree: usize) -> f64 {
    zeta / (zeta + degree as f64)
}

/// `e = Σ_k ζ/(ζ + deg(v_k)) · u_k`
pub fn network_embedding(u: &EmbeddingMatrix, g: &Graph, zeta: f64) -> Result<Vec<f64>> {
    ensure!(u.len() == g.len(), "embedding has {} rows for a graph of {} nodes", u.len(), g.len());
    weighted_embedding(u, &g.degrees(), zeta)
}

/// [`network_embedding`] over an explicit degree sequence.
pub fn weighted_embedding(u: &EmbeddingMatrix, degrees: &[usize], zeta: f64) -> Result<Vec<f64>> {
    ensure!(u.len() == degrees.len(), "embedding has {} rows for {} degrees", u.len(), degrees.len());
    if !(zeta > 0.0) {
        return Err(Error::Config(format!("zeta {zeta} must be > 0")));
    }
    let mut e = vec![0.0; u.dim()];
    for (k, &d) in degrees.iter().enumerate() {
        linalg::axpy(degree_weight(zeta, d), u.row(k), &mut e);
    }
    Ok(e)
}

/// Concatenated summary of both networks, `concat(e_O, e_T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEmbedding {
    pub original: Vec<f64>,
    pub target: Vec<f64>,
}

impl NetworkEmbedding {
    pub fn new(original: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        ensure!(original.len() == target.len(), "network embedding halves differ: {} vs {}", original.len(), target.len());
        Ok(Self { original, target })
    }

    pub fn compute(
        u_o: &EmbeddingMatrix,
        g_o: &Graph,
        u_t: &EmbeddingMatrix,
        g_t: &Graph,
        zeta: f64,
    ) -> Result<Self> {
        Self::new(network_embedding(u_o, g_o, zeta)?, network_embedding(u_t, g_t, zeta)?)
    }

    pub fn dim(&self) -> usize {
        self.original.len()
    }

    pub fn s_net(&self) -> Vec<f64> {
        let mut s = self.original.clone();
        s.extend_from_slice(&self.target);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_isolated_node_weight_is_one() {
        let mut g = Graph::new();
        g.add_node("a");
        let u = EmbeddingMatrix::from_rows(2, vec![0.3, -0.4]).unwrap();
        assert_eq!(network_embedding(&u, &g, 1e-3).unwrap(), vec![0.3, -0.4]);
    }

    #[test]
    fn two_node_weighted_sum() {
        let u = EmbeddingMatrix::from_rows(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let e = weighted_embedding(&u, &[1, 3], 0.001).unwrap();
        assert!((e[0] - 0.001 / 1.001).abs() < 1e-15 && (e[1] - 0.001 / 3.001).abs() < 1e-15);
        assert!((e[0] - 0.000999).abs() < 1e-6 && (e[1] - 0.000333).abs() < 1e-6);
    }

    #[test]
    fn weights_bounded_and_monotone() {
        let mut prev = 1.0 + 1e-12;
        for d in 0..50 {
            let a = degree_weight(1e-3, d);
            assert!(a > 0.0 && a <= 1.0 && a <= prev);
            prev = a;
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut g = Graph::new();
        g.add_node("a");
        g.add_node("b");
        let u = EmbeddingMatrix::from_rows(2, vec![1.0, 0.0]).unwrap();
        assert!(network_embedding(&u, &g, 1e-3).is_err());
        assert!(NetworkEmbedding::new(vec![0.0; 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn normalized_rows_are_unit_and_idempotent() {
        let u = EmbeddingMatrix::from_rows(3, vec![3.0, 4.0, 0.0, -1.0, 2.0, 2.0]).unwrap();
        for i in 0..2 {
            assert!((linalg::norm(u.norm_row(i)) - 1.0).abs() < 1e-12);
        }
        let again = EmbeddingMatrix::from_rows(3, u.norm_rows().to_vec()).unwrap();
        for (a, b) in again.norm_rows().iter().zip(u.norm_rows()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(EmbeddingMatrix::from_rows(2, vec![0.0, 0.0]).is_err());
    }
}
