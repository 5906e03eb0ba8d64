//! Ranking metrics and reference baselines.

mod baselines;

pub use baselines::{greedy_cosine_baseline, random_baseline, sdm_baseline, similarity_order, GreedyResult, SdmConfig, SdmResult};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};

/// Rank (1-based) of each test anchor's true partner, `None` when the
/// method never ranked it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedCandidates {
    pub ranks: Vec<Option<usize>>,
}

impl RankedCandidates {
    pub fn new(ranks: Vec<Option<usize>>) -> Result<Self> {
        ensure!(ranks.iter().flatten().all(|&r| r >= 1), "ranks are 1-based");
        Ok(Self { ranks })
    }

    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        Self::new(ranks.iter().map(|&r| Some(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.ranks.iter().flatten().copied().max()
    }
}

pub fn precision_at_k(ranks: &RankedCandidates, k: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::UndefinedMetric("precision@k over zero anchors"));
    }
    ensure!(k >= 1, "precision@k needs k >= 1");
    let hits = ranks.ranks.iter().flatten().filter(|&&r| r <= k).count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Mean of `1/rank`; unranked anchors contribute zero.
pub fn mean_average_precision(ranks: &RankedCandidates) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::UndefinedMetric("MAP over zero anchors"));
    }
    let sum: f64 = ranks.ranks.iter().flatten().map(|&r| 1.0 / r as f64).sum();
    Ok(sum / ranks.len() as f64)
}

pub fn recall(matched_correct: usize, total_truth: usize) -> Result<f64> {
    if total_truth == 0 {
        return Err(Error::UndefinedMetric("recall over empty ground truth"));
    }
    ensure!(matched_correct <= total_truth, "recall: {matched_correct} matches exceed {total_truth} true pairs");
    Ok(matched_correct as f64 / total_truth as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: String,
    pub seed: u64,
    pub n: usize,
    /// `(k, P@k)` in the order requested.
    pub p_at: Vec<(usize, f64)>,
    pub map: f64,
    pub recall: f64,
}

impl MetricsReport {
    pub fn compute(method: impl Into<String>, seed: u64, ranks: &RankedCandidates, ks: &[usize], matched_correct: usize) -> Result<Self> {
        let p_at = ks.iter().map(|&k| precision_at_k(ranks, k).map(|p| (k, p))).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            method: method.into(),
            seed,
            n: ranks.len(),
            p_at,
            map: mean_average_precision(ranks)?,
            recall: recall(matched_correct, ranks.len())?,
        })
    }

    pub fn p(&self, k: usize) -> Option<f64> {
        self.p_at.iter().find(|(kk, _)| *kk == k).map(|(_, p)| *p)
    }
}
