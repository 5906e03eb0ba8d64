use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::RankedCandidates;
use crate::actor::rank_by_cosine;
use crate::embedding::EmbeddingMatrix;
use crate::error::{ensure, Error, Result};
use crate::graph::AnchorSet;
use crate::nn::{Activation, Dense, LstmCell, ParamStore, Sgd, SgdConfig};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    /// Matched pairs in the order they were taken.
    pub pairs: Vec<(usize, usize)>,
    /// One entry per test anchor, in `AnchorSet` order.
    pub ranks: RankedCandidates,
    pub correct: usize,
}

/// Greedy one-to-one matching: repeatedly takes the highest-cosine pair of
/// still-unmatched identities. `open_*` flags the eligible nodes.
///
/// A test original's rank is the position of its true partner among the
/// targets still unmatched when the original was taken; an original whose
/// partner was already gone, or that never got matched, is unranked.
pub fn greedy_cosine_baseline(
    u_o: &EmbeddingMatrix,
    u_t: &EmbeddingMatrix,
    open_original: &[bool],
    open_target: &[bool],
    test: &AnchorSet,
) -> Result<GreedyResult> {
    ensure!(u_o.dim() == u_t.dim(), "greedy: embedding dims differ");
    ensure!(open_original.len() == u_o.len() && open_target.len() == u_t.len(), "greedy: eligibility sizes differ");
    let os: Vec<usize> = (0..u_o.len()).filter(|&v| open_original[v]).collect();
    let ts: Vec<usize> = (0..u_t.len()).filter(|&v| open_target[v]).collect();
    let mut scored = Vec::with_capacity(os.len() * ts.len());
    for &o in &os {
        for &t in &ts {
            scored.push((u_o.cosine(o, u_t, t), o, t));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_o = vec![false; u_o.len()];
    let mut used_t = vec![false; u_t.len()];
    let mut rank_of = vec![None; u_o.len()];
    let mut pairs = Vec::new();
    let mut correct = 0;
    let limit = os.len().min(ts.len());
    for &(_, o, t) in &scored {
        if pairs.len() == limit {
            break;
        }
        if used_o[o] || used_t[t] {
            continue;
        }
        if let Some(truth) = test.partner_of_original(o) {
            if open_target[truth] && !used_t[truth] {
                let order = rank_by_cosine(u_o.norm_row(o), u_t, |v| open_target[v] && !used_t[v]);
                rank_of[o] = order.iter().position(|&v| v == truth).map(|p| p + 1);
            }
            if truth == t {
                correct += 1;
            }
        }
        used_o[o] = true;
        used_t[t] = true;
        pairs.push((o, t));
    }
    let ranks = RankedCandidates::new(test.iter().map(|a| rank_of[a.original]).collect())?;
    Ok(GreedyResult { pairs, ranks, correct })
}

/// Rank of the true partner in a uniformly shuffled list of
/// `candidate_count` candidates, per anchor.
pub fn random_baseline(anchors: usize, candidate_count: usize, seed_v: u64) -> Result<RankedCandidates> {
    if candidate_count == 0 {
        return Err(Error::Config("random baseline needs at least one candidate".into()));
    }
    let mut rng = seed::rng(seed_v, "baseline.random");
    RankedCandidates::new((0..anchors).map(|_| Some(rng.random_range(1..=candidate_count))).collect())
}

/// Originals ordered by their best cosine to any eligible target,
/// most confident first.
pub fn similarity_order(originals: &[usize], u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix, open_target: &[bool]) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = originals
        .iter()
        .map(|&o| {
            let best = (0..u_t.len())
                .filter(|&t| open_target[t])
                .map(|t| u_o.cosine(o, u_t, t))
                .fold(f64::NEG_INFINITY, f64::max);
            (o, best)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(o, _)| o).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdmConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for SdmConfig {
    fn default() -> Self {
        Self { hidden: 64, epochs: 300, learning_rate: 0.05, clip_norm: Some(5.0), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdmResult {
    /// Per test anchor, in `AnchorSet` order.
    pub ranks: RankedCandidates,
    /// Mean squared error per training epoch.
    pub losses: Vec<f64>,
    pub correct: usize,
}

struct SequenceModel {
    params: ParamStore,
    lstm: LstmCell,
    out: Dense,
}

impl SequenceModel {
    fn inputs(u_o: &EmbeddingMatrix, order: &[usize]) -> Vec<f64> {
        order.iter().flat_map(|&o| u_o.norm_row(o).iter().copied()).collect()
    }

    fn predict(&self, xs: &[f64], len: usize) -> Result<Vec<f64>> {
        let p = self.params.values();
        let trace = self.lstm.forward_sequence(p, xs, len)?;
        self.out.forward(p, &trace.hs, len)
    }

    /// One full-sequence gradient step; returns the loss before the step.
    fn train_step(&mut self, sgd: &Sgd, xs: &[f64], ys: &[f64], len: usize) -> Result<f64> {
        let p = self.params.values();
        let trace = self.lstm.forward_sequence(p, xs, len)?;
        let pred = self.out.forward(p, &trace.hs, len)?;
        let scale = 1.0 / len as f64;
        let mut loss = 0.0;
        let dpred: Vec<f64> = pred
            .iter()
            .zip(ys)
            .map(|(a, b)| {
                loss += (a - b) * (a - b);
                2.0 * (a - b) * scale
            })
            .collect();
        let mut grads = self.params.zeros_like();
        let dh = self.out.backward(p, &trace.hs, &pred, &dpred, len, &mut grads, true)?.expect("input gradient requested");
        self.lstm.backward_sequence(p, &trace, &dh, &mut grads, false)?;
        sgd.step(&mut self.params, &mut grads)?;
        Ok(loss * scale)
    }
}

/// Sequence-matching baseline: an LSTM reads original-side embeddings in
/// similarity order and regresses each one's partner embedding; test
/// candidates are ranked by cosine to the prediction.
pub fn sdm_baseline(
    u_o: &EmbeddingMatrix,
    u_t: &EmbeddingMatrix,
    train: &AnchorSet,
    test: &AnchorSet,
    open_target: &[bool],
    cfg: &SdmConfig,
) -> Result<SdmResult> {
    let d = u_o.dim();
    ensure!(u_t.dim() == d, "sdm: embedding dims differ");
    ensure!(open_target.len() == u_t.len(), "sdm: eligibility size differs");
    if train.is_empty() || cfg.hidden == 0 {
        return Err(Error::Config("sdm baseline needs training anchors and a positive hidden size".into()));
    }
    let mut params = ParamStore::new();
    let lstm = LstmCell::new(&mut params, "sdm.lstm", d, cfg.hidden);
    let out = Dense::new(&mut params, "sdm.out", cfg.hidden, d, Activation::Identity);
    let mut rng = seed::rng(cfg.seed, "baseline.sdm.init");
    lstm.init(&mut params, &mut rng);
    out.init_xavier(&mut params, &mut rng);
    let mut model = SequenceModel { params, lstm, out };
    let sgd = Sgd::new(SgdConfig { learning_rate: cfg.learning_rate, clip_norm: cfg.clip_norm })?;

    let all_targets = vec![true; u_t.len()];
    let train_originals: Vec<usize> = train.iter().map(|a| a.original).collect();
    let order = similarity_order(&train_originals, u_o, u_t, &all_targets);
    let xs = SequenceModel::inputs(u_o, &order);
    let ys: Vec<f64> = order
        .iter()
        .flat_map(|&o| u_t.norm_row(train.partner_of_original(o).expect("train original has a partner")).iter().copied())
        .collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        losses.push(model.train_step(&sgd, &xs, &ys, order.len())?);
    }

    let test_originals: Vec<usize> = test.iter().map(|a| a.original).collect();
    let mut rank_of = vec![None; u_o.len()];
    let mut correct = 0;
    if !test_originals.is_empty() {
        let order = similarity_order(&test_originals, u_o, u_t, open_target);
        let pred = model.predict(&SequenceModel::inputs(u_o, &order), order.len())?;
        for (i, &o) in order.iter().enumerate() {
            let truth = test.partner_of_original(o).expect("test original has a partner");
            let ranked = rank_by_cosine(&pred[i * d..(i + 1) * d], u_t, |v| open_target[v]);
            let pos = ranked.iter().position(|&v| v == truth).map(|p| p + 1);
            if pos == Some(1) {
                correct += 1;
            }
            rank_of[o] = pos;
        }
    }
    debug_assert!(losses.iter().all(|l| l.is_finite()));
    let ranks = RankedCandidates::new(test.iter().map(|a| rank_of[a.original]).collect())?;
    Ok(SdmResult { ranks, losses, correct })
}
