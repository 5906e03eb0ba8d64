//! Skip-gram with negative sampling over a walk corpus.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::walks::{generate_walks, WalkConfig};
use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::{AnchorSet, Graph};
use crate::nn::{linalg, sigmoid};
use crate::seed;

const NEGATIVE_POWER: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramReport {
    /// Mean negative-sampling loss per (center, context) pair, per epoch.
    pub epoch_loss: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pretrained {
    pub embeddings: EmbeddingMatrix,
    pub report: SkipGramReport,
}

/// Node2vec-style pre-training of one graph. Isolated nodes get a seeded
/// random unit vector (and a warning) so every row has a direction.
pub fn pretrain_embeddings(g: &Graph, cfg: &WalkConfig) -> Result<Pretrained> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(Error::Contract("cannot embed an empty graph".into()));
    }
    let walks = generate_walks(g, cfg);
    let (mut input, epoch_loss) = train(g.len(), &walks, cfg);
    let mut warnings = Vec::new();
    let mut rng = seed::rng(cfg.seed, "isolated");
    let d = cfg.dim;
    for v in 0..g.len() {
        let row = &mut input[v * d..(v + 1) * d];
        if g.degree(v) == 0 || linalg::norm(row) == 0.0 {
            warnings.push(format!("node `{}` is isolated; using a random unit vector", g.label(v)));
            random_unit(&mut rng, row);
        }
    }
    Ok(Pretrained {
        embeddings: EmbeddingMatrix::from_rows(d, input)?,
        report: SkipGramReport { epoch_loss, warnings },
    })
}

/// Embeds both graphs in one space: the training anchors of the two
/// networks are merged into single nodes of a union graph, walks cross
/// between networks through them, and the rows are split back out.
/// Test-side nodes are never merged.
pub fn pretrain_anchored(
    original: &Graph,
    target: &Graph,
    train_anchors: &AnchorSet,
    cfg: &WalkConfig,
) -> Result<(Pretrained, Pretrained)> {
    let mut union = Graph::new();
    let o_map: Vec<usize> = (0..original.len()).map(|v| union.add_node(&format!("o:{}", original.label(v)))).collect();
    let mut t_map = vec![usize::MAX; target.len()];
    for a in train_anchors.iter() {
        t_map[a.target] = o_map[a.original];
    }
    for (v, slot) in t_map.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = union.add_node(&format!("t:{}", target.label(v)));
        }
    }
    for (u, v) in original.edges() {
        union.add_edge(o_map[u], o_map[v])?;
    }
    for (u, v) in target.edges() {
        union.add_edge(t_map[u], t_map[v])?;
    }
    let joint = pretrain_embeddings(&union, cfg)?;
    let d = cfg.dim;
    let pick = |map: &[usize]| -> Result<EmbeddingMatrix> {
        let mut rows = Vec::with_capacity(map.len() * d);
        for &u in map {
            rows.extend_from_slice(joint.embeddings.row(u));
        }
        EmbeddingMatrix::from_rows(d, rows)
    };
    let report = joint.report;
    Ok((
        Pretrained { embeddings: pick(&o_map)?, report: report.clone() },
        Pretrained { embeddings: pick(&t_map)?, report },
    ))
}

fn random_unit<R: Rng>(rng: &mut R, row: &mut [f64]) {
    loop {
        for v in row.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let n = linalg::norm(row);
        if n > 1e-3 {
            for v in row.iter_mut() {
                *v /= n;
            }
            return;
        }
    }
}

/// Cumulative unigram^0.75 table over corpus counts.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(n: usize, walks: &[Vec<usize>]) -> Self {
        let mut counts = vec![0.0f64; n];
        for w in walks {
            for &v in w {
                counts[v] += 1.0;
            }
        }
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += libm::pow(c, NEGATIVE_POWER);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let r = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.cumulative.len() - 1)
    }
}

fn train(n: usize, walks: &[Vec<usize>], cfg: &WalkConfig) -> (Vec<f64>, Vec<f64>) {
    let d = cfg.dim;
    let mut rng = seed::rng(cfg.seed, "skipgram");
    let mut input = vec![0.0; n * d];
    for v in input.iter_mut() {
        *v = (rng.random::<f64>() - 0.5) / d as f64;
    }
    let mut output = vec![0.0; n * d];
    if walks.is_empty() {
        return (input, Vec::new());
    }
    let table = NegativeTable::new(n, walks);
    let pairs_per_epoch: usize = walks.iter().map(|w| context_pairs(w.len(), cfg.window)).sum();
    let total = (pairs_per_epoch * cfg.epochs).max(1) as f64;
    let mut seen = 0usize;
    let mut grad = vec![0.0; d];
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let mut loss = 0.0;
        let mut pairs = 0usize;
        for w in walks {
            for (i, &center) in w.iter().enumerate() {
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window + 1).min(w.len());
                for (j, &ctx) in w.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    let lr = cfg.learning_rate * (1.0 - seen as f64 / total).max(1e-4);
                    seen += 1;
                    pairs += 1;
                    grad.fill(0.0);
                    let c_row = center * d..(center + 1) * d;
                    loss += update(&input[c_row.clone()], &mut output, ctx, 1.0, lr, &mut grad, d);
                    for _ in 0..cfg.negatives {
                        let neg = table.sample(&mut rng);
                        if neg != ctx {
                            loss += update(&input[c_row.clone()], &mut output, neg, 0.0, lr, &mut grad, d);
                        }
                    }
                    linalg::axpy(1.0, &grad, &mut input[c_row]);
                }
            }
        }
        epoch_loss.push(loss / pairs.max(1) as f64);
    }
    (input, epoch_loss)
}

/// One logistic update of output vector `o` against center vector `c`;
/// accumulates the center's step into `grad` and returns the pair loss.
fn update(c: &[f64], output: &mut [f64], o: usize, label: f64, lr: f64, grad: &mut [f64], d: usize) -> f64 {
    let orow = &mut output[o * d..(o + 1) * d];
    let score = linalg::dot(c, orow);
    let p = sigmoid(score);
    let g = lr * (label - p);
    linalg::axpy(g, orow, grad);
    linalg::axpy(g, c, orow);
    let q = if label > 0.5 { p } else { 1.0 - p };
    -libm::log(q.max(1e-12))
}

fn context_pairs(len: usize, window: usize) -> usize {
    (0..len).map(|i| (i + window + 1).min(len) - i.saturating_sub(window) - 1).sum()
}
