//! Policy network: encodes the network summary and the matched-pair history
//! into a state vector, decodes it into a continuous proto-action, and
//! projects that onto a valid identity pair by cosine similarity.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::EmbeddingMatrix;
use crate::error::{ensure, Error, Result};
use crate::nn::{linalg, Activation, AttentionScorer, Dense, LstmCell, LstmTrace, ParamStore};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActorConfig {
    /// Identity embedding dimension `d`.
    pub embedding_dim: usize,
    /// Length of the raw feedback vector (steps per episode).
    pub feedback_len: usize,
    /// Width of the encoded feedback vector.
    pub feedback_dim: usize,
    /// LSTM hidden size; must equal `2d` so the pooled history adds onto
    /// the network summary.
    pub hidden: usize,
}

impl ActorConfig {
    pub fn new(embedding_dim: usize, feedback_len: usize) -> Self {
        Self {
            embedding_dim,
            feedback_len,
            feedback_dim: crate::DEFAULT_FEEDBACK_DIM,
            hidden: 2 * embedding_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        2 * self.embedding_dim
    }

    /// `|x_i| = |G| + 2d`
    pub fn history_input_dim(&self) -> usize {
        self.feedback_dim + 2 * self.embedding_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.feedback_len == 0 || self.feedback_dim == 0 {
            return Err(Error::Config("actor dimensions must be positive".into()));
        }
        if self.hidden != self.state_dim() {
            return Err(Error::Config(alloc::format!(
                "LSTM hidden size {} must equal 2d = {}",
                self.hidden,
                self.state_dim()
            )));
        }
        Ok(())
    }
}

/// One matched pair of an episode's history with its immediate reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub original: usize,
    pub target: usize,
    /// Immediate reward `r_tm` (±1), written into the feedback vector.
    pub reward: f64,
    /// 1-based step at which the pair was proposed.
    pub step: usize,
}

/// `s = s_pair + s_net`, with both summands kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEmbedding {
    pub s: Vec<f64>,
    pub s_pair: Vec<f64>,
    pub s_net: Vec<f64>,
}

/// Continuous decoder output of length `2d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtoAction(pub Vec<f64>);

impl ProtoAction {
    pub fn dim(&self) -> usize {
        self.0.len() / 2
    }

    pub fn original_half(&self) -> &[f64] {
        &self.0[..self.dim()]
    }

    pub fn target_half(&self) -> &[f64] {
        &self.0[self.dim()..]
    }
}

/// A valid identity pair with its embedding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub original: usize,
    pub target: usize,
    /// `concat(u_O, u_T)`, the critic's view of the action.
    pub embedding: Vec<f64>,
}

/// Selectable identities for the projection step.
#[derive(Debug, Clone, Copy)]
pub struct Availability<'a> {
    /// `true` marks an original identity as no longer selectable.
    pub masked_original: &'a [bool],
    pub masked_target: &'a [bool],
    /// Pairs already proposed this episode; never proposed again.
    pub proposed: Option<&'a BTreeSet<(usize, usize)>>,
}

impl<'a> Availability<'a> {
    pub fn open(masked_original: &'a [bool], masked_target: &'a [bool]) -> Self {
        Self { masked_original, masked_target, proposed: None }
    }

    fn tried(&self, o: usize, t: usize) -> bool {
        self.proposed.is_some_and(|p| p.contains(&(o, t)))
    }
}

/// Argmax of `aᵀ·û_v` over unmasked rows `v`, lowest index on ties.
pub fn cosine_argmax<F: Fn(usize) -> bool>(a: &[f64], u: &EmbeddingMatrix, allowed: F) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for v in 0..u.len() {
        if !allowed(v) {
            continue;
        }
        let score = linalg::dot(a, u.norm_row(v));
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((v, score));
        }
    }
    best.map(|(v, _)| v)
}

/// Candidate indices sorted by descending `aᵀ·û_v` (ties by index).
pub fn rank_by_cosine<F: Fn(usize) -> bool>(a: &[f64], u: &EmbeddingMatrix, allowed: F) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = (0..u.len()).filter(|&v| allowed(v)).map(|v| (v, linalg::dot(a, u.norm_row(v)))).collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    scored.into_iter().map(|(v, _)| v).collect()
}

/// Maps a proto-action onto the most cosine-similar selectable identities.
///
/// The original side is chosen first; the target side is then the best
/// unmasked identity not already proposed with that original. If every
/// target has been tried with the best original, the next-best original is
/// used.
pub fn project_action(proto: &ProtoAction, u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix, avail: &Availability<'_>) -> Result<Action> {
    let d = u_o.dim();
    ensure!(u_t.dim() == d && proto.0.len() == 2 * d, "projection: proto of {} values for d = {}", proto.0.len(), d);
    ensure!(
        avail.masked_original.len() == u_o.len() && avail.masked_target.len() == u_t.len(),
        "projection: mask sizes do not match embeddings"
    );
    let a_o = proto.original_half();
    let a_t = proto.target_half();
    let first = cosine_argmax(a_o, u_o, |v| !avail.masked_original[v]).ok_or(Error::Exhausted("original"))?;
    let pick_target = |o: usize| cosine_argmax(a_t, u_t, |v| !avail.masked_target[v] && !avail.tried(o, v));
    let (o, t) = match pick_target(first) {
        Some(t) => (first, t),
        None => {
            if !avail.masked_target.iter().any(|m| !m) {
                return Err(Error::Exhausted("target"));
            }
            let order = rank_by_cosine(a_o, u_o, |v| !avail.masked_original[v]);
            order
                .into_iter()
                .skip(1)
                .find_map(|o| pick_target(o).map(|t| (o, t)))
                .ok_or(Error::Exhausted("untried pair"))?
        }
    };
    let mut embedding = u_o.row(o).to_vec();
    embedding.extend_from_slice(u_t.row(t));
    Ok(Action { original: o, target: t, embedding })
}

/// Forward record of a history encoding, for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryTrace {
    pub len: usize,
    /// Raw feedback vectors `g_i`, `len×T_max`.
    pub feedback_raw: Vec<f64>,
    /// Encoded feedback `ḡ_i`, `len×|G|`.
    pub feedback_enc: Vec<f64>,
    pub lstm: LstmTrace,
    pub gamma: Vec<f64>,
    pub s_pair: Vec<f64>,
}

/// Incremental encoder state for an episode in progress.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    h: Vec<f64>,
    c: Vec<f64>,
    /// All hidden states so far, `len×H`.
    hs: Vec<f64>,
    len: usize,
}

impl EncoderState {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    cfg: ActorConfig,
    params: ParamStore,
    feedback: Dense,
    lstm: LstmCell,
    attention: AttentionScorer,
    decoder: Dense,
}

impl Actor {
    /// Zero-initialized parameters.
    pub fn zeroed(cfg: ActorConfig) -> Result<Self> {
        cfg.validate()?;
        let mut params = ParamStore::new();
        let feedback = Dense::new(&mut params, "actor.feedback", cfg.feedback_len, cfg.feedback_dim, Activation::Tanh);
        let lstm = LstmCell::new(&mut params, "actor.lstm", cfg.history_input_dim(), cfg.hidden);
        let attention = AttentionScorer::new(&mut params, "actor.attention", cfg.hidden);
        let decoder = Dense::new(&mut params, "actor.decoder", cfg.state_dim(), cfg.state_dim(), Activation::Tanh);
        Ok(Self { cfg, params, feedback, lstm, attention, decoder })
    }

    pub fn new<R: Rng + ?Sized>(cfg: ActorConfig, rng: &mut R) -> Result<Self> {
        let mut a = Self::zeroed(cfg)?;
        a.feedback.init_xavier(&mut a.params, rng);
        a.lstm.init(&mut a.params, rng);
        a.attention.init(&mut a.params, rng);
        a.decoder.init_xavier(&mut a.params, rng);
        Ok(a)
    }

    pub fn config(&self) -> ActorConfig {
        self.cfg
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn decoder(&self) -> &Dense {
        &self.decoder
    }

    pub fn feedback_layer(&self) -> &Dense {
        &self.feedback
    }

    /// Raw feedback vector: `reward` at position `step − 1` (saturating at
    /// the last slot), zeros elsewhere.
    pub fn feedback_vector(&self, step: usize, reward: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.cfg.feedback_len];
        let pos = step.saturating_sub(1).min(self.cfg.feedback_len - 1);
        g[pos] = reward;
        g
    }

    /// `ḡ = tanh(W_G·g + b_G)`
    pub fn encode_feedback(&self, g: &[f64]) -> Result<Vec<f64>> {
        ensure!(g.len() == self.cfg.feedback_len, "feedback length {} != {}", g.len(), self.cfg.feedback_len);
        self.feedback.forward(self.params.values(), g, 1)
    }

    /// `x_i = concat(u_O, u_T, ḡ_i)`
    pub fn history_input(&self, rec: &HistoryRecord, u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix) -> Result<Vec<f64>> {
        let g = self.encode_feedback(&self.feedback_vector(rec.step, rec.reward))?;
        let mut x = Vec::with_capacity(self.cfg.history_input_dim());
        x.extend_from_slice(u_o.row(rec.original));
        x.extend_from_slice(u_t.row(rec.target));
        x.extend_from_slice(&g);
        Ok(x)
    }

    fn check_embeddings(&self, u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix) -> Result<()> {
        ensure!(
            u_o.dim() == self.cfg.embedding_dim && u_t.dim() == self.cfg.embedding_dim,
            "embedding dims {}/{} != actor d = {}",
            u_o.dim(),
            u_t.dim(),
            self.cfg.embedding_dim
        );
        Ok(())
    }

    /// Attention-pooled LSTM encoding of the history; zero when empty.
    pub fn encode_history(&self, records: &[HistoryRecord], u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix) -> Result<Vec<f64>> {
        Ok(self.trace_history(records, u_o, u_t)?.s_pair)
    }

    pub fn trace_history(&self, records: &[HistoryRecord], u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix) -> Result<HistoryTrace> {
        self.check_embeddings(u_o, u_t)?;
        let len = records.len();
        let p = self.params.values();
        let mut feedback_raw = Vec::with_capacity(len * self.cfg.feedback_len);
        for r in records {
            feedback_raw.extend(self.feedback_vector(r.step, r.reward));
        }
        if len == 0 {
            return Ok(HistoryTrace {
                len,
                feedback_raw,
                feedback_enc: Vec::new(),
                lstm: LstmTrace::default(),
                gamma: Vec::new(),
                s_pair: vec![0.0; self.cfg.hidden],
            });
        }
        let feedback_enc = self.feedback.forward(p, &feedback_raw, len)?;
        let mut xs = Vec::with_capacity(len * self.cfg.history_input_dim());
        for (i, r) in records.iter().enumerate() {
            xs.extend_from_slice(u_o.row(r.original));
            xs.extend_from_slice(u_t.row(r.target));
            xs.extend_from_slice(&feedback_enc[i * self.cfg.feedback_dim..(i + 1) * self.cfg.feedback_dim]);
        }
        let lstm = self.lstm.forward_sequence(p, &xs, len)?;
        let (s_pair, gamma) = self.attention.pool(p, &lstm.hs, len)?;
        Ok(HistoryTrace { len, feedback_raw, feedback_enc, lstm, gamma, s_pair })
    }

    /// Backpropagates `d s_pair` through attention, LSTM and the feedback
    /// layer, accumulating into `grads`.
    pub fn history_backward(&self, trace: &HistoryTrace, d_s_pair: &[f64], grads: &mut [f64]) -> Result<()> {
        if trace.len == 0 {
            return Ok(());
        }
        let p = self.params.values();
        let dh = self.attention.backward(p, &trace.lstm.hs, &trace.gamma, d_s_pair, grads);
        let dx = self.lstm.backward_sequence(p, &trace.lstm, &dh, grads, true)?.expect("input gradient requested");
        let in_dim = self.cfg.history_input_dim();
        let off = 2 * self.cfg.embedding_dim;
        let d_enc: Vec<f64> = dx.chunks_exact(in_dim).flat_map(|row| row[off..].iter().copied()).collect();
        self.feedback.backward(p, &trace.feedback_raw, &trace.feedback_enc, &d_enc, trace.len, grads, false)?;
        Ok(())
    }

    pub fn start_episode(&self) -> EncoderState {
        EncoderState { h: vec![0.0; self.cfg.hidden], c: vec![0.0; self.cfg.hidden], hs: Vec::new(), len: 0 }
    }

    /// Advances the incremental encoder by one history record.
    pub fn push_record(&self, state: &mut EncoderState, rec: &HistoryRecord, u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix) -> Result<()> {
        self.check_embeddings(u_o, u_t)?;
        let x = self.history_input(rec, u_o, u_t)?;
        let (h, c) = self.lstm.step(self.params.values(), &x, &state.h, &state.c)?;
        state.hs.extend_from_slice(&h);
        state.h = h;
        state.c = c;
        state.len += 1;
        Ok(())
    }

    /// `s_pair` of an in-progress episode.
    pub fn pooled(&self, state: &EncoderState) -> Result<Vec<f64>> {
        if state.len == 0 {
            return Ok(vec![0.0; self.cfg.hidden]);
        }
        Ok(self.attention.pool(self.params.values(), &state.hs, state.len)?.0)
    }

    /// `s_t = s_pair + s_net`. With an empty history this is `s_net` exactly.
    pub fn encode_state(&self, s_net: &[f64], state: &EncoderState) -> Result<StateEmbedding> {
        combine_state(s_net, self.pooled(state)?)
    }

    /// Noise-free decoder output for a batch of states (`batch×2d`).
    pub fn decode_batch(&self, states: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.decoder.forward(self.params.values(), states, batch)
    }

    /// `tanh(W_dec·s + b_dec) + ε`, `ε ~ N(0, noise_scale²)` per entry.
    pub fn decode_action<R: Rng + ?Sized>(&self, s: &[f64], noise_scale: f64, rng: &mut R) -> Result<ProtoAction> {
        ensure!(s.len() == self.cfg.state_dim(), "decoder input {} != {}", s.len(), self.cfg.state_dim());
        let mut out = self.decode_batch(s, 1)?;
        if noise_scale > 0.0 {
            for v in &mut out {
                let z: f64 = StandardNormal.sample(rng);
                *v += noise_scale * z;
            }
        }
        Ok(ProtoAction(out))
    }

    /// Deterministic action, convenient for evaluation.
    pub fn act(&self, s: &[f64]) -> Result<ProtoAction> {
        self.decode_action(s, 0.0, &mut seed::rng(0, "unused"))
    }
}

pub fn combine_state(s_net: &[f64], s_pair: Vec<f64>) -> Result<StateEmbedding> {
    ensure!(s_net.len() == s_pair.len(), "state halves differ: s_net {} vs s_pair {}", s_net.len(), s_pair.len());
    let s = s_net.iter().zip(&s_pair).map(|(a, b)| a + b).collect();
    Ok(StateEmbedding { s, s_pair, s_net: s_net.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;

    fn small_cfg() -> ActorConfig {
        ActorConfig { embedding_dim: 3, feedback_len: 4, feedback_dim: 2, hidden: 6 }
    }

    fn emb(n: usize, d: usize, seed_v: u64) -> EmbeddingMatrix {
        let mut rng = seed::rng(seed_v, "emb");
        EmbeddingMatrix::from_rows(d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn default_dimensions() {
        let cfg = ActorConfig::new(128, 60);
        assert_eq!(cfg.history_input_dim(), 384);
        assert_eq!(cfg.hidden, 256);
        assert!(ActorConfig { hidden: 100, ..cfg }.validate().is_err());
    }

    #[test]
    fn zero_feedback_layer_gives_zero() {
        let a = Actor::zeroed(small_cfg()).unwrap();
        assert_eq!(a.encode_feedback(&[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        assert!(a.encode_feedback(&[0.0; 3]).is_err());
    }

    #[test]
    fn feedback_sign_is_encoded() {
        let a = Actor::new(ActorConfig::new(128, 10), &mut seed::rng(1, "a")).unwrap();
        let pos = a.encode_feedback(&a.feedback_vector(3, 1.0)).unwrap();
        let neg = a.encode_feedback(&a.feedback_vector(3, -1.0)).unwrap();
        assert_eq!(pos.len(), 128);
        assert_ne!(pos, neg);
        assert_eq!(a.feedback_vector(3, -1.0), vec![0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_history_state_is_network_embedding() {
        let a = Actor::new(small_cfg(), &mut seed::rng(2, "a")).unwrap();
        let s_net = vec![0.1, -0.2, 0.3, 0.4, 0.5, -0.6];
        let st = a.encode_state(&s_net, &a.start_episode()).unwrap();
        assert_eq!(st.s, s_net);
        assert_eq!(st.s_pair, vec![0.0; 6]);
    }

    #[test]
    fn single_record_pools_to_its_hidden_state() {
        let a = Actor::new(small_cfg(), &mut seed::rng(3, "a")).unwrap();
        let (uo, ut) = (emb(4, 3, 1), emb(4, 3, 2));
        let rec = HistoryRecord { original: 1, target: 2, reward: -1.0, step: 1 };
        let trace = a.trace_history(&[rec], &uo, &ut).unwrap();
        assert_eq!(trace.gamma, vec![1.0]);
        for (p, h) in trace.s_pair.iter().zip(trace.lstm.h(0, 6)) {
            assert!((p - h).abs() < 1e-15);
        }
    }

    #[test]
    fn incremental_encoder_matches_full_trace() {
        let a = Actor::new(small_cfg(), &mut seed::rng(4, "a")).unwrap();
        let (uo, ut) = (emb(5, 3, 3), emb(5, 3, 4));
        let recs: Vec<_> = (0..4).map(|i| HistoryRecord { original: i, target: 4 - i, reward: if i % 2 == 0 { 1.0 } else { -1.0 }, step: i + 1 }).collect();
        let mut st = a.start_episode();
        for r in &recs {
            a.push_record(&mut st, r, &uo, &ut).unwrap();
        }
        let full = a.encode_history(&recs, &uo, &ut).unwrap();
        let inc = a.pooled(&st).unwrap();
        for (x, y) in full.iter().zip(&inc) {
            assert!((x - y).abs() < 1e-12);
        }
        // convex hull per coordinate
        let trace = a.trace_history(&recs, &uo, &ut).unwrap();
        for k in 0..6 {
            let col: Vec<f64> = (0..4).map(|i| trace.lstm.h(i, 6)[k]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(full[k] >= lo - 1e-12 && full[k] <= hi + 1e-12);
        }
    }

    #[test]
    fn history_gradient_matches_finite_differences() {
        let a = Actor::new(small_cfg(), &mut seed::rng(5, "a")).unwrap();
        let (uo, ut) = (emb(4, 3, 5), emb(4, 3, 6));
        let recs: Vec<_> = (0..3).map(|i| HistoryRecord { original: i, target: (i + 1) % 4, reward: if i == 1 { 1.0 } else { -1.0 }, step: i + 1 }).collect();
        let proj = [0.3, -0.5, 0.8, 0.1, -0.9, 0.4];
        let trace = a.trace_history(&recs, &uo, &ut).unwrap();
        let mut grads = a.params.zeros_like();
        a.history_backward(&trace, &proj, &mut grads).unwrap();
        let f = |p: &[f64]| {
            let mut b = a.clone();
            b.params.values_mut().copy_from_slice(p);
            linalg::dot(&b.encode_history(&recs, &uo, &ut).unwrap(), &proj)
        };
        assert!(grad_check(f, a.params.values(), &grads, 1e-5) < 1e-4);
    }

    #[test]
    fn decoder_determinism_and_zero_case() {
        let a = Actor::new(ActorConfig::new(128, 8), &mut seed::rng(6, "a")).unwrap();
        let s: Vec<f64> = (0..256).map(|i| (i as f64 * 0.01).sin()).collect();
        let p1 = a.act(&s).unwrap();
        assert_eq!(p1, a.act(&s).unwrap());
        assert_eq!(p1.0.len(), 256);
        assert_eq!(p1.original_half().len(), 128);
        let z = Actor::zeroed(ActorConfig::new(128, 8)).unwrap();
        assert!(z.act(&s).unwrap().0.iter().all(|&v| v == 0.0));
        let noisy = a.decode_action(&s, 0.2, &mut seed::rng(1, "n")).unwrap();
        assert_ne!(noisy, p1);
    }

    fn two_rows(rows: &[f64]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(2, rows.to_vec()).unwrap()
    }

    #[test]
    fn projection_worked_example() {
        let u_o = two_rows(&[1.0, 0.0, 0.0, 1.0]);
        let u_t = two_rows(&[1.0, 0.0, 0.6, 0.8]);
        let proto = ProtoAction(vec![0.0, 1.0, 0.9, 0.1]);
        let none = [false, false];
        let act = project_action(&proto, &u_o, &u_t, &Availability::open(&none, &none)).unwrap();
        assert_eq!((act.original, act.target), (1, 0));
        assert_eq!(act.embedding, vec![0.0, 1.0, 1.0, 0.0]);
        let masked = [true, false];
        let act = project_action(&proto, &u_o, &u_t, &Availability::open(&none, &masked)).unwrap();
        assert_eq!(act.target, 1);
        let all = [true, true];
        assert_eq!(project_action(&proto, &u_o, &u_t, &Availability::open(&all, &none)), Err(Error::Exhausted("original")));
    }

    #[test]
    fn projection_skips_proposed_pairs() {
        let u_o = two_rows(&[1.0, 0.0, 0.0, 1.0]);
        let u_t = two_rows(&[1.0, 0.0, 0.0, 1.0]);
        let proto = ProtoAction(vec![1.0, 0.1, 1.0, 0.1]);
        let none = [false, false];
        let mut tried = BTreeSet::new();
        tried.insert((0, 0));
        let av = Availability { masked_original: &none, masked_target: &none, proposed: Some(&tried) };
        let act = project_action(&proto, &u_o, &u_t, &av).unwrap();
        assert_eq!((act.original, act.target), (0, 1));
        tried.insert((0, 1));
        let av = Availability { masked_original: &none, masked_target: &none, proposed: Some(&tried) };
        let act = project_action(&proto, &u_o, &u_t, &av).unwrap();
        assert_eq!((act.original, act.target), (1, 0));
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let u = two_rows(&[0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(cosine_argmax(&[1.0, 0.0], &u, |_| true), Some(1));
        assert_eq!(rank_by_cosine(&[1.0, 0.0], &u, |_| true), vec![1, 2, 0]);
    }
}
