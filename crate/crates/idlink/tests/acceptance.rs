//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Run with `cargo test -p idlink --release --test acceptance`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use idlink::pipeline::{self, RunAllOutcome};
use idlink::RunConfig;
use idlink_core::actor::{project_action, Actor, ActorConfig, Availability, HistoryRecord, ProtoAction};
use idlink_core::critic::{ActionInput, QNetwork};
use idlink_core::ddpg::{actor_objective_gradient, critic_update, soft_update, EncoderContext, HistoryRef, ReplayBuffer, TargetNets, Transition};
use idlink_core::embedding::EmbeddingMatrix;
use idlink_core::env::{Environment, RewardConfig};
use idlink_core::eval::{mean_average_precision, precision_at_k, recall, RankedCandidates};
use idlink_core::graph::{Anchor, AnchorSet, Graph};
use idlink_core::nn::{grad_check, numeric_gradient, relative_error, Activation, AttentionScorer, Dense, LstmCell, ParamStore, Sgd, SgdConfig};
use idlink_core::seed::splitmix;

const EPS: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-4;

/// Deterministic values in [-1, 1).
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> f64 {
        self.0 = splitmix(self.0);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn below(&mut self, n: usize) -> usize {
        self.0 = splitmix(self.0);
        (self.0 % n as u64) as usize
    }

    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }

    fn fill(&mut self, xs: &mut [f64]) {
        for x in xs {
            *x = self.next();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn dense_error(rng: &mut Stream) -> f64 {
    let mut worst: f64 = 0.0;
    for act in [Activation::Identity, Activation::Tanh, Activation::Relu, Activation::Sigmoid] {
        let mut store = ParamStore::new();
        let layer = Dense::new(&mut store, "d", 5, 4, act);
        rng.fill(store.values_mut());
        let batch = 3;
        let x = rng.vec(batch * 5);
        let proj = rng.vec(batch * 4);
        let y = layer.forward(store.values(), &x, batch).unwrap();
        let mut grads = store.zeros_like();
        let dx = layer.backward(store.values(), &x, &y, &proj, batch, &mut grads, true).unwrap().unwrap();
        let p0 = store.values().to_vec();
        let loss = |p: &[f64], x: &[f64]| dot(&layer.forward(p, x, batch).unwrap(), &proj);
        worst = worst.max(grad_check(|p| loss(p, &x), &p0, &grads, EPS));
        worst = worst.max(grad_check(|xv| loss(&p0, xv), &x, &dx, EPS));
    }
    worst
}

fn lstm_error(rng: &mut Stream) -> f64 {
    let mut store = ParamStore::new();
    let cell = LstmCell::new(&mut store, "l", 4, 3);
    rng.fill(store.values_mut());
    let len = 3;
    let xs = rng.vec(len * 4);
    let proj = rng.vec(len * 3);
    let trace = cell.forward_sequence(store.values(), &xs, len).unwrap();
    let mut grads = store.zeros_like();
    let dx = cell.backward_sequence(store.values(), &trace, &proj, &mut grads, true).unwrap().unwrap();
    let p0 = store.values().to_vec();
    let loss = |p: &[f64], xs: &[f64]| dot(&cell.forward_sequence(p, xs, len).unwrap().hs, &proj);
    grad_check(|p| loss(p, &xs), &p0, &grads, EPS).max(grad_check(|x| loss(&p0, x), &xs, &dx, EPS))
}

fn attention_error(rng: &mut Stream) -> f64 {
    let mut store = ParamStore::new();
    let att = AttentionScorer::new(&mut store, "a", 4);
    rng.fill(store.values_mut());
    let len = 5;
    let hs = rng.vec(len * 4);
    let proj = rng.vec(4);
    let (_, gamma) = att.pool(store.values(), &hs, len).unwrap();
    let mut grads = store.zeros_like();
    let dh = att.backward(store.values(), &hs, &gamma, &proj, &mut grads);
    let p0 = store.values().to_vec();
    let loss = |p: &[f64], h: &[f64]| dot(&att.pool(p, h, len).unwrap().0, &proj);
    grad_check(|p| loss(p, &hs), &p0, &grads, EPS).max(grad_check(|h| loss(&p0, h), &hs, &dh, EPS))
}

fn critic_error(rng: &mut Stream) -> f64 {
    let mut worst: f64 = 0.0;
    for input in [ActionInput::UnitHalves, ActionInput::Raw] {
        let mut q = QNetwork::zeroed_with(3, 4, &[7, 6, 5, 4], input).unwrap();
        rng.fill(q.params_mut().values_mut());
        for v in q.params_mut().values_mut() {
            *v *= 0.5;
        }
        let batch = 2;
        let (s, a) = (rng.vec(batch * 3), rng.vec(batch * 4));
        let dq = rng.vec(batch);
        let trace = q.forward(&s, &a, batch).unwrap();
        let mut grads = q.params().zeros_like();
        q.backward(&trace, &dq, Some(&mut grads), false).unwrap();
        let f = |p: &[f64]| {
            let mut n = q.clone();
            n.params_mut().values_mut().copy_from_slice(p);
            dot(&n.q_batch(&s, &a, batch).unwrap(), &dq)
        };
        worst = worst.max(grad_check(f, q.params().values(), &grads, EPS));

        let (s1, a1) = (rng.vec(3), rng.vec(4));
        let analytic = q.q_gradient_wrt_action(&s1, &a1).unwrap();
        let numeric = numeric_gradient(|x| q.q_value(&s1, x).unwrap(), &a1, EPS);
        worst = analytic.iter().zip(&numeric).map(|(x, y)| relative_error(*x, *y)).fold(worst, f64::max);
    }
    worst
}

fn composite_error(rng: &mut Stream) -> f64 {
    let d = 2;
    let cfg = ActorConfig { embedding_dim: d, feedback_len: 3, feedback_dim: 2, hidden: 2 * d };
    let mut actor = Actor::zeroed(cfg).unwrap();
    rng.fill(actor.params_mut().values_mut());
    let mut critic = QNetwork::zeroed(2 * d, 2 * d, &[6, 5, 4, 3]).unwrap();
    rng.fill(critic.params_mut().values_mut());
    let u_o = EmbeddingMatrix::from_rows(d, rng.vec(4 * d)).unwrap();
    let u_t = EmbeddingMatrix::from_rows(d, rng.vec(4 * d)).unwrap();
    let s_net = rng.vec(2 * d);
    let history = vec![
        HistoryRecord { original: 0, target: 1, reward: -1.0, step: 1 },
        HistoryRecord { original: 2, target: 2, reward: 1.0, step: 2 },
    ];
    let batch: Vec<Transition> = (0..3)
        .map(|_| Transition { s: rng.vec(2 * d), a: rng.vec(2 * d), r: 0.0, s_next: rng.vec(2 * d), done: false, history: HistoryRef { episode: 0, len: 0 } })
        .collect();
    let refs: Vec<&Transition> = batch.iter().collect();
    let histories = [None, Some(&history[..]), None];
    let ctx = EncoderContext { u_o: &u_o, u_t: &u_t, s_net: &s_net };
    let (_, grads) = actor_objective_gradient(&actor, &critic, &refs, &histories, Some(ctx)).unwrap();

    // The critic sees the unperturbed state; the decoder sees the state
    // re-encoded at the perturbed parameters.
    let encode = |a: &Actor, i: usize| -> Vec<f64> {
        match histories[i] {
            Some(h) => {
                let p = a.encode_history(h, &u_o, &u_t).unwrap();
                s_net.iter().zip(&p).map(|(x, y)| x + y).collect()
            }
            None => batch[i].s.clone(),
        }
    };
    let critic_states: Vec<Vec<f64>> = (0..3).map(|i| encode(&actor, i)).collect();
    let f = |p: &[f64]| {
        let mut a = actor.clone();
        a.params_mut().values_mut().copy_from_slice(p);
        let total: f64 = (0..3).map(|i| critic.q_value(&critic_states[i], &a.act(&encode(&a, i)).unwrap().0).unwrap()).sum();
        -total / 3.0
    };
    grad_check(f, actor.params().values(), &grads, EPS)
}

fn criterion_gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream(1);
    let errors = [
        ("dense", dense_error(&mut rng)),
        ("lstm", lstm_error(&mut rng)),
        ("attention", attention_error(&mut rng)),
        ("critic", critic_error(&mut rng)),
        ("actor-through-critic", composite_error(&mut rng)),
    ];
    let elapsed = start.elapsed();
    let passed = errors.iter().all(|(_, e)| *e < GRAD_TOL) && elapsed < Duration::from_secs(30);
    let list: Vec<String> = errors.iter().map(|(n, e)| format!("{n} {e:.2e}")).collect();
    outcome(passed, format!("max rel. error {}; {:.2} s", list.join(", "), elapsed.as_secs_f64()))
}

fn naive_cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())
}

fn exhaustive(proto: &[f64], u_o: &EmbeddingMatrix, u_t: &EmbeddingMatrix, mo: &[bool], mt: &[bool], tried: &BTreeSet<(usize, usize)>) -> Option<(usize, usize)> {
    let (a_o, a_t) = proto.split_at(u_o.dim());
    let mut order: Vec<(usize, f64)> = (0..u_o.len()).filter(|&v| !mo[v]).map(|v| (v, naive_cos(a_o, u_o.row(v)))).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    order.into_iter().find_map(|(o, _)| {
        let mut best: Option<(usize, f64)> = None;
        for t in (0..u_t.len()).filter(|&t| !mt[t] && !tried.contains(&(o, t))) {
            let c = naive_cos(a_t, u_t.row(t));
            if best.is_none_or(|(_, b)| c > b + 1e-12) {
                best = Some((t, c));
            }
        }
        best.map(|(t, _)| (o, t))
    })
}

/// Rows with duplicates, so equal cosines occur.
fn tied_matrix(rng: &mut Stream, n: usize, d: usize) -> EmbeddingMatrix {
    let mut rows = rng.vec(n * d);
    for _ in 0..n / 4 {
        let (i, j) = (rng.below(n), rng.below(n));
        let src = rows[j * d..(j + 1) * d].to_vec();
        rows[i * d..(i + 1) * d].copy_from_slice(&src);
    }
    EmbeddingMatrix::from_rows(d, rows).unwrap()
}

fn criterion_projection() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream(2);
    let d = 16;
    let mut mismatches = 0;
    let mut ties = 0;
    for _ in 0..200 {
        let (no, nt) = (2 + rng.below(499), 2 + rng.below(499));
        let u_o = tied_matrix(&mut rng, no, d);
        let u_t = tied_matrix(&mut rng, nt, d);
        let mut proto = rng.vec(2 * d);
        // Aim some instances exactly at a (possibly duplicated) row.
        if rng.below(2) == 0 {
            let o = rng.below(no);
            proto[..d].copy_from_slice(u_o.row(o));
            ties += 1;
        }
        let mo: Vec<bool> = (0..no).map(|_| rng.next() < -0.4).collect();
        let mt: Vec<bool> = (0..nt).map(|_| rng.next() < -0.4).collect();
        let tried: BTreeSet<(usize, usize)> = (0..rng.below(50)).map(|_| (rng.below(no), rng.below(nt))).collect();
        let avail = Availability { masked_original: &mo, masked_target: &mt, proposed: Some(&tried) };
        let got = project_action(&ProtoAction(proto.clone()), &u_o, &u_t, &avail).ok().map(|a| (a.original, a.target));
        if got != exhaustive(&proto, &u_o, &u_t, &mo, &mt, &tried) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches}/200 mismatches ({ties} aimed at duplicated rows); {:.2} s", elapsed.as_secs_f64()),
    )
}

fn criterion_metrics() -> Outcome {
    let a = RankedCandidates::from_ranks(&[1, 3, 12]).unwrap();
    let b = RankedCandidates::from_ranks(&[1, 2, 4]).unwrap();
    let p1 = precision_at_k(&a, 1).unwrap();
    let p5 = precision_at_k(&a, 5).unwrap();
    let map = mean_average_precision(&b).unwrap();
    let rec = recall(3, 4).unwrap();
    let passed = (p1 - 1.0 / 3.0).abs() < 1e-12 && (p5 - 2.0 / 3.0).abs() < 1e-12 && (map - 0.583_333_333_333_333_3).abs() < 1e-9 && rec == 0.75;
    outcome(passed, format!("P@1 {p1:.6}, P@5 {p5:.6}, MAP {map:.10}, recall {rec}"))
}

fn labeled(prefix: &str, n: usize) -> Graph {
    let mut g = Graph::new();
    for i in 0..n {
        g.add_node(&format!("{prefix}{i}"));
    }
    g
}

fn criterion_reward_law() -> Outcome {
    let n = 30;
    let (go, gt) = (labeled("o", n), labeled("t", n));
    let truth = AnchorSet::from_indices((0..n).map(|i| Anchor { original: i, target: (i * 7) % n }), &go, &gt).unwrap();
    let t_max = 58;
    let env = Environment::new(n, n, &truth, t_max, RewardConfig::default()).unwrap();

    // Exact ±1/t for t = 1..T, alternating wrong and right proposals.
    let mut state = env.reset();
    let mut exact = true;
    for t in 1..=t_max {
        let o = (t - 1) / 2;
        // Wrong proposals use the next original's partner, still unmatched.
        let target = if t % 2 == 0 { (o * 7) % n } else { ((o + 1) * 7) % n };
        let out = env.step(&mut state, o, target).unwrap();
        let sign = if out.correct { 1.0 } else { -1.0 };
        exact &= out.reward == sign / t as f64 && out.correct == (t % 2 == 0);
    }

    // One-to-one under a projection-driven episode with random proto-actions.
    let mut rng = Stream(4);
    let u_o = EmbeddingMatrix::from_rows(8, rng.vec(n * 8)).unwrap();
    let u_t = EmbeddingMatrix::from_rows(8, rng.vec(n * 8)).unwrap();
    let env = Environment::new(n, n, &truth, 500, RewardConfig::default()).unwrap();
    let mut state = env.reset();
    let (mut used_o, mut used_t) = (BTreeSet::new(), BTreeSet::new());
    let mut reproposed = 0;
    let mut steps = 0;
    while !state.is_done() {
        let Ok(a) = project_action(&ProtoAction(rng.vec(16)), &u_o, &u_t, &state.availability()) else { break };
        if used_o.contains(&a.original) || used_t.contains(&a.target) {
            reproposed += 1;
        }
        let t_now = state.t;
        let out = env.step(&mut state, a.original, a.target).unwrap();
        let sign = if out.correct { 1.0 } else { -1.0 };
        exact &= out.reward == sign / t_now as f64;
        if out.correct {
            used_o.insert(a.original);
            used_t.insert(a.target);
        }
        steps += 1;
    }
    let mut s = env.reset();
    env.step(&mut s, 0, 0).unwrap();
    let rejects = env.step(&mut s, 0, 5).is_err() && env.step(&mut s, 3, 0).is_err();
    outcome(
        exact && reproposed == 0 && rejects,
        format!("exact ±1/t over {t_max} steps: {exact}; {} correct in {steps} projected steps, {reproposed} re-proposals", used_o.len()),
    )
}

fn criterion_ddpg() -> Outcome {
    let mut rng = Stream(5);
    let mut soft_ok = true;
    let mut worst: f64 = 0.0;
    for tau in [0.0, 0.001, 0.5, 1.0] {
        let mut live = ParamStore::new();
        live.alloc("w", &[64]);
        let mut target = live.clone();
        rng.fill(live.values_mut());
        rng.fill(target.values_mut());
        let before = target.values().to_vec();
        soft_update(&live, &mut target, tau).unwrap();
        for ((t, l), b) in target.values().iter().zip(live.values()).zip(&before) {
            let expected = tau * l + (1.0 - tau) * b;
            let err = (t - expected).abs();
            worst = worst.max(err);
            soft_ok &= err <= 4.0 * f64::EPSILON * expected.abs().max(1.0);
        }
        soft_ok &= match tau {
            0.0 => target.values() == &before[..],
            1.0 => target.values() == live.values(),
            _ => true,
        };
    }

    let mut buf = ReplayBuffer::new(5).unwrap();
    for i in 0..12 {
        buf.store(Transition { s: vec![0.0], a: vec![0.0], r: i as f64, s_next: vec![0.0], done: false, history: HistoryRef { episode: 0, len: 0 } });
    }
    let fifo = buf.iter().map(|t| t.r).eq((7..12).map(|i| i as f64));

    let cfg = ActorConfig { embedding_dim: 2, feedback_len: 4, feedback_dim: 2, hidden: 4 };
    let actor = Actor::zeroed(cfg).unwrap();
    let mut critic = QNetwork::zeroed(4, 4, &[8, 8, 6, 4]).unwrap();
    rng.fill(critic.params_mut().values_mut());
    for v in critic.params_mut().values_mut() {
        *v *= 0.5;
    }
    let targets = TargetNets::from_live(&actor, &critic);
    let batch: Vec<Transition> = (0..8)
        .map(|_| Transition { s: rng.vec(4), a: rng.vec(4), r: rng.next(), s_next: rng.vec(4), done: false, history: HistoryRef { episode: 0, len: 0 } })
        .collect();
    let refs: Vec<&Transition> = batch.iter().collect();
    let sgd = Sgd::new(SgdConfig { learning_rate: 0.01, clip_norm: Some(5.0) }).unwrap();
    let losses: Vec<f64> = (0..100).map(|_| critic_update(&mut critic, &targets, &refs, 0.0, &sgd).unwrap()).collect();
    let decreasing = losses.windows(2).all(|w| w[1] < w[0]);
    outcome(
        soft_ok && fifo && decreasing,
        format!(
            "soft update max error {worst:.1e}; FIFO {fifo}; ρ=0 loss {:.4} → {:.4} strictly decreasing: {decreasing}",
            losses[0],
            losses[99]
        ),
    )
}

fn same_file(a: &Path, b: &Path, name: &str) -> bool {
    matches!((fs::read(a.join(name)), fs::read(b.join(name))), (Ok(x), Ok(y)) if x == y)
}

fn criterion_benchmark(first: &RunAllOutcome, dir_a: &Path, dir_b: &Path) -> Vec<(&'static str, Outcome)> {
    let check = |name: &str| first.checks.iter().find(|c| c.name == name).expect("check present");
    let reward = check("reward_improves");
    let greedy = check("p1_vs_greedy");
    let random = check("p1_vs_random");
    let minutes = first.elapsed.as_secs_f64() / 60.0;
    let identical = ["checkpoint.bin", "metrics.json", "train_log.csv", "episode_trace.csv", "original.emb", "target.emb"]
        .iter()
        .all(|f| same_file(dir_a, dir_b, f));
    vec![
        ("6a reward improvement", outcome(reward.passed, reward.detail.clone())),
        (
            "6b test P@1 vs baselines",
            outcome(greedy.passed && random.passed, format!("{}; {}", greedy.detail, random.detail)),
        ),
        ("6c runtime", outcome(minutes < 15.0, format!("{minutes:.2} min for generate+embed+train+eval"))),
        ("6d bitwise reproducible", outcome(identical, "checkpoint, metrics, logs and embeddings of two seeded runs compared byte for byte")),
    ]
}

fn criterion_determinism(dir_a: &Path, dir_b: &Path) -> Outcome {
    let metrics = same_file(dir_a, dir_b, "metrics.json");
    let digests = match (pipeline::read_digest(dir_a), pipeline::read_digest(dir_b)) {
        (Ok(a), Ok(b)) => a == b && same_file(dir_a, dir_b, "checkpoint.bin"),
        _ => false,
    };
    outcome(metrics && digests, format!("metrics.json identical: {metrics}; checkpoint digests identical: {digests}"))
}

fn main() -> ExitCode {
    let mut results: Vec<(String, Outcome)> = Vec::new();
    let mut record = |name: &str, o: Outcome| {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name.to_string(), o));
    };
    record("1 gradient suite", criterion_gradients());
    record("2 projection oracle", criterion_projection());
    record("3 metric hand-checks", criterion_metrics());
    record("4 reward law and one-to-one", criterion_reward_law());
    record("5 DDPG mechanics", criterion_ddpg());

    let root = tempfile::tempdir().expect("temporary directory");
    let (dir_a, dir_b) = (root.path().join("run-a"), root.path().join("run-b"));
    let cfg = RunConfig { out: dir_a.clone(), ..RunConfig::default() };
    eprintln!("running the 200-episode benchmark in-process ...");
    match pipeline::cmd_run_all(&cfg, |s| {
        if s.episode % 20 == 0 {
            eprintln!("  episode {:>3} reward {:.4}", s.episode, s.total_reward);
        }
    }) {
        Ok(first) => {
            eprintln!("repeating it through the command line ...");
            let status = Command::new(env!("CARGO_BIN_EXE_idlink"))
                .args(["run-all", "--seed", "0", "--out"])
                .arg(&dir_b)
                .stdout(std::process::Stdio::null())
                .stderr(std::process::Stdio::null())
                .status();
            if !matches!(status, Ok(s) if s.success()) {
                record("6/7 second run", outcome(false, format!("command-line run-all failed: {status:?}")));
            }
            for (name, o) in criterion_benchmark(&first, &dir_a, &dir_b) {
                record(name, o);
            }
            record("7 run-all determinism", criterion_determinism(&dir_a, &dir_b));
        }
        Err(e) => record("6 end-to-end benchmark", outcome(false, format!("run-all failed: {e}"))),
    }

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| n.as_str()).collect();
    if failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
