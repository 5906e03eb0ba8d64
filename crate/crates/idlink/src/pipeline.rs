//! The four stages (generate, embed, train, evaluate) over files in the
//! output directory, plus `run-all` with its acceptance checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use idlink_core::ddpg::{self, evaluate_policy, Agent, EpisodeSummary, LinkageTask, PolicyEvaluation, TrainingLog};
use idlink_core::embedding::{pretrain_anchored, EmbeddingMatrix, NetworkEmbedding};
use idlink_core::eval::{greedy_cosine_baseline, precision_at_k, random_baseline, sdm_baseline, MetricsReport};
use idlink_core::graph::{generate_synthetic, AnchorSet, Graph, SyntheticPair};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formats::checkpoint::{read_checkpoint, sha256_hex, write_checkpoint};
use crate::formats::logs::{write_episode_trace, write_train_log};
use crate::formats::metrics::MetricsDocument;
use crate::formats::text::{read_anchors, read_embeddings, read_graph, write_anchors, write_embeddings, write_graph};
use crate::formats::{read_file, write_file};

pub const RESOLVED_CONFIG: &str = "resolved_config.txt";
pub const ORIGINAL_EDGES: &str = "original.edges";
pub const TARGET_EDGES: &str = "target.edges";
pub const ANCHORS: &str = "anchors.txt";
pub const ORIGINAL_EMBEDDING: &str = "original.emb";
pub const TARGET_EMBEDDING: &str = "target.emb";
pub const CHECKPOINT: &str = "checkpoint.bin";
pub const CHECKPOINT_DIGEST: &str = "checkpoint.sha256";
pub const TRAIN_LOG: &str = "train_log.csv";
pub const EPISODE_TRACE: &str = "episode_trace.csv";
pub const METRICS: &str = "metrics.json";

/// Where each stage reads its inputs: `[paths]` entries win over the
/// default files in the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPaths {
    pub original_edges: PathBuf,
    pub target_edges: PathBuf,
    pub anchors: PathBuf,
    pub original_embedding: PathBuf,
    pub target_embedding: PathBuf,
    pub checkpoint: PathBuf,
}

impl InputPaths {
    pub fn resolve(cfg: &RunConfig) -> Self {
        let pick = |p: &Option<PathBuf>, default: &str| p.clone().unwrap_or_else(|| cfg.out.join(default));
        let p = &cfg.paths;
        Self {
            original_edges: pick(&p.original_edges, ORIGINAL_EDGES),
            target_edges: pick(&p.target_edges, TARGET_EDGES),
            anchors: pick(&p.anchors, ANCHORS),
            original_embedding: pick(&p.original_embedding, ORIGINAL_EMBEDDING),
            target_embedding: pick(&p.target_embedding, TARGET_EMBEDDING),
            checkpoint: pick(&p.checkpoint, CHECKPOINT),
        }
    }
}

/// Creates the output directory and records the resolved configuration.
pub fn prepare_output(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::from(e).in_file(&cfg.out))?;
    let path = cfg.out.join(RESOLVED_CONFIG);
    fs::write(&path, cfg.to_toml()).map_err(|e| Error::from(e).in_file(path))
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<SyntheticPair> {
    prepare_output(cfg)?;
    let pair = generate_synthetic(&cfg.synthetic_spec())?;
    write_file(&cfg.out.join(ORIGINAL_EDGES), |w| write_graph(&pair.original, w))?;
    write_file(&cfg.out.join(TARGET_EDGES), |w| write_graph(&pair.target, w))?;
    write_file(&cfg.out.join(ANCHORS), |w| write_anchors(&pair.anchors, &pair.original, &pair.target, w))?;
    Ok(pair)
}

/// Both graphs with the ground truth and its train/test split.
#[derive(Debug, Clone)]
pub struct Problem {
    pub original: Graph,
    pub target: Graph,
    pub anchors: AnchorSet,
    pub train: AnchorSet,
    pub test: AnchorSet,
}

pub fn load_problem(cfg: &RunConfig) -> Result<Problem> {
    let inputs = InputPaths::resolve(cfg);
    let original = read_file(&inputs.original_edges, read_graph)?;
    let target = read_file(&inputs.target_edges, read_graph)?;
    let anchors = read_file(&inputs.anchors, |r| read_anchors(r, &original, &target))?;
    let (train, test) = anchors.split(cfg.train_ratio)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Config(format!(
            "train ratio {} leaves {} training and {} test anchors; both must be non-empty",
            cfg.train_ratio,
            train.len(),
            test.len()
        )));
    }
    Ok(Problem { original, target, anchors, train, test })
}

#[derive(Debug, Clone)]
pub struct Embeddings {
    pub original: EmbeddingMatrix,
    pub target: EmbeddingMatrix,
    /// Concatenated degree-weighted summaries of both networks.
    pub s_net: Vec<f64>,
}

impl Embeddings {
    fn new(original: EmbeddingMatrix, target: EmbeddingMatrix, problem: &Problem, zeta: f64) -> Result<Self> {
        let s_net = NetworkEmbedding::compute(&original, &problem.original, &target, &problem.target, zeta)?.s_net();
        Ok(Self { original, target, s_net })
    }
}

/// Pre-trains both networks in one space, with the training anchors merged.
pub fn cmd_embed(cfg: &RunConfig) -> Result<(Embeddings, Vec<String>)> {
    prepare_output(cfg)?;
    let problem = load_problem(cfg)?;
    let (po, pt) = pretrain_anchored(&problem.original, &problem.target, &problem.train, &cfg.walk_config())?;
    write_file(&cfg.out.join(ORIGINAL_EMBEDDING), |w| write_embeddings(&po.embeddings, &problem.original, w))?;
    write_file(&cfg.out.join(TARGET_EMBEDDING), |w| write_embeddings(&pt.embeddings, &problem.target, w))?;
    let mut warnings = po.report.warnings;
    warnings.extend(pt.report.warnings);
    Ok((Embeddings::new(po.embeddings, pt.embeddings, &problem, cfg.embedding.zeta)?, warnings))
}

pub fn load_embeddings(cfg: &RunConfig, problem: &Problem) -> Result<Embeddings> {
    let inputs = InputPaths::resolve(cfg);
    let u_o = read_file(&inputs.original_embedding, |r| read_embeddings(r, &problem.original))?;
    let u_t = read_file(&inputs.target_embedding, |r| read_embeddings(r, &problem.target))?;
    if u_o.dim() != u_t.dim() {
        return Err(Error::Config(format!("embedding dimensions differ: {} vs {}", u_o.dim(), u_t.dim())));
    }
    Embeddings::new(u_o, u_t, problem, cfg.embedding.zeta)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: Agent,
    pub log: TrainingLog,
    /// SHA-256 of the written checkpoint file, hex.
    pub digest: String,
}

fn checkpoint_bytes(agent: &Agent) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    write_checkpoint(agent, &mut bytes)?;
    Ok(bytes)
}

/// Trains on the training anchors. `on_episode` sees every episode summary.
pub fn cmd_train(cfg: &RunConfig, mut on_episode: impl FnMut(&EpisodeSummary)) -> Result<TrainOutcome> {
    prepare_output(cfg)?;
    let problem = load_problem(cfg)?;
    let emb = load_embeddings(cfg, &problem)?;
    let task = LinkageTask { u_o: &emb.original, u_t: &emb.target, s_net: &emb.s_net, train: &problem.train };
    let every = cfg.train.checkpoint_every;
    let (agent, log) = ddpg::train_with(&task, &cfg.train_config(), |summary, agent| {
        on_episode(summary);
        if every > 0 && (summary.episode + 1) % every == 0 {
            let path = cfg.out.join(format!("checkpoint_ep{:04}.bin", summary.episode + 1));
            let bytes = checkpoint_bytes(agent).map_err(|e| e.in_file(&path))?;
            fs::write(&path, bytes).map_err(|e| Error::from(e).in_file(&path))?;
        }
        Ok::<(), Error>(())
    })?;

    let bytes = checkpoint_bytes(&agent)?;
    let digest = sha256_hex(&bytes);
    let path = cfg.out.join(CHECKPOINT);
    fs::write(&path, &bytes).map_err(|e| Error::from(e).in_file(&path))?;
    let path = cfg.out.join(CHECKPOINT_DIGEST);
    fs::write(&path, format!("{digest}  {CHECKPOINT}\n")).map_err(|e| Error::from(e).in_file(&path))?;
    write_file(&cfg.out.join(TRAIN_LOG), |w| write_train_log(&log, w))?;
    write_file(&cfg.out.join(EPISODE_TRACE), |w| write_episode_trace(&log, &problem.original, &problem.target, w))?;
    Ok(TrainOutcome { agent, log, digest })
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub document: MetricsDocument,
    pub policy: PolicyEvaluation,
    /// Greedy cosine P@1, computed even when not among the requested
    /// baselines so run-all can compare against it.
    pub greedy_p1: f64,
    /// Targets selectable at test time.
    pub candidate_count: usize,
}

impl EvalOutcome {
    /// Expected P@1 of a uniformly random ranking.
    pub fn random_p1(&self) -> f64 {
        1.0 / self.candidate_count as f64
    }

    pub fn agent_p1(&self) -> f64 {
        precision_at_k(&self.policy.ranks, 1).unwrap_or(0.0)
    }
}

/// Scores the checkpointed policy and the requested baselines on the test
/// anchors, writing `metrics.json`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalOutcome> {
    prepare_output(cfg)?;
    let problem = load_problem(cfg)?;
    let emb = load_embeddings(cfg, &problem)?;
    let agent = read_file(&InputPaths::resolve(cfg).checkpoint, read_checkpoint)?;
    if agent.actor.config().embedding_dim != emb.original.dim() {
        return Err(Error::Config(format!(
            "checkpoint embedding dim {} does not match embeddings ({})",
            agent.actor.config().embedding_dim,
            emb.original.dim()
        )));
    }
    let (u_o, u_t) = (&emb.original, &emb.target);
    let ks = &cfg.eval.k;
    let seed = cfg.seed;

    let policy = evaluate_policy(&agent.actor, u_o, u_t, &emb.s_net, &problem.train, &problem.test, cfg.eval.test_steps)?;
    let mut reports = vec![MetricsReport::compute("agent", seed, &policy.ranks, ks, policy.correct)?];

    let mut open_o = vec![true; u_o.len()];
    let mut open_t = vec![true; u_t.len()];
    for a in problem.train.iter() {
        open_o[a.original] = false;
        open_t[a.target] = false;
    }
    let candidate_count = open_t.iter().filter(|&&x| x).count();
    let greedy = greedy_cosine_baseline(u_o, u_t, &open_o, &open_t, &problem.test)?;
    let greedy_report = MetricsReport::compute("greedy", seed, &greedy.ranks, ks, greedy.correct)?;
    let greedy_p1 = precision_at_k(&greedy.ranks, 1)?;

    for name in &cfg.eval.baselines {
        match name.as_str() {
            "greedy" => reports.push(greedy_report.clone()),
            "random" => {
                let ranks = random_baseline(problem.test.len(), candidate_count, seed)?;
                let hits = ranks.ranks.iter().filter(|r| **r == Some(1)).count();
                reports.push(MetricsReport::compute("random", seed, &ranks, ks, hits)?);
            }
            "sdm" => {
                let sdm = sdm_baseline(u_o, u_t, &problem.train, &problem.test, &open_t, &cfg.sdm_config())?;
                reports.push(MetricsReport::compute("sdm", seed, &sdm.ranks, ks, sdm.correct)?);
            }
            other => return Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
    let document = MetricsDocument::new(&reports);
    let json = document.to_json()?;
    let path = cfg.out.join(METRICS);
    fs::write(&path, json).map_err(|e| Error::from(e).in_file(&path))?;
    Ok(EvalOutcome { document, policy, greedy_p1, candidate_count })
}

/// One acceptance threshold checked by `run-all`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunAllOutcome {
    pub train: TrainOutcome,
    pub eval: EvalOutcome,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl RunAllOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Mean episode reward over the first and last tenth of training.
pub fn reward_windows(log: &TrainingLog) -> Option<(f64, f64)> {
    let n = log.episodes.len();
    let w = (n / 10).max(1);
    Some((log.mean_reward(0, w)?, log.mean_reward(n.checked_sub(w)?, n)?))
}

pub fn acceptance_checks(train: &TrainOutcome, eval: &EvalOutcome) -> Vec<Check> {
    let mut checks = Vec::new();
    let (passed, detail) = match reward_windows(&train.log) {
        Some((first, last)) => (last > first, format!("last-10% mean reward {last:.6} vs first-10% {first:.6}")),
        None => (false, "no episodes".to_string()),
    };
    checks.push(Check { name: "reward_improves", passed, detail });

    let p1 = eval.agent_p1();
    checks.push(Check {
        name: "p1_vs_greedy",
        passed: p1 >= eval.greedy_p1,
        detail: format!("agent P@1 {p1:.4} vs greedy {:.4}", eval.greedy_p1),
    });
    let floor = 5.0 * eval.random_p1();
    checks.push(Check {
        name: "p1_vs_random",
        passed: p1 >= floor,
        detail: format!("agent P@1 {p1:.4} vs 5x random expectation {floor:.4} ({} candidates)", eval.candidate_count),
    });
    checks
}

/// Generate (unless inputs are configured), embed (unless embeddings are
/// configured), train and evaluate.
pub fn cmd_run_all(cfg: &RunConfig, on_episode: impl FnMut(&EpisodeSummary)) -> Result<RunAllOutcome> {
    let start = Instant::now();
    let p = &cfg.paths;
    if p.original_edges.is_none() && p.target_edges.is_none() && p.anchors.is_none() {
        cmd_generate(cfg)?;
    }
    if p.original_embedding.is_none() && p.target_embedding.is_none() {
        cmd_embed(cfg)?;
    }
    let train_cfg = RunConfig { paths: crate::config::PathsSection { checkpoint: None, ..p.clone() }, ..cfg.clone() };
    let train = cmd_train(&train_cfg, on_episode)?;
    let eval = cmd_eval(&train_cfg)?;
    let checks = acceptance_checks(&train, &eval);
    Ok(RunAllOutcome { train, eval, checks, elapsed: start.elapsed() })
}

/// Reads the digest recorded next to a checkpoint.
pub fn read_digest(dir: &Path) -> Result<String> {
    let path = dir.join(CHECKPOINT_DIGEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::from(e).in_file(&path))?;
    text.split_whitespace().next().map(str::to_string).ok_or_else(|| Error::Format("empty digest file".into()).in_file(path))
}
