use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use idlink::config::{Overrides, RunConfig};
use idlink::pipeline;
use idlink::Result;
use idlink_core::ddpg::EpisodeSummary;

/// Sequential identity linkage across two networks.
#[derive(Debug, Parser)]
#[command(name = "idlink", version)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Global seed (overrides the file).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (overrides the file).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated baselines to evaluate: greedy, random, sdm.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    baselines: Option<Vec<String>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic pair of networks and its anchor file.
    Generate,
    /// Pre-train identity embeddings for both networks.
    Embed,
    /// Train the agent and write a checkpoint and logs.
    Train,
    /// Score the checkpoint and baselines on the test anchors.
    Eval,
    /// All four stages in sequence.
    RunAll {
        /// Exit nonzero if any acceptance threshold is missed.
        #[arg(long)]
        assert: bool,
    },
}

fn progress(s: &EpisodeSummary) {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.5}"));
    eprintln!(
        "episode {:>4}  reward {:>9.5}  correct {:>3}/{:<3}  critic_loss {}  objective {}",
        s.episode,
        s.total_reward,
        s.correct,
        s.steps,
        fmt(s.critic_loss_mean),
        fmt(s.actor_objective_mean)
    );
}

fn print_metrics(outcome: &pipeline::EvalOutcome) {
    for r in &outcome.document.reports {
        let mut ks: Vec<(usize, f64)> = r.p_at.iter().filter_map(|(k, v)| Some((k.parse().ok()?, *v))).collect();
        ks.sort_by_key(|(k, _)| *k);
        let p: Vec<String> = ks.iter().map(|(k, v)| format!("P@{k} {v:.4}")).collect();
        println!("{:<8} {}  MAP {:.4}  recall {:.4}  (n={})", r.method, p.join("  "), r.map, r.recall, r.n);
    }
}

fn run(cli: Cli) -> Result<bool> {
    let overrides = Overrides { seed: cli.seed, out: cli.out, baselines: cli.baselines };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Generate => {
            let pair = pipeline::cmd_generate(&cfg)?;
            for w in &pair.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} ({} nodes, {} edges), {} ({} nodes, {} edges), {} anchors to {}",
                pipeline::ORIGINAL_EDGES,
                pair.original.len(),
                pair.original.edge_count(),
                pipeline::TARGET_EDGES,
                pair.target.len(),
                pair.target.edge_count(),
                pair.anchors.len(),
                cfg.out.display()
            );
        }
        Command::Embed => {
            let (emb, warnings) = pipeline::cmd_embed(&cfg)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} and {} ({} and {} rows, dim {})",
                pipeline::ORIGINAL_EMBEDDING,
                pipeline::TARGET_EMBEDDING,
                emb.original.len(),
                emb.target.len(),
                emb.original.dim()
            );
        }
        Command::Train => {
            let outcome = pipeline::cmd_train(&cfg, progress)?;
            println!("trained {} episodes; checkpoint sha256 {}", outcome.log.episodes.len(), outcome.digest);
        }
        Command::Eval => print_metrics(&pipeline::cmd_eval(&cfg)?),
        Command::RunAll { assert } => {
            let outcome = pipeline::cmd_run_all(&cfg, progress)?;
            print_metrics(&outcome.eval);
            println!("checkpoint sha256 {}", outcome.train.digest);
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("elapsed {:.1} s", outcome.elapsed.as_secs_f64());
            if assert && !outcome.all_passed() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: acceptance thresholds not met");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
