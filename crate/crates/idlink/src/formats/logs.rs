//! CSV exports of training progress.

use std::io::Write;

use idlink_core::ddpg::TrainingLog;
use idlink_core::graph::Graph;

use crate::error::Result;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `episode,total_reward,critic_loss_mean,actor_objective_mean`; loss and
/// objective are empty for episodes before the first update.
pub fn write_train_log<W: Write>(log: &TrainingLog, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["episode", "total_reward", "critic_loss_mean", "actor_objective_mean"])?;
    for e in &log.episodes {
        out.write_record([e.episode.to_string(), e.total_reward.to_string(), opt(e.critic_loss_mean), opt(e.actor_objective_mean)])?;
    }
    out.flush()?;
    Ok(())
}

/// `episode,t,vO,vT,r_tm,r_t` with node labels.
pub fn write_episode_trace<W: Write>(log: &TrainingLog, original: &Graph, target: &Graph, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["episode", "t", "vO", "vT", "r_tm", "r_t"])?;
    for r in &log.trace {
        out.write_record([
            r.episode.to_string(),
            r.t.to_string(),
            original.label(r.original).to_string(),
            target.label(r.target).to_string(),
            r.immediate.to_string(),
            r.reward.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use idlink_core::ddpg::EpisodeSummary;
    use idlink_core::env::TraceRow;

    #[test]
    fn csv_layout() {
        let log = TrainingLog {
            episodes: vec![
                EpisodeSummary { episode: 0, total_reward: -1.5, critic_loss_mean: None, actor_objective_mean: None, steps: 2, correct: 0 },
                EpisodeSummary { episode: 1, total_reward: 0.5, critic_loss_mean: Some(0.25), actor_objective_mean: Some(-0.1), steps: 2, correct: 1 },
            ],
            trace: vec![TraceRow { episode: 1, t: 2, original: 0, target: 1, immediate: -1.0, reward: -0.5 }],
        };
        let mut buf = Vec::new();
        write_train_log(&log, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "episode,total_reward,critic_loss_mean,actor_objective_mean\n0,-1.5,,\n1,0.5,0.25,-0.1\n"
        );
        let g = Graph::from_labeled_edges([("a", "b")]).unwrap();
        let mut buf = Vec::new();
        write_episode_trace(&log, &g, &g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "episode,t,vO,vT,r_tm,r_t\n1,2,a,b,-1,-0.5\n");
    }
}
