//! Versioned agent checkpoints. Layout is described in `docs/checkpoint.md`.

use std::io::{BufRead, Write};

use idlink_core::actor::ActorConfig;
use idlink_core::critic::ActionInput;
use idlink_core::ddpg::Agent;
use idlink_core::nn::ParamStore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &str = "IDLINK-CHECKPOINT";
pub const VERSION: u32 = 1;

/// Network shapes needed to rebuild an agent before loading its values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentShape {
    pub actor: ActorConfig,
    pub critic_hidden: Vec<usize>,
    pub action_input: ActionInput,
}

impl AgentShape {
    pub fn of(agent: &Agent) -> Self {
        let widths = agent.critic.layers().iter().map(|l| l.outputs).collect::<Vec<_>>();
        Self {
            actor: agent.actor.config(),
            critic_hidden: widths[..widths.len() - 1].to_vec(),
            action_input: agent.critic.action_input(),
        }
    }
}

fn stores(agent: &Agent) -> [(&'static str, &ParamStore); 4] {
    [
        ("live", agent.actor.params()),
        ("live", agent.critic.params()),
        ("target", agent.targets.actor.params()),
        ("target", agent.targets.critic.params()),
    ]
}

fn action_input_name(a: ActionInput) -> &'static str {
    match a {
        ActionInput::Raw => "raw",
        ActionInput::UnitHalves => "unit_halves",
    }
}

fn join(xs: &[usize], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn write_checkpoint<W: Write>(agent: &Agent, mut w: W) -> Result<()> {
    let shape = AgentShape::of(agent);
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "meta embedding_dim {}", shape.actor.embedding_dim)?;
    writeln!(w, "meta feedback_len {}", shape.actor.feedback_len)?;
    writeln!(w, "meta feedback_dim {}", shape.actor.feedback_dim)?;
    writeln!(w, "meta hidden {}", shape.actor.hidden)?;
    writeln!(w, "meta critic_hidden {}", join(&shape.critic_hidden, ","))?;
    writeln!(w, "meta critic_action_input {}", action_input_name(shape.action_input))?;
    for (role, store) in stores(agent) {
        for b in store.blocks() {
            writeln!(w, "block {role}/{} {} {}", b.name, join(&b.shape, "x"), b.len())?;
        }
    }
    writeln!(w, "end")?;
    for (_, store) in stores(agent) {
        for v in store.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn parse_dims(s: &str, sep: char) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(sep).map(|x| x.parse::<usize>().map_err(|_| format_err(format!("bad dimension list `{s}`")))).collect()
}

pub fn read_checkpoint<R: BufRead>(mut r: R) -> Result<Agent> {
    let mut line = String::new();
    let mut next_line = |r: &mut R| -> Result<String> {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(format_err("truncated header"));
        }
        Ok(line.trim_end_matches('\n').to_string())
    };
    let first = next_line(&mut r)?;
    match first.split_once(' ') {
        Some((MAGIC, v)) if v == VERSION.to_string() => {}
        Some((MAGIC, v)) => return Err(format_err(format!("unsupported checkpoint version {v}"))),
        _ => return Err(format_err("not a checkpoint file")),
    }
    let mut meta = std::collections::BTreeMap::new();
    let mut blocks: Vec<(String, Vec<usize>, usize)> = Vec::new();
    loop {
        let l = next_line(&mut r)?;
        let fields: Vec<&str> = l.split(' ').collect();
        match fields.as_slice() {
            ["end"] => break,
            ["meta", k, v] => {
                meta.insert(k.to_string(), v.to_string());
            }
            ["meta", k] => {
                meta.insert(k.to_string(), String::new());
            }
            ["block", name, dims, len] => {
                let len = len.parse().map_err(|_| format_err(format!("bad block length in `{l}`")))?;
                blocks.push((name.to_string(), parse_dims(dims, 'x')?, len));
            }
            _ => return Err(format_err(format!("unrecognized header line `{l}`"))),
        }
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| format_err(format!("missing meta `{k}`")));
    let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| format_err(format!("bad meta `{k}`"))) };
    let actor = ActorConfig {
        embedding_dim: num("embedding_dim")?,
        feedback_len: num("feedback_len")?,
        feedback_dim: num("feedback_dim")?,
        hidden: num("hidden")?,
    };
    let action_input = match get("critic_action_input")?.as_str() {
        "raw" => ActionInput::Raw,
        "unit_halves" => ActionInput::UnitHalves,
        other => return Err(format_err(format!("unknown critic action input `{other}`"))),
    };
    let mut agent = Agent::zeroed(actor, &parse_dims(get("critic_hidden")?, ',')?, action_input)?;

    let expected: usize = stores(&agent).iter().map(|(_, s)| s.len()).sum();
    let declared: usize = blocks.iter().map(|b| b.2).sum();
    if declared != expected {
        return Err(format_err(format!("checkpoint holds {declared} values, networks need {expected}")));
    }
    let mut bytes = Vec::with_capacity(declared * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != declared * 8 {
        return Err(format_err(format!("data section has {} bytes, expected {}", bytes.len(), declared * 8)));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();

    let mut declared_blocks = blocks.iter();
    let mut offset = 0;
    for index in 0..4 {
        let store = match index {
            0 => agent.actor.params_mut(),
            1 => agent.critic.params_mut(),
            2 => agent.targets.actor.params_mut(),
            _ => agent.targets.critic.params_mut(),
        };
        let role = if index < 2 { "live" } else { "target" };
        let names: Vec<String> = store.blocks().iter().map(|b| b.name.clone()).collect();
        for expected in names {
            let (name, dims, len) = declared_blocks.next().ok_or_else(|| format_err("fewer blocks than the networks need"))?;
            if name.split_once('/') != Some((role, expected.as_str())) {
                return Err(format_err(format!("expected block `{role}/{expected}`, found `{name}`")));
            }
            store.set_block(&expected, dims, &values[offset..offset + len])?;
            offset += len;
        }
    }
    if declared_blocks.next().is_some() {
        return Err(format_err("more blocks than the networks need"));
    }
    Ok(agent)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use idlink_core::actor::ActorConfig;

    fn agent() -> Agent {
        let cfg = ActorConfig { embedding_dim: 3, feedback_len: 5, feedback_dim: 2, hidden: 6 };
        let mut a = Agent::new(cfg, &[4, 3], ActionInput::UnitHalves, 7).unwrap();
        a.targets.critic.params_mut().values_mut()[0] = 0.123;
        a
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let a = agent();
        let mut buf = Vec::new();
        write_checkpoint(&a, &mut buf).unwrap();
        let b = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(a, b);
        let mut again = Vec::new();
        write_checkpoint(&b, &mut again).unwrap();
        assert_eq!(sha256_hex(&buf), sha256_hex(&again));
    }

    #[test]
    fn rejects_damage() {
        let mut buf = Vec::new();
        write_checkpoint(&agent(), &mut buf).unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 8]).is_err());
        let text = String::from_utf8_lossy(&buf).replacen("CHECKPOINT 1", "CHECKPOINT 9", 1);
        assert!(read_checkpoint(text.as_bytes()).is_err());
        assert!(read_checkpoint("hello\n".as_bytes()).is_err());
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
