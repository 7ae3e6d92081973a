//! Towers and composed protocol sets from a config.

use relaynet::composition::{compose_tower, ComposedProtocolSet, Tower};
use relaynet::graph::{MultiGraph, Permutation};
use relaynet::protocols::{all_pairs_from_perm, amplified_all_pairs, flood_majority_perm, AllPairsSet};
use relaynet::rng::seeded;
use relaynet::Error;

use crate::config::{ExperimentConfig, GraphSpec, LevelConfig};
use crate::LabError;

/// A built tower with the routing set of its top level.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub tower: Tower,
    pub pi: Permutation,
    pub set: ComposedProtocolSet,
}

/// Shape of one level, for reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelInfo {
    pub level: usize,
    pub n: usize,
    pub degree: usize,
    pub edges: usize,
    pub rounds: u64,
    pub tick: u64,
}

fn level_err(level: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Level { level, source: Box::new(e) }
}

fn inner_set(h: &MultiGraph, l: &LevelConfig, level: usize) -> Result<AllPairsSet, Error> {
    let walk = match l.inner_rounds {
        Some(r) => r,
        None => h.diameter().ok_or(Error::Disconnected).map_err(level_err(level))?,
    };
    let set = all_pairs_from_perm(h, |g, p| flood_majority_perm(g, p, walk)).map_err(level_err(level))?;
    match l.relays {
        Some(s) => amplified_all_pairs(&set, s, l.relay_seed).map_err(level_err(level)),
        None => Ok(set),
    }
}

/// Build the tower described by `cfg`. Walk lengths default to the
/// diameters of the base graph and of each inner graph.
pub fn build_tower(cfg: &ExperimentConfig) -> Result<Tower, LabError> {
    let base = GraphSpec::parse(&cfg.base).map_err(|m| LabError::parse("config", 0, m))?.build()?;
    let flood_rounds = match cfg.flood_rounds {
        Some(r) => r,
        None => base.diameter().ok_or(Error::Level { level: 0, source: Box::new(Error::Disconnected) })?,
    };
    let mut stages = Vec::with_capacity(cfg.levels.len());
    for (i, l) in cfg.levels.iter().enumerate() {
        let h = GraphSpec::parse(&l.h).map_err(|m| LabError::parse("config", 0, m))?.build()?;
        let inner = inner_set(&h, l, i + 1)?;
        stages.push((h, inner, l.options()));
    }
    Ok(Tower::new(base, flood_rounds, stages)?)
}

/// Build the tower and compose its top level for the permutation drawn
/// from `run.perm_seed`.
pub fn build_pipeline(cfg: &ExperimentConfig) -> Result<Pipeline, LabError> {
    if cfg.levels.is_empty() {
        return Err(LabError::parse("config", 0, "need at least one [[level]]"));
    }
    let tower = build_tower(cfg)?;
    let pi = Permutation::random(tower.top().n(), &mut seeded(cfg.run.perm_seed));
    let set = compose_tower(&tower, tower.depth(), &pi)?;
    Ok(Pipeline { tower, pi, set })
}

impl Pipeline {
    pub fn levels(&self) -> Vec<LevelInfo> {
        let t = &self.tower;
        (0..=t.depth())
            .map(|j| {
                let g = t.graph(j);
                LevelInfo { level: j, n: g.n(), degree: g.max_degree(), edges: g.total_copies(), rounds: t.rounds(j), tick: t.tick(j) }
            })
            .collect()
    }
}
