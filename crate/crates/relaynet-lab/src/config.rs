//! Experiment configuration (TOML).
//!
//! ```toml
//! base = "random:64:4:1"      # complete:N | cycle:N | petersen | random:N:D:SEED | file:PATH
//! flood_rounds = 5            # default: diameter of the base graph
//!
//! [[level]]
//! h = "cycle:4"
//! inner_rounds = 2            # default: diameter of h
//! relays = 3                  # optional: sampled relay sets of this size
//!
//! [adversary]
//! strategies = ["uniform"]    # uniform | vertex-star | cloud | super-edge | exhaustive
//! epsilons = [0.0, 0.01]
//! behaviors = ["drop"]        # drop | bitflip | forge0 | forge1
//! seeds = 20
//!
//! [run]
//! oracle = false
//!
//! [output]
//! csv = "out.csv"
//! ```

use std::path::PathBuf;

use relaynet::adversary::{Behavior, Strategy, MENU};
use relaynet::graph::{random_regular_graph, MultiGraph, ProductOptions};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flood_rounds: Option<u32>,
    #[serde(default, rename = "level")]
    pub levels: Vec<LevelConfig>,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub h: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relays: Option<usize>,
    #[serde(default)]
    pub relay_seed: u64,
    /// `balanced` (deg(H) parallel copies per G-edge) or `single`.
    #[serde(default = "balanced")]
    pub multiplicity: String,
    #[serde(default = "four")]
    pub max_cloud_factor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    #[serde(default = "uniform")]
    pub strategies: Vec<String>,
    #[serde(default = "zero")]
    pub epsilons: Vec<f64>,
    /// Behavior of the corrupted copies, one row per entry.
    #[serde(default = "drop")]
    pub behaviors: Vec<String>,
    /// Behaviors probed when computing doomed sets.
    #[serde(default = "menu")]
    pub menu: Vec<String>,
    #[serde(default = "one")]
    pub seeds: u64,
    #[serde(default)]
    pub seed_base: u64,
    /// Corruption size bound for the `exhaustive` strategy.
    #[serde(default = "two")]
    pub exhaustive_k: usize,
    /// Largest number of adversaries an exhaustive sweep may enumerate.
    #[serde(default = "million")]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "thirty_two")]
    pub message_len: u32,
    #[serde(default)]
    pub perm_seed: u64,
    /// Check runs against the erased reference run (single-level only).
    #[serde(default)]
    pub oracle: bool,
    /// Fill `wall_ms`; off keeps the CSV reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "yes")]
    pub memo: bool,
    /// Largest cloud for exact minimum doomed covers.
    #[serde(default = "sixteen")]
    pub exact_limit: usize,
    /// Worker threads, 0 for one per core.
    #[serde(default)]
    pub workers: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

fn balanced() -> String {
    "balanced".into()
}
fn four() -> usize {
    4
}
fn uniform() -> Vec<String> {
    vec!["uniform".into()]
}
fn zero() -> Vec<f64> {
    vec![0.0]
}
fn drop() -> Vec<String> {
    vec!["drop".into()]
}
fn menu() -> Vec<String> {
    MENU.iter().map(|b| b.name().to_string()).collect()
}
fn one() -> u64 {
    1
}
fn two() -> usize {
    2
}
fn million() -> u64 {
    1_000_000
}
fn thirty_two() -> u32 {
    32
}
fn yes() -> bool {
    true
}
fn sixteen() -> usize {
    16
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// A corruption strategy of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spread {
    Sampled(Strategy),
    Exhaustive,
}

impl Spread {
    pub fn parse(s: &str) -> Result<Spread, relaynet::Error> {
        if s == "exhaustive" || s.starts_with("exhaustive-") {
            return Ok(Spread::Exhaustive);
        }
        Strategy::parse(s).map(Spread::Sampled)
    }

    pub fn name(self, k: usize) -> String {
        match self {
            Spread::Sampled(s) => s.name().to_string(),
            Spread::Exhaustive => format!("exhaustive-{k}"),
        }
    }
}

/// One-based line of the first line defining `key`, for error messages.
fn line_of(text: &str, key: &str) -> usize {
    text.lines().position(|l| l.trim_start().starts_with(key)).map_or(1, |i| i + 1)
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parse and validate. `origin` names the source in error messages.
    pub fn from_toml(text: &str, origin: &str) -> Result<ExperimentConfig, LabError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_at(text, s.start));
            LabError::parse(origin, line, e.message().to_string())
        })?;
        cfg.validate().map_err(|(key, msg)| LabError::parse(origin, line_of(text, key), msg))?;
        Ok(cfg)
    }

    /// Config from command-line values layered under an optional file:
    /// every key the file sets wins, tables merge key by key, and a file
    /// `[[level]]` list replaces the flag levels. Errors point into the file
    /// when the offending key is there, at `flags` otherwise.
    pub fn from_layers(flags: toml::Table, file: Option<(&str, &str)>) -> Result<ExperimentConfig, LabError> {
        let Some((text, origin)) = file else {
            return Self::from_table(flags, None);
        };
        if flags.is_empty() {
            return Self::from_toml(text, origin);
        }
        let top: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map_or(1, |s| line_at(text, s.start));
            LabError::parse(origin, line, e.message().to_string())
        })?;
        let mut merged = flags;
        merge(&mut merged, top);
        Self::from_table(merged, Some((text, origin)))
    }

    fn from_table(table: toml::Table, file: Option<(&str, &str)>) -> Result<ExperimentConfig, LabError> {
        let locate = |key: Option<&str>, msg: String| match (file, key) {
            (Some((text, origin)), Some(k)) if text.lines().any(|l| l.trim_start().starts_with(k)) => {
                LabError::parse(origin, line_of(text, k), msg)
            }
            _ => LabError::parse("flags", 0, msg),
        };
        let cfg = ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg.split('`').nth(1).map(str::to_owned);
            locate(key.as_deref(), msg)
        })?;
        cfg.validate().map_err(|(key, msg)| locate(Some(key), msg))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check ranges and names; on failure names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        GraphSpec::parse(&self.base).map_err(|m| ("base", m))?;
        for l in &self.levels {
            GraphSpec::parse(&l.h).map_err(|m| ("h", m))?;
            if l.multiplicity != "balanced" && l.multiplicity != "single" {
                return Err(("multiplicity", format!("unknown multiplicity `{}`", l.multiplicity)));
            }
            if l.relays == Some(0) {
                return Err(("relays", "relay count must be positive".into()));
            }
        }
        let a = &self.adversary;
        if let Some(e) = a.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(("epsilons", format!("epsilon {e} outside [0, 1]")));
        }
        if a.epsilons.is_empty() {
            return Err(("epsilons", "empty epsilon grid".into()));
        }
        for s in &a.strategies {
            Spread::parse(s).map_err(|_| ("strategies", format!("unknown strategy `{s}`")))?;
        }
        for b in a.behaviors.iter().chain(&a.menu) {
            Behavior::parse(b).map_err(|_| ("behaviors", format!("unknown behavior `{b}`")))?;
        }
        if a.seeds == 0 {
            return Err(("seeds", "need at least one seed".into()));
        }
        if self.run.oracle && self.levels.len() != 1 {
            return Err(("oracle", "oracle checks need exactly one level".into()));
        }
        let depth = self.levels.len() as u32;
        if self.run.message_len == 0 || self.run.message_len + depth + 1 > relaynet::msg::MAX_LEN {
            return Err(("message_len", format!("message length must be in 1..={}", relaynet::msg::MAX_LEN - depth - 1)));
        }
        Ok(())
    }

    pub fn behaviors(&self) -> Vec<Behavior> {
        self.adversary.behaviors.iter().map(|b| Behavior::parse(b).expect("validated")).collect()
    }

    pub fn menu(&self) -> Vec<Behavior> {
        self.adversary.menu.iter().map(|b| Behavior::parse(b).expect("validated")).collect()
    }

    pub fn spreads(&self) -> Vec<Spread> {
        self.adversary.strategies.iter().map(|s| Spread::parse(s).expect("validated")).collect()
    }
}

fn merge(into: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

impl LevelConfig {
    pub fn options(&self) -> ProductOptions {
        let multiplicity =
            if self.multiplicity == "single" { relaynet::graph::Multiplicity::Single } else { relaynet::graph::Multiplicity::Balanced };
        ProductOptions { multiplicity, max_cloud_factor: self.max_cloud_factor }
    }
}

/// A graph named in a config: `complete:N`, `cycle:N`, `petersen`,
/// `random:N:D:SEED` or `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Cycle(usize),
    Petersen,
    Random { n: usize, d: usize, seed: u64 },
    File(PathBuf),
}

impl GraphSpec {
    pub fn parse(s: &str) -> Result<GraphSpec, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u64, String> { parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(|| format!("bad graph `{s}`")) };
        let arity = |k: usize| if parts.len() == k { Ok(()) } else { Err(format!("bad graph `{s}`")) };
        match parts[0] {
            "complete" => arity(2).and(num(1)).map(|n| GraphSpec::Complete(n as usize)),
            "cycle" => arity(2).and(num(1)).map(|n| GraphSpec::Cycle(n as usize)),
            "petersen" => arity(1).map(|_| GraphSpec::Petersen),
            "random" => {
                arity(4)?;
                Ok(GraphSpec::Random { n: num(1)? as usize, d: num(2)? as usize, seed: num(3)? })
            }
            "file" if parts.len() >= 2 => Ok(GraphSpec::File(PathBuf::from(&s[5..]))),
            _ => Err(format!("bad graph `{s}`")),
        }
    }

    pub fn build(&self) -> Result<MultiGraph, LabError> {
        Ok(match self {
            GraphSpec::Complete(n) => MultiGraph::complete(*n),
            GraphSpec::Cycle(n) => MultiGraph::cycle(*n),
            GraphSpec::Petersen => MultiGraph::petersen(),
            GraphSpec::Random { n, d, seed } => random_regular_graph(*n, *d, *seed)?,
            GraphSpec::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| LabError::Io(p.display().to_string(), e))?;
                crate::io::read_graph(&text, &p.display().to_string())?
            }
        })
    }
}
