//! Routing on `Z = G ∘ H` by simulating a routing protocol of G: every
//! G-vertex is played by its cloud, every G-edge transfer becomes a
//! cloud-to-cloud transfer over its super-edge.
//!
//! Levels nest: the outer graph of level `j` is the product of level `j-1`,
//! and level 0 is the base graph with majority flooding. Every protocol
//! state of a lower level is held by each physical vertex below it, so a
//! lower-level frame carries one block of slots per replica, in the order
//! of the top-level vertex ids. All protocols here act slotwise, which
//! makes the replicas independent.

mod c2c;
mod classify;
mod oracle;
mod verify;

pub use c2c::{cloud_to_cloud, LiftedWire, Memo};
pub use classify::{classify, CorruptionAnalysis};
pub use oracle::{erased_oracle, ErasedTranscript};
pub use verify::{union_bound_terms, verify_simulation, PairTrace, SimulationReport, Violation, ViolationKind};

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{execute, Counters, Execution, Layout, RunSpec, Wire};
use crate::error::{Error, Result};
use crate::graph::{
    permutation_to_matchings, replacement_product, MatchingDecomposition, MultiGraph, Permutation, ProductGraph, ProductOptions,
};
use crate::msg::Msg;
use crate::protocols::{flood_majority_perm, AllPairsSet, Embedded, Flood, FloodSet};

/// One composition level: `product.z = product.g ∘ product.h`.
#[derive(Clone, Debug)]
pub struct Level {
    pub product: ProductGraph,
    /// All-pairs protocols on `product.h`, run inside every cloud.
    pub inner: AllPairsSet,
    /// Per cloud, the inner graph mapped into Z coordinates.
    pub layouts: Vec<Layout>,
}

impl Level {
    pub fn new(g: &MultiGraph, inner: AllPairsSet, h: &MultiGraph, options: ProductOptions) -> Result<Level> {
        if inner.n != h.n() {
            return Err(Error::Mismatch("inner protocol set does not match H"));
        }
        let product = replacement_product(g, h, options)?;
        let layouts =
            (0..product.clouds()).map(|u| Layout::mapped(h, |a| product.vertex(u, a), |e, c| (product.inner_edge(u, e), c))).collect();
        Ok(Level { product, inner, layouts })
    }

    pub fn cloud(&self, u: usize) -> Embedded<'_> {
        Embedded { graph: &self.product.h, layout: &self.layouts[u] }
    }

    /// Rounds of one cloud-to-cloud transfer.
    pub fn transfer_rounds(&self) -> u64 {
        2 * self.inner.pair_rounds() as u64 + 1
    }
}

/// A base graph with its flooding walk length and the levels built on it.
#[derive(Clone, Debug)]
pub struct Tower {
    pub base: MultiGraph,
    pub base_layout: Layout,
    pub flood_rounds: u32,
    pub levels: Vec<Level>,
}

impl Tower {
    /// Compose `base` with each `(H, inner set, options)` in turn.
    pub fn new(base: MultiGraph, flood_rounds: u32, stages: Vec<(MultiGraph, AllPairsSet, ProductOptions)>) -> Result<Tower> {
        let base_layout = Layout::direct(&base);
        let mut levels: Vec<Level> = Vec::with_capacity(stages.len());
        for (i, (h, inner, opt)) in stages.into_iter().enumerate() {
            let g = levels.last().map_or(&base, |l| &l.product.z);
            let level = Level::new(g, inner, &h, opt).map_err(|e| Error::Level { level: i + 1, source: Box::new(e) })?;
            levels.push(level);
        }
        Ok(Tower { base, base_layout, flood_rounds, levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Network of level `j` (the base graph for `j = 0`).
    pub fn graph(&self, j: usize) -> &MultiGraph {
        if j == 0 {
            &self.base
        } else {
            &self.levels[j - 1].product.z
        }
    }

    pub fn top(&self) -> &MultiGraph {
        self.graph(self.depth())
    }

    /// Physical vertices holding one state of a level-`j` vertex.
    pub fn replication(&self, j: usize) -> usize {
        self.levels[j..].iter().map(|l| l.product.cloud_size()).product()
    }

    /// Walk length of the routing protocols at level `j`, in level-`j` rounds.
    pub fn rounds(&self, j: usize) -> u64 {
        if j == 0 {
            return self.flood_rounds as u64;
        }
        let l = &self.levels[j - 1];
        l.inner.pair_rounds() as u64 + self.rounds(j - 1) * l.transfer_rounds()
    }

    /// Physical rounds per round of the level-`j` network.
    pub fn tick(&self, j: usize) -> u64 {
        self.levels[j..].iter().map(|l| l.transfer_rounds()).product()
    }

    /// Longest message length on the physical wire for payloads of `len` bits.
    pub fn wire_len(&self, len: u32) -> u32 {
        len + self.depth() as u32
    }
}

/// Routing set of an outer permutation.
#[derive(Clone, Debug, PartialEq)]
pub enum OuterSet {
    Flood(FloodSet),
    Composed(Box<ComposedProtocolSet>),
}

/// Protocols `R(x, π(x))` on the level-`level` product for a permutation
/// `pi` of its vertices. Pair `x` is bound to the outer protocol
/// `R(cloud(x), π_i(cloud(x)))` of `outer[i]`, `i = decomposition.label[x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedProtocolSet {
    pub level: usize,
    pub pi: Permutation,
    pub decomposition: MatchingDecomposition,
    pub outer: Vec<OuterSet>,
}

/// Compose level `level` of `tower` for `pi`, asking `factory` for the
/// outer routing set of each matching.
pub fn compose(
    tower: &Tower,
    level: usize,
    pi: &Permutation,
    factory: &mut dyn FnMut(usize, &Permutation) -> Result<OuterSet>,
) -> Result<ComposedProtocolSet> {
    let wrap = |e| Error::Level { level, source: Box::new(e) };
    let l = tower.levels.get(level.wrapping_sub(1)).ok_or(Error::Parameter("no such level"))?;
    let decomposition = permutation_to_matchings(&l.product, pi).map_err(wrap)?;
    let outer = decomposition.matchings.iter().map(|p| factory(level - 1, p)).collect::<Result<Vec<_>>>()?;
    Ok(ComposedProtocolSet { level, pi: pi.clone(), decomposition, outer })
}

/// Compose every level down to flooding on the base graph.
pub fn compose_tower(tower: &Tower, level: usize, pi: &Permutation) -> Result<ComposedProtocolSet> {
    fn factory(tower: &Tower, j: usize, p: &Permutation) -> Result<OuterSet> {
        if j == 0 {
            flood_majority_perm(&tower.base, p, tower.flood_rounds)
                .map(OuterSet::Flood)
                .map_err(|e| Error::Level { level: 0, source: Box::new(e) })
        } else {
            compose(tower, j, p, &mut |jj, pp| factory(tower, jj, pp)).map(|s| OuterSet::Composed(Box::new(s)))
        }
    }
    compose(tower, level, pi, &mut |j, p| factory(tower, j, p))
}

/// Broadcast of the source value inside the source cloud of level `j`.
pub(crate) fn broadcast<W: Wire + ?Sized>(
    tower: &Tower,
    j: usize,
    x: usize,
    input: &[Msg],
    len: u32,
    start: u64,
    wire: &mut W,
) -> (Vec<Msg>, Counters) {
    let level = &tower.levels[j - 1];
    let (u, a) = level.product.split(x);
    let k = level.product.cloud_size();
    let r = input.len();
    let jobs: Vec<(usize, usize)> = (0..k).map(|b| (a, b)).collect();
    let mut inputs = Vec::with_capacity(k * r);
    for _ in 0..k {
        inputs.extend(input.iter().map(|m| m.envelope()));
    }
    let replicas = tower.replication(j);
    let (mut out, c) = level.inner.transfer_batch(level.cloud(u), &jobs, replicas, r / replicas, &inputs, len + 1, start, wire);
    out.iter_mut().for_each(|m| *m = m.unwrap_envelope());
    (out, c)
}

/// Flood from `u` on the base graph with one slot per replica.
pub(crate) fn base_flood<W: Wire + ?Sized>(
    tower: &Tower,
    set: &FloodSet,
    u: usize,
    input: &[Msg],
    len: u32,
    start: u64,
    wire: &mut W,
    record: bool,
) -> Execution {
    let g = &tower.base;
    let r = input.len();
    let sources = [u];
    let prog = Flood { sources: &sources, group: r };
    let mut inputs = vec![Msg::BOT; g.n() * r];
    inputs[u * r..(u + 1) * r].copy_from_slice(input);
    let spec = RunSpec { graph: g, layout: &tower.base_layout, width: r, len, rounds: set.rounds, start };
    execute(spec, &prog, &inputs, wire, record)
}

/// Result of one source's run at some level: decoded blocks at every
/// vertex of that level (replica blocks in physical order).
#[derive(Clone, Debug)]
pub struct SourceRun {
    pub outputs: Vec<Msg>,
    pub counters: Counters,
}

impl ComposedProtocolSet {
    /// Outer set bound to pair `x`.
    pub fn outer_of(&self, x: usize) -> &OuterSet {
        &self.outer[self.decomposition.label[x]]
    }

    /// Run the protocol from source `x` (with one input slot per replica)
    /// over `wire`, which carries edges of this level's product. Outputs are
    /// the decoded blocks at every vertex; `π(x)` reads its own block.
    ///
    /// The executions never depend on the destination, so `memo` may reuse
    /// a run of the same outer source with the same inputs.
    pub fn run_source(
        &self,
        tower: &Tower,
        x: usize,
        input: &[Msg],
        len: u32,
        start: u64,
        wire: &mut dyn Wire,
        memo: Option<&Memo>,
    ) -> SourceRun {
        let level = &tower.levels[self.level - 1];
        let (u, _) = level.product.split(x);
        let (outer_in, mut counters) = broadcast(tower, self.level, x, input, len, start, wire);
        let begin = start + counters.rounds;
        let mut lifted = LiftedWire::new(tower, self.level, wire, memo);
        let sub = match memo.and_then(|m| m.run(self.level - 1, u, &outer_in, len)) {
            Some(hit) => hit,
            None => {
                let run = match self.outer_of(x) {
                    OuterSet::Flood(fs) => {
                        let ex = base_flood(tower, fs, u, &outer_in, len, begin, &mut lifted, false);
                        SourceRun { outputs: ex.outputs, counters: ex.counters }
                    }
                    OuterSet::Composed(cs) => cs.run_source(tower, u, &outer_in, len, begin, &mut lifted, memo),
                };
                if let Some(m) = memo {
                    m.store_run(self.level - 1, u, &outer_in, len, &run);
                }
                run
            }
        };
        counters.add(&sub.counters);
        SourceRun { outputs: sub.outputs, counters }
    }

    /// Route `message` from every vertex to its image, each pair as its own
    /// run. Returns what each `π(x)` decoded, and per-pair counters.
    pub fn route(&self, tower: &Tower, message: Msg, len: u32, wire: &mut dyn Wire, memo: Option<&Memo>) -> (Vec<Msg>, Vec<Counters>) {
        assert_eq!(self.level, tower.depth(), "routing runs at the top level");
        let n = self.pi.len();
        let mut got = Vec::with_capacity(n);
        let mut counters = Vec::with_capacity(n);
        for x in 0..n {
            let run = self.run_source(tower, x, &[message], len, 0, wire, memo);
            got.push(run.outputs[self.pi.apply(x)]);
            counters.push(run.counters);
        }
        (got, counters)
    }
}
