//! Corrupted edge copies and what they do to traffic.
//!
//! The adversary fixes a set of edge copies before the run. Every message
//! crossing a corrupted copy is rewritten by a [`BehaviorRule`]; uncorrupted
//! copies deliver exactly what was sent.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{Counters, Transfer, Wire};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, ProductGraph};
use crate::msg::Msg;
use crate::rng::{seeded, SliceRandom};

/// A set of corrupted edge copies of one graph, by dense copy index
/// (see [`MultiGraph::copy_index`]).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CorruptionSet {
    copies: Vec<usize>,
    total: usize,
    mask: Vec<u64>,
}

impl CorruptionSet {
    pub fn empty(g: &MultiGraph) -> Self {
        Self::from_indices(g, Vec::new()).expect("empty set")
    }

    /// From dense copy indices; duplicates are merged.
    pub fn from_indices(g: &MultiGraph, mut copies: Vec<usize>) -> Result<Self> {
        let total = g.total_copies();
        copies.sort_unstable();
        copies.dedup();
        if copies.last().is_some_and(|&c| c >= total) {
            return Err(Error::Parameter("corrupted copy does not exist"));
        }
        let mut mask = vec![0u64; total.div_ceil(64)];
        for &c in &copies {
            mask[c / 64] |= 1 << (c % 64);
        }
        Ok(CorruptionSet { copies, total, mask })
    }

    /// From `(edge, copy)` pairs.
    pub fn from_pairs(g: &MultiGraph, pairs: &[(usize, u32)]) -> Result<Self> {
        let mut idx = Vec::with_capacity(pairs.len());
        for &(e, c) in pairs {
            if e >= g.edges().len() || c >= g.edge(e).mult {
                return Err(Error::Parameter("corrupted copy does not exist"));
            }
            idx.push(g.copy_index(e, c));
        }
        Self::from_indices(g, idx)
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `|copies| / total copies`.
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.copies.len() as f64 / self.total as f64
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.copies
    }

    pub fn contains_index(&self, i: usize) -> bool {
        i < self.total && self.mask[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn contains(&self, g: &MultiGraph, edge: usize, copy: u32) -> bool {
        self.contains_index(g.copy_index(edge, copy))
    }

    /// `(edge, copy)` pairs in index order.
    pub fn pairs(&self, g: &MultiGraph) -> Vec<(usize, u32)> {
        self.copies.iter().map(|&i| g.copy_at(i)).collect()
    }
}

impl fmt::Debug for CorruptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CorruptionSet({}/{}: {:?})", self.copies.len(), self.total, self.copies)
    }
}

/// A fixed per-message rewrite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Behavior {
    /// Deliver `⊥`.
    Drop,
    /// Invert every payload bit; `⊥` stays `⊥`.
    BitFlip,
    /// Deliver the constant (truncated to the message length).
    Forge(u64),
}

/// First forging constant of the standard menu.
pub const FORGE_ZERO: u64 = 0;
/// Second forging constant of the standard menu (all ones after truncation).
pub const FORGE_ONES: u64 = u64::MAX;

/// The four behaviors used by exhaustive search and menu-relative analysis.
pub const MENU: [Behavior; 4] = [Behavior::Drop, Behavior::BitFlip, Behavior::Forge(FORGE_ZERO), Behavior::Forge(FORGE_ONES)];

impl Behavior {
    pub fn apply(self, sent: Msg, len: u32) -> Msg {
        let mask = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
        match self {
            Behavior::Drop => Msg::BOT,
            Behavior::BitFlip => match sent.value() {
                None => Msg::BOT,
                Some(x) => Msg::from_raw((x ^ mask) & mask),
            },
            Behavior::Forge(c) => Msg::from_raw(c & mask & (u64::MAX >> 1)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Behavior::Drop => "drop",
            Behavior::BitFlip => "bitflip",
            Behavior::Forge(FORGE_ZERO) => "forge0",
            Behavior::Forge(FORGE_ONES) => "forge1",
            Behavior::Forge(_) => "forge",
        }
    }

    pub fn parse(s: &str) -> Result<Behavior> {
        match s {
            "drop" => Ok(Behavior::Drop),
            "bitflip" => Ok(Behavior::BitFlip),
            "forge0" => Ok(Behavior::Forge(FORGE_ZERO)),
            "forge1" => Ok(Behavior::Forge(FORGE_ONES)),
            _ => Err(Error::Unknown("behavior")),
        }
    }
}

/// A message on a corrupted copy, as seen by an adaptive adversary.
#[derive(Clone, Copy, Debug)]
pub struct Observed {
    pub transfer: Transfer,
    /// Position of the message in its frame.
    pub slot: usize,
    pub sent: Msg,
}

/// A user-supplied adversary that sees all traffic on corrupted copies in
/// the current round before choosing what each copy delivers (rushing). Its
/// memory is shared by every corrupted copy.
pub trait AdaptiveRule {
    /// All corrupted traffic of the round, before any output is chosen.
    fn observe(&mut self, _round: u64, _traffic: &[Observed]) {}
    /// What the corrupted copy delivers for one observed message.
    fn respond(&mut self, round: u64, seen: &Observed, len: u32) -> Msg;
}

/// How corrupted copies behave.
pub enum BehaviorRule {
    /// Every corrupted copy uses the same behavior.
    Uniform(Behavior),
    /// Per-copy behaviors keyed by dense copy index; sorted by index.
    PerCopy(Vec<(usize, Behavior)>),
    Adaptive(Box<dyn AdaptiveRule>),
}

impl BehaviorRule {
    /// Whether delivery is a fixed function of the sent message, so equal
    /// inputs always produce equal outputs.
    pub fn is_oblivious(&self) -> bool {
        !matches!(self, BehaviorRule::Adaptive(_))
    }

    fn behavior_of(&self, index: usize) -> Option<Behavior> {
        match self {
            BehaviorRule::Uniform(b) => Some(*b),
            BehaviorRule::PerCopy(list) => list.binary_search_by_key(&index, |p| p.0).ok().map(|i| list[i].1),
            BehaviorRule::Adaptive(_) => None,
        }
    }

    pub fn label(&self) -> alloc::string::String {
        use alloc::string::ToString;
        match self {
            BehaviorRule::Uniform(b) => b.name().to_string(),
            BehaviorRule::PerCopy(list) => {
                let mut s = alloc::string::String::new();
                for (i, (_, b)) in list.iter().enumerate() {
                    if i > 0 {
                        s.push('+');
                    }
                    s.push_str(b.name());
                }
                if s.is_empty() {
                    s.push_str("none");
                }
                s
            }
            BehaviorRule::Adaptive(_) => "adaptive".to_string(),
        }
    }
}

impl fmt::Debug for BehaviorRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BehaviorRule::Uniform(b) => write!(f, "Uniform({b:?})"),
            BehaviorRule::PerCopy(l) => write!(f, "PerCopy({l:?})"),
            BehaviorRule::Adaptive(_) => f.write_str("Adaptive"),
        }
    }
}

/// One line of a transcript dump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DumpLine {
    pub round: u64,
    pub vertex: usize,
    pub edge: usize,
    pub copy: u32,
    pub sent: Msg,
    pub received: Msg,
}

/// The physical wire of a graph under an adversary.
pub struct AdversaryWire<'a> {
    pub graph: &'a MultiGraph,
    pub set: &'a CorruptionSet,
    pub rule: &'a mut BehaviorRule,
    pub dump: Option<Vec<DumpLine>>,
    observed: Vec<Observed>,
}

impl<'a> AdversaryWire<'a> {
    pub fn new(graph: &'a MultiGraph, set: &'a CorruptionSet, rule: &'a mut BehaviorRule) -> Self {
        AdversaryWire { graph, set, rule, dump: None, observed: Vec::new() }
    }

    pub fn with_dump(mut self) -> Self {
        self.dump = Some(Vec::new());
        self
    }
}

impl Wire for AdversaryWire<'_> {
    fn deliver(
        &mut self,
        at: u64,
        items: &[Transfer],
        width: usize,
        len: u32,
        sent: &[Msg],
        recv: &mut [Msg],
        meter: &mut Counters,
    ) -> u64 {
        recv.copy_from_slice(sent);
        meter.wire_slots += sent.len() as u64;
        let round = at + 1;
        if !self.set.is_empty() {
            self.observed.clear();
            for (i, t) in items.iter().enumerate() {
                let idx = self.graph.copy_index(t.edge, t.copy);
                if !self.set.contains_index(idx) {
                    continue;
                }
                let frame = &mut recv[i * width..(i + 1) * width];
                match self.rule.behavior_of(idx) {
                    Some(b) => frame.iter_mut().for_each(|m| *m = b.apply(*m, len)),
                    None => {
                        for s in 0..width {
                            self.observed.push(Observed { transfer: *t, slot: i * width + s, sent: frame[s] });
                        }
                    }
                }
            }
            if let BehaviorRule::Adaptive(rule) = self.rule {
                if !self.observed.is_empty() {
                    rule.observe(round, &self.observed);
                    for o in &self.observed {
                        let m = rule.respond(round, o, len);
                        recv[o.slot] = if m.fits(len) { m } else { Msg::BOT };
                    }
                }
            }
        }
        if let Some(d) = self.dump.as_mut() {
            for (i, t) in items.iter().enumerate() {
                for s in 0..width {
                    d.push(DumpLine {
                        round,
                        vertex: t.from,
                        edge: t.edge,
                        copy: t.copy,
                        sent: sent[i * width + s],
                        received: recv[i * width + s],
                    });
                }
            }
        }
        1
    }
}

/// Corruption strategies for [`sample_corruption`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Uniform,
    VertexStar,
    CloudConcentrated,
    SuperEdgeConcentrated,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::VertexStar => "vertex-star",
            Strategy::CloudConcentrated => "cloud",
            Strategy::SuperEdgeConcentrated => "super-edge",
        }
    }

    pub fn parse(s: &str) -> Result<Strategy> {
        match s {
            "uniform" | "uniform-random" => Ok(Strategy::Uniform),
            "vertex-star" => Ok(Strategy::VertexStar),
            "cloud" | "cloud-concentrated" => Ok(Strategy::CloudConcentrated),
            "super-edge" | "super-edge-concentrated" => Ok(Strategy::SuperEdgeConcentrated),
            _ => Err(Error::Unknown("strategy")),
        }
    }
}

/// `⌊ε · copies⌋`, robust to the representation error of `ε`.
pub fn budget(eps: f64, copies: usize) -> usize {
    let raw = eps * copies as f64;
    let r = libm::round(raw);
    let k = if (raw - r).abs() < 1e-9 { r } else { libm::floor(raw) };
    (k as usize).min(copies)
}

/// Pick corrupted copies of `net` with budget `⌊ε · copies⌋`.
///
/// `uniform` hits exactly the budget. `vertex-star` adds every copy at
/// randomly ordered vertices while the budget allows, so it may stay below.
/// `cloud` and `super-edge` need the product structure (`product.z` must be
/// `net`): `cloud` fills whole clouds and spends the remainder inside the
/// next cloud; `super-edge` corrupts a strict majority of randomly chosen
/// bundles, the last one possibly partially.
pub fn sample_corruption(
    net: &MultiGraph,
    product: Option<&ProductGraph>,
    eps: f64,
    strategy: Strategy,
    seed: u64,
) -> Result<CorruptionSet> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Parameter("epsilon outside [0, 1]"));
    }
    let total = net.total_copies();
    let k = budget(eps, total);
    let mut rng = seeded(seed);
    let chosen: Vec<usize> = match strategy {
        Strategy::Uniform => {
            let mut all: Vec<usize> = (0..total).collect();
            let (head, _) = all.partial_shuffle(&mut rng, k);
            head.to_vec()
        }
        Strategy::VertexStar => {
            let mut order: Vec<usize> = (0..net.n()).collect();
            order.shuffle(&mut rng);
            let mut taken = vec![false; total];
            let mut count = 0;
            for v in order {
                let fresh: Vec<usize> = net
                    .ports_of(v)
                    .iter()
                    .map(|p| net.copy_index(p.edge, p.copy))
                    .filter(|&i| !taken[i])
                    .collect::<alloc::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                if count + fresh.len() <= k {
                    count += fresh.len();
                    for i in fresh {
                        taken[i] = true;
                    }
                }
            }
            (0..total).filter(|&i| taken[i]).collect()
        }
        Strategy::CloudConcentrated => {
            let p = product.ok_or(Error::Parameter("cloud strategy needs a product graph"))?;
            let mut clouds: Vec<usize> = (0..p.clouds()).collect();
            clouds.shuffle(&mut rng);
            let mut out = Vec::with_capacity(k);
            for u in clouds {
                let mut inner: Vec<usize> = Vec::new();
                for (he, e) in p.h.edges().iter().enumerate() {
                    for c in 0..e.mult {
                        inner.push(net.copy_index(p.inner_edge(u, he), c));
                    }
                }
                let room = k - out.len();
                if room == 0 {
                    break;
                }
                if inner.len() > room {
                    inner.shuffle(&mut rng);
                    inner.truncate(room);
                }
                out.extend(inner);
            }
            out
        }
        Strategy::SuperEdgeConcentrated => {
            let p = product.ok_or(Error::Parameter("super-edge strategy needs a product graph"))?;
            let mut order: Vec<usize> = (0..p.super_edges.len()).collect();
            order.shuffle(&mut rng);
            let mut out = Vec::with_capacity(k);
            for s in order {
                let se = p.super_edges[s];
                let want = (se.multiplicity as usize / 2 + 1).min(k - out.len());
                if want == 0 {
                    break;
                }
                let mut copies: Vec<u32> = (0..se.multiplicity).collect();
                copies.shuffle(&mut rng);
                for &c in &copies[..want] {
                    out.push(net.copy_index(se.z_edge, c));
                }
            }
            out
        }
    };
    CorruptionSet::from_indices(net, chosen)
}

/// Exactly the copies incident to `targets`.
pub fn vertex_star(net: &MultiGraph, targets: &[usize]) -> Result<CorruptionSet> {
    let mut idx = Vec::new();
    for &v in targets {
        if v >= net.n() {
            return Err(Error::VertexRange { vertex: v, n: net.n() });
        }
        idx.extend(net.ports_of(v).iter().map(|p| net.copy_index(p.edge, p.copy)));
    }
    CorruptionSet::from_indices(net, idx)
}

/// Random vertices to target when emulating vertex corruption.
pub fn random_targets(n: usize, t: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut all: Vec<usize> = (0..n).collect();
    let (head, _) = all.partial_shuffle(&mut rng, t.min(n));
    let mut v = head.to_vec();
    v.sort_unstable();
    v
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of adversaries [`exhaustive_adversary`] yields:
/// `Σ_{j≤k} C(copies, j) · |menu|^j`.
pub fn exhaustive_count(copies: usize, k: usize, menu: usize) -> u128 {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for j in 0..=k {
        total = total.saturating_add(binomial(copies as u128, j as u128).saturating_mul(pow));
        pow = pow.saturating_mul(menu as u128);
    }
    total
}

/// Every corruption set of at most `k` copies, each corrupted copy running
/// every behavior of `menu` independently. Sets come in increasing size,
/// lexicographic within a size; behaviors vary fastest. Refuses (rather than
/// truncating) when the count exceeds `budget`.
pub fn exhaustive_adversary<'a>(net: &'a MultiGraph, k: usize, menu: &'a [Behavior], budget: u128) -> Result<ExhaustiveAdversary<'a>> {
    let required = exhaustive_count(net.total_copies(), k, menu.len());
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    Ok(ExhaustiveAdversary { net, k, menu, size: 0, combo: Vec::new(), choice: Vec::new(), done: false })
}

/// Iterator returned by [`exhaustive_adversary`].
pub struct ExhaustiveAdversary<'a> {
    net: &'a MultiGraph,
    k: usize,
    menu: &'a [Behavior],
    size: usize,
    combo: Vec<usize>,
    choice: Vec<usize>,
    done: bool,
}

impl ExhaustiveAdversary<'_> {
    fn advance(&mut self) {
        let n = self.net.total_copies();
        let m = self.menu.len();
        // behaviors first
        for i in (0..self.size).rev() {
            if self.choice[i] + 1 < m {
                self.choice[i] += 1;
                for c in &mut self.choice[i + 1..] {
                    *c = 0;
                }
                return;
            }
        }
        // then the next combination of the same size
        for c in &mut self.choice {
            *c = 0;
        }
        let s = self.size;
        for i in (0..s).rev() {
            if self.combo[i] < n - s + i {
                self.combo[i] += 1;
                for j in i + 1..s {
                    self.combo[j] = self.combo[j - 1] + 1;
                }
                return;
            }
        }
        // then the next size
        self.size += 1;
        if self.size > self.k || self.size > n || m == 0 {
            self.done = true;
            return;
        }
        self.combo = (0..self.size).collect();
        self.choice = vec![0; self.size];
    }
}

impl Iterator for ExhaustiveAdversary<'_> {
    type Item = (CorruptionSet, BehaviorRule);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let set = CorruptionSet::from_indices(self.net, self.combo.clone()).expect("valid indices");
        let rule = BehaviorRule::PerCopy(self.combo.iter().zip(&self.choice).map(|(&c, &b)| (c, self.menu[b])).collect());
        self.advance();
        Some((set, rule))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{replacement_product, ProductOptions};

    #[test]
    fn budget_floor() {
        assert_eq!(budget(0.1, 240), 24);
        assert_eq!(budget(0.29, 100), 29);
        assert_eq!(budget(0.0, 100), 0);
        assert_eq!(budget(0.015, 100), 1);
    }

    #[test]
    fn behaviors_respect_length() {
        assert_eq!(Behavior::BitFlip.apply(Msg::val(0b1010), 4), Msg::val(0b0101));
        assert_eq!(Behavior::BitFlip.apply(Msg::BOT, 4), Msg::BOT);
        assert_eq!(Behavior::Forge(FORGE_ONES).apply(Msg::val(3), 5), Msg::val(31));
        assert_eq!(Behavior::Drop.apply(Msg::val(3), 5), Msg::BOT);
    }

    #[test]
    fn exhaustive_counts() {
        let g = MultiGraph::new(2, vec![crate::graph::Edge { u: 0, v: 1, mult: 12 }]).unwrap();
        assert_eq!(exhaustive_adversary(&g, 0, &MENU, 10).unwrap().count(), 1);
        assert_eq!(exhaustive_adversary(&g, 1, &MENU, 100).unwrap().count(), 49);
        let z = replacement_product(&MultiGraph::complete(4), &MultiGraph::cycle(3), ProductOptions::default()).unwrap();
        assert_eq!(exhaustive_count(24, 2, 4), 4513);
        assert_eq!(exhaustive_adversary(&z.z, 2, &MENU, 10_000).unwrap().count(), 4513);
        assert!(matches!(exhaustive_adversary(&z.z, 2, &MENU, 4512), Err(Error::Budget { .. })));
    }

    #[test]
    fn uniform_hits_budget() {
        let g = crate::graph::random_regular_graph(80, 6, 2).unwrap();
        assert_eq!(g.total_copies(), 240);
        let s = sample_corruption(&g, None, 0.1, Strategy::Uniform, 5).unwrap();
        assert_eq!(s.len(), 24);
        assert!(sample_corruption(&g, None, 0.0, Strategy::Uniform, 5).unwrap().is_empty());
        assert!(sample_corruption(&g, None, 1.5, Strategy::Uniform, 5).is_err());
    }
}
