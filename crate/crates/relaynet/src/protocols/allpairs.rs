use alloc::vec;
use alloc::vec::Vec;

use super::flood::{Flood, FloodSet};
use crate::engine::{execute, Counters, Layout, RunSpec, Wire};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, Permutation};
use crate::msg::{majority_by, Msg};
use crate::rng::{derive, seeded, SliceRandom};

/// A graph whose programs run over some wire, through `layout`.
#[derive(Clone, Copy, Debug)]
pub struct Embedded<'a> {
    pub graph: &'a MultiGraph,
    pub layout: &'a Layout,
}

/// Relay sets of an all-pairs set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relays {
    /// Every vertex relays every pair.
    All,
    /// `sets[u * n + v]` relays `(u, v)`, sorted.
    Sampled { size: usize, sets: Vec<Vec<usize>> },
}

/// Routing for every ordered pair of vertices.
///
/// `(a, b)` is carried in two phases of `rounds` rounds each: `a` floods
/// its message (one flood serves every `R(a, w)`), then every relay `w`
/// floods what it decoded towards `b`, and `b` takes the slotwise majority
/// over the relays (its own phase-one value counts as its vote). `(a, a)`
/// is the identity and costs nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct AllPairsSet {
    pub n: usize,
    pub rounds: u32,
    /// Matchings covering every ordered pair, with their routing sets.
    pub schedule: Vec<FloodSet>,
    pub relays: Relays,
}

/// A decomposition of the complete graph on `n` vertices into `n`
/// matchings (as involutions), covering every ordered pair including
/// `(a, a)`. Even `n` uses the identity plus the circle schedule; odd `n`
/// uses the circle schedule with byes.
pub fn round_robin(n: usize) -> Vec<Permutation> {
    if n <= 1 {
        return vec![Permutation::identity(n)];
    }
    let m = if n % 2 == 0 { n } else { n + 1 };
    let fixed = m - 1;
    let mut out = Vec::with_capacity(n);
    if n % 2 == 0 {
        out.push(Permutation::identity(n));
    }
    for r in 0..fixed {
        let mut img: Vec<usize> = (0..n).collect();
        let mut pair = |a: usize, b: usize| {
            if a < n && b < n {
                img[a] = b;
                img[b] = a;
            }
        };
        pair(fixed, r);
        for i in 1..m / 2 {
            pair((r + i) % fixed, (r + fixed - i) % fixed);
        }
        out.push(Permutation::new(img).expect("matching"));
    }
    out
}

/// Build an all-pairs set on `g` from a permutation routing construction.
/// Every routing set must use the same number of rounds.
pub fn all_pairs_from_perm(g: &MultiGraph, mut perm: impl FnMut(&MultiGraph, &Permutation) -> Result<FloodSet>) -> Result<AllPairsSet> {
    let schedule = round_robin(g.n()).iter().map(|pi| perm(g, pi)).collect::<Result<Vec<_>>>()?;
    let rounds = schedule[0].rounds;
    if schedule.iter().any(|s| s.rounds != rounds) {
        return Err(Error::Mismatch("routing sets use different round counts"));
    }
    Ok(AllPairsSet { n: g.n(), rounds, schedule, relays: Relays::All })
}

/// `s` of the `n` vertices drawn uniformly without replacement from the
/// stream `seed`, sorted.
pub fn sample_relays(n: usize, s: usize, seed: u64) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    let (head, _) = all.partial_shuffle(&mut seeded(seed), s);
    let mut pick = head.to_vec();
    pick.sort_unstable();
    pick
}

/// Replace the full relay set of every pair by `s` relays drawn uniformly
/// without replacement, independently per ordered pair: `(u, v)` draws
/// from the stream `derive(seed, u * n + v)`.
pub fn amplified_all_pairs(base: &AllPairsSet, s: usize, seed: u64) -> Result<AllPairsSet> {
    let n = base.n;
    if s == 0 || s > n {
        return Err(Error::Parameter("relay count outside 1..=|V|"));
    }
    let mut sets = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            sets.push(if u == v { Vec::new() } else { sample_relays(n, s, derive(seed, (u * n + v) as u64)) });
        }
    }
    Ok(AllPairsSet { relays: Relays::Sampled { size: s, sets }, ..base.clone() })
}

impl AllPairsSet {
    /// Relays of `(a, b)`, sorted.
    pub fn relays_of(&self, a: usize, b: usize) -> Vec<usize> {
        match &self.relays {
            Relays::All => (0..self.n).collect(),
            Relays::Sampled { sets, .. } => sets[a * self.n + b].clone(),
        }
    }

    /// Index of a matching in the schedule that contains `(a, b)`.
    pub fn matching_of(&self, a: usize, b: usize) -> usize {
        self.schedule.iter().position(|s| s.pi.apply(a) == b).expect("schedule covers all pairs")
    }

    /// Rounds used by one non-identity pair.
    pub fn pair_rounds(&self) -> u32 {
        2 * self.rounds
    }

    /// Carry a batch of pairs concurrently. Job `j` moves
    /// `inputs[j*r..(j+1)*r]`, `r = replicas * w`, from `jobs[j].0` to
    /// `jobs[j].1`. Every vertex is held by `replicas` independent replicas
    /// and frames on the wire are replica-major: a job's block lists the
    /// `w` slots of each replica in turn. Jobs from the same source with
    /// equal inputs share their first-phase flood.
    #[allow(clippy::too_many_arguments)]
    pub fn transfer_batch<W: Wire + ?Sized>(
        &self,
        net: Embedded<'_>,
        jobs: &[(usize, usize)],
        replicas: usize,
        w: usize,
        inputs: &[Msg],
        len: u32,
        start: u64,
        wire: &mut W,
    ) -> (Vec<Msg>, Counters) {
        let n = self.n;
        let r = replicas * w;
        assert_eq!(net.graph.n(), n);
        assert_eq!(inputs.len(), jobs.len() * r);
        let mut outputs = inputs.to_vec();
        let mut counters = Counters::default();
        let active: Vec<usize> = (0..jobs.len()).filter(|&j| jobs[j].0 != jobs[j].1).collect();
        if active.is_empty() {
            return (outputs, counters);
        }
        let frame = |j: usize| &inputs[j * r..(j + 1) * r];
        // slot of (replica, channel, i) in a frame with `chans` channels
        let at = |chans: usize, rep: usize, c: usize, i: usize| rep * chans * w + c * w + i;

        // phase one: one channel per distinct (source, input)
        let mut firsts: Vec<usize> = Vec::new();
        let mut group_of = vec![0usize; jobs.len()];
        for &j in &active {
            let hit = firsts.iter().position(|&f| jobs[f].0 == jobs[j].0 && frame(f) == frame(j));
            group_of[j] = hit.unwrap_or_else(|| {
                firsts.push(j);
                firsts.len() - 1
            });
        }
        let sources: Vec<usize> = firsts.iter().map(|&f| jobs[f].0).collect();
        let c1 = sources.len();
        let w1 = c1 * r;
        let mut in1 = vec![Msg::BOT; n * w1];
        for (c, &f) in firsts.iter().enumerate() {
            let a = jobs[f].0;
            for rep in 0..replicas {
                for i in 0..w {
                    in1[a * w1 + at(c1, rep, c, i)] = inputs[f * r + rep * w + i];
                }
            }
        }
        let prog = Flood { sources: &sources, group: w };
        let spec = RunSpec { graph: net.graph, layout: net.layout, width: w1, len, rounds: self.rounds, start };
        let ph1 = execute(spec, &prog, &in1, wire, false);
        counters.add(&ph1.counters);
        let first = |v: usize, j: usize, rep: usize, i: usize| ph1.outputs[v * w1 + at(c1, rep, group_of[j], i)];

        // phase two: one channel per (job, relay other than the target)
        let mut chan_src: Vec<usize> = Vec::new();
        let mut chan_of: Vec<(usize, usize)> = Vec::new();
        let mut relays_of: Vec<Vec<usize>> = vec![Vec::new(); jobs.len()];
        for &j in &active {
            let (a, b) = jobs[j];
            relays_of[j] = self.relays_of(a, b);
            for &v in &relays_of[j] {
                if v != b {
                    chan_of.push((j, v));
                    chan_src.push(v);
                }
            }
        }
        let c2 = chan_src.len();
        let w2 = c2 * r;
        let mut in2 = vec![Msg::BOT; n * w2];
        for (c, &(j, v)) in chan_of.iter().enumerate() {
            for rep in 0..replicas {
                for i in 0..w {
                    in2[v * w2 + at(c2, rep, c, i)] = first(v, j, rep, i);
                }
            }
        }
        let prog = Flood { sources: &chan_src, group: w };
        let start2 = start + ph1.counters.rounds;
        let spec = RunSpec { graph: net.graph, layout: net.layout, width: w2, len, rounds: self.rounds, start: start2 };
        let ph2 = execute(spec, &prog, &in2, wire, false);
        counters.add(&ph2.counters);

        let mut cursor = 0;
        let mut votes: Vec<Option<usize>> = Vec::new();
        for &j in &active {
            let b = jobs[j].1;
            votes.clear();
            for &v in &relays_of[j] {
                if v == b {
                    votes.push(None);
                } else {
                    votes.push(Some(cursor));
                    cursor += 1;
                }
            }
            for rep in 0..replicas {
                for i in 0..w {
                    let vote = |q: usize| match votes[q] {
                        None => first(b, j, rep, i),
                        Some(c) => ph2.outputs[b * w2 + at(c2, rep, c, i)],
                    };
                    outputs[j * r + rep * w + i] = majority_by(votes.len(), vote);
                }
            }
        }
        (outputs, counters)
    }

    /// Success of every ordered pair `(u, v)` carrying `probe`, row-major.
    /// Pairs from one source run together; sources run one after another.
    pub fn pair_outcomes<W: Wire + ?Sized>(&self, net: Embedded<'_>, probe: Msg, len: u32, wire: &mut W) -> (Vec<bool>, Counters) {
        let n = self.n;
        let mut ok = vec![true; n * n];
        let mut total = Counters::default();
        for u in 0..n {
            let jobs: Vec<(usize, usize)> = (0..n).filter(|&v| v != u).map(|v| (u, v)).collect();
            let inputs = vec![probe; jobs.len()];
            let (out, c) = self.transfer_batch(net, &jobs, 1, 1, &inputs, len, total.rounds, wire);
            total.add(&c);
            for (j, &(_, v)) in jobs.iter().enumerate() {
                ok[u * n + v] = out[j] == probe;
            }
        }
        (ok, total)
    }
}
