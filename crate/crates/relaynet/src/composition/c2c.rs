use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use hashbrown::HashMap;

use super::{SourceRun, Tower};
use crate::engine::{Counters, Transfer, Wire};
use crate::msg::{majority_by, Msg};

type TransferKey = (usize, usize, bool, u32, Vec<Msg>);
type RunKey = (usize, usize, u32, Vec<Msg>);

/// Cache of cloud-to-cloud transfers and source runs.
///
/// Only valid while the wire below is a fixed function of what is sent
/// (no adaptive rule, no recording), which makes both depend on their
/// inputs alone. Cached entries keep the counters of the computation they
/// replace.
#[derive(Default)]
pub struct Memo {
    transfers: RefCell<HashMap<TransferKey, (Vec<Msg>, Counters)>>,
    runs: RefCell<HashMap<RunKey, SourceRun>>,
    pub hits: Cell<u64>,
    pub misses: Cell<u64>,
}

impl Memo {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn run(&self, level: usize, source: usize, input: &[Msg], len: u32) -> Option<SourceRun> {
        let key = (level, source, len, input.to_vec());
        let hit = self.runs.borrow().get(&key).cloned();
        self.count(hit.is_some());
        hit
    }

    pub(crate) fn store_run(&self, level: usize, source: usize, input: &[Msg], len: u32, run: &SourceRun) {
        self.runs.borrow_mut().insert((level, source, len, input.to_vec()), run.clone());
    }

    /// Cached transfers and runs.
    pub fn entries(&self) -> (usize, usize) {
        (self.transfers.borrow().len(), self.runs.borrow().len())
    }

    fn count(&self, hit: bool) {
        let c = if hit { &self.hits } else { &self.misses };
        c.set(c.get() + 1);
    }
}

/// Carry `m_in` (one block per vertex of the source cloud) across a
/// super-edge of level `level`: gather at the source port with `P(b, e_1)`,
/// slotwise majority, one round over the parallel edges, slotwise majority
/// at the target port, scatter with `P(e_2, c)`.
///
/// Blocks are enveloped for transport, so the inner protocols run on
/// `len + 1` bits. `forward` goes from cloud `v` to cloud `w` of the
/// super-edge record.
pub fn cloud_to_cloud(
    tower: &Tower,
    level: usize,
    super_edge: usize,
    forward: bool,
    m_in: &[Msg],
    len: u32,
    start: u64,
    wire: &mut dyn Wire,
) -> (Vec<Msg>, Counters) {
    let l = &tower.levels[level - 1];
    let p = &l.product;
    let se = p.super_edges[super_edge];
    let (from, to) = if forward { (se.port_v, se.port_w) } else { (se.port_w, se.port_v) };
    let (cv, e1) = p.split(from);
    let (cw, e2) = p.split(to);
    let k = p.cloud_size();
    assert_eq!(m_in.len() % k, 0);
    let r = m_in.len() / k;
    let replicas = tower.replication(level);
    let w = r / replicas;
    let inner_len = len + 1;
    let mut counters = Counters::default();

    let jobs: Vec<(usize, usize)> = (0..k).map(|b| (b, e1)).collect();
    let sealed: Vec<Msg> = m_in.iter().map(|m| m.envelope()).collect();
    let (gathered, c) = l.inner.transfer_batch(l.cloud(cv), &jobs, replicas, w, &sealed, inner_len, start, wire);
    counters.add(&c);
    let at_port: Vec<Msg> = (0..r).map(|s| majority_by(k, |b| gathered[b * r + s])).collect();
    counters.work += (k * r) as u64 * inner_len as u64;

    let mult = se.multiplicity as usize;
    let items: Vec<Transfer> = (0..se.multiplicity).map(|c| Transfer { edge: se.z_edge, copy: c, from, to }).collect();
    let mut sent = Vec::with_capacity(mult * r);
    for _ in 0..mult {
        sent.extend_from_slice(&at_port);
    }
    let mut recv = vec![Msg::BOT; mult * r];
    let mut meter = Counters::default();
    let hop = wire.deliver(start + counters.rounds, &items, r, inner_len, &sent, &mut recv, &mut meter);
    counters.add(&meter);
    counters.rounds += hop;
    counters.work += 3 * (mult * r) as u64 * inner_len as u64;
    let landed: Vec<Msg> = (0..r).map(|s| majority_by(mult, |c| recv[c * r + s])).collect();

    let jobs: Vec<(usize, usize)> = (0..k).map(|c| (e2, c)).collect();
    let mut inputs = Vec::with_capacity(k * r);
    for _ in 0..k {
        inputs.extend_from_slice(&landed);
    }
    let (mut out, c) = l.inner.transfer_batch(l.cloud(cw), &jobs, replicas, w, &inputs, inner_len, start + counters.rounds, wire);
    counters.add(&c);
    out.iter_mut().for_each(|m| *m = m.unwrap_envelope());
    (out, counters)
}

/// The wire of a level's outer graph, realized by cloud-to-cloud transfers
/// over the wire of the level's product.
pub struct LiftedWire<'a> {
    tower: &'a Tower,
    level: usize,
    below: &'a mut dyn Wire,
    memo: Option<&'a Memo>,
}

impl<'a> LiftedWire<'a> {
    pub fn new(tower: &'a Tower, level: usize, below: &'a mut dyn Wire, memo: Option<&'a Memo>) -> Self {
        LiftedWire { tower, level, below, memo }
    }
}

impl Wire for LiftedWire<'_> {
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
        let p = &self.tower.levels[self.level - 1].product;
        for (i, t) in items.iter().enumerate() {
            let s = p.super_edge_of(t.edge, t.copy);
            let forward = t.from == p.super_edges[s].v;
            let m_in = &sent[i * width..(i + 1) * width];
            let key = self.memo.map(|_| (self.level, s, forward, len, m_in.to_vec()));
            let cached = match (self.memo, &key) {
                (Some(m), Some(k)) => {
                    let hit = m.transfers.borrow().get(k).cloned();
                    m.count(hit.is_some());
                    hit
                }
                _ => None,
            };
            let (out, c) = match cached {
                Some(v) => v,
                None => {
                    let v = cloud_to_cloud(self.tower, self.level, s, forward, m_in, len, at, self.below);
                    if let (Some(m), Some(k)) = (self.memo, key) {
                        m.transfers.borrow_mut().insert(k, v.clone());
                    }
                    v
                }
            };
            debug_assert_eq!(c.rounds, self.tower.tick(self.level - 1));
            recv[i * width..(i + 1) * width].copy_from_slice(&out);
            meter.work += c.work;
            meter.wire_slots += c.wire_slots;
            meter.faults += c.faults;
        }
        self.tower.tick(self.level - 1)
    }
}
