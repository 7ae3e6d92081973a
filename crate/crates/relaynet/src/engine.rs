//! Round-synchronous execution of per-vertex programs.
//!
//! Every round each vertex emits one message frame per port, the frames
//! cross the [`Wire`] together, and each vertex absorbs what arrived on its
//! ports in canonical port order. A frame holds `width` message slots; most
//! protocols use one slot, flooding uses one slot per source or per replica.
//!
//! A program's state is a fold of its transcript (input followed by the
//! receipts of every round), so `out` and `finish` depend only on the
//! vertex's own history.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::MultiGraph;
use crate::msg::Msg;

/// One directed use of an edge copy, in the coordinates of the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transfer {
    pub edge: usize,
    pub copy: u32,
    pub from: usize,
    pub to: usize,
}

/// Complexity counters. One work unit is one bit read or written by a
/// program invocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub rounds: u64,
    pub work: u64,
    /// Slots of edge traffic carried by the lowest wire.
    pub wire_slots: u64,
    /// Frames replaced by `⊥` because a program emitted an oversized payload.
    pub faults: u64,
}

impl Counters {
    pub fn add(&mut self, other: &Counters) {
        self.rounds += other.rounds;
        self.work += other.work;
        self.wire_slots += other.wire_slots;
        self.faults += other.faults;
    }
}

/// Something that moves frames along edge copies.
pub trait Wire {
    /// Carry one synchronous round starting at base round `at`. `sent` and
    /// `recv` hold `width` slots per item. Returns the number of base rounds
    /// the carry took.
    fn deliver(&mut self, at: u64, items: &[Transfer], width: usize, len: u32, sent: &[Msg], recv: &mut [Msg], meter: &mut Counters)
        -> u64;
}

/// A lossless wire.
#[derive(Clone, Copy, Debug, Default)]
pub struct PerfectWire;

impl Wire for PerfectWire {
    fn deliver(&mut self, _: u64, _: &[Transfer], _: usize, _: u32, sent: &[Msg], recv: &mut [Msg], meter: &mut Counters) -> u64 {
        recv.copy_from_slice(sent);
        meter.wire_slots += sent.len() as u64;
        1
    }
}

/// Per-port transfer table for running a graph's programs over a wire.
/// Item `i` is the transfer out of global port `i`.
#[derive(Clone, Debug)]
pub struct Layout {
    pub items: Vec<Transfer>,
}

impl Layout {
    /// The graph is the wire graph.
    pub fn direct(g: &MultiGraph) -> Self {
        Self::mapped(g, |x| x, |e, c| (e, c))
    }

    /// Vertices and edge copies of `g` renamed into wire coordinates.
    pub fn mapped(g: &MultiGraph, vertex: impl Fn(usize) -> usize, edge: impl Fn(usize, u32) -> (usize, u32)) -> Self {
        let items = g
            .all_ports()
            .iter()
            .map(|p| {
                let (e, c) = edge(p.edge, p.copy);
                Transfer { edge: e, copy: c, from: vertex(p.vertex), to: vertex(p.neighbor) }
            })
            .collect();
        Layout { items }
    }
}

/// Per-vertex behavior of a protocol.
pub trait VertexProgram {
    type State;
    /// State before round 1; `input` has one entry per slot (`⊥` if none).
    fn init(&self, v: usize, input: &[Msg]) -> Self::State;
    /// Frame sent on local port `port` in round `round` (1-based).
    fn out(&self, v: usize, state: &Self::State, round: u32, port: usize, frame: &mut [Msg]);
    /// Fold in the frames received in `round`, port by port.
    fn absorb(&self, v: usize, state: &mut Self::State, round: u32, receipts: &[Msg]);
    /// Decoded output after the last round.
    fn finish(&self, v: usize, state: &Self::State, output: &mut [Msg]);
}

/// Everything a vertex saw and sent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub input: Vec<Msg>,
    /// `received[t]` holds round `t+1` receipts, `width` slots per port.
    pub received: Vec<Vec<Msg>>,
    /// `sent[t]` holds round `t+1` frames, `width` slots per port.
    pub sent: Vec<Vec<Msg>>,
}

/// Shape of one execution.
#[derive(Clone, Copy, Debug)]
pub struct RunSpec<'a> {
    pub graph: &'a MultiGraph,
    pub layout: &'a Layout,
    pub width: usize,
    /// Message length in bits on this wire.
    pub len: u32,
    pub rounds: u32,
    /// Base round at which the execution starts.
    pub start: u64,
}

#[derive(Clone, Debug)]
pub struct Execution {
    /// `width` slots per vertex.
    pub outputs: Vec<Msg>,
    pub counters: Counters,
    pub transcripts: Option<Vec<Transcript>>,
}

/// Run `programs` for `spec.rounds` rounds. `inputs` holds `width` slots per
/// vertex. With `record` set, full transcripts are kept.
pub fn execute<P: VertexProgram, W: Wire + ?Sized>(
    spec: RunSpec<'_>,
    programs: &P,
    inputs: &[Msg],
    wire: &mut W,
    record: bool,
) -> Execution {
    let g = spec.graph;
    let w = spec.width;
    let n = g.n();
    assert_eq!(inputs.len(), n * w, "one input frame per vertex");
    let ports = g.all_ports().len();
    assert_eq!(spec.layout.items.len(), ports, "layout does not match graph");
    let bits = spec.len as u64;
    let mut counters = Counters::default();
    let mut states: Vec<P::State> = (0..n).map(|v| programs.init(v, &inputs[v * w..(v + 1) * w])).collect();
    let mut transcripts =
        record.then(|| (0..n).map(|v| Transcript { input: inputs[v * w..(v + 1) * w].to_vec(), ..Default::default() }).collect::<Vec<_>>());
    let mut sent = vec![Msg::BOT; ports * w];
    let mut recv = vec![Msg::BOT; ports * w];
    let mut inbox = Vec::with_capacity(g.max_degree() * w);
    let mut clock = spec.start;
    for t in 1..=spec.rounds {
        for v in 0..n {
            let base = g.port_offset(v);
            for p in 0..g.degree(v) {
                let frame = &mut sent[(base + p) * w..(base + p + 1) * w];
                programs.out(v, &states[v], t, p, frame);
                for m in frame.iter_mut() {
                    if !m.fits(spec.len) {
                        *m = Msg::BOT;
                        counters.faults += 1;
                    }
                }
                counters.work += 2 * w as u64 * bits;
            }
        }
        clock += wire.deliver(clock, &spec.layout.items, w, spec.len, &sent, &mut recv, &mut counters);
        for v in 0..n {
            inbox.clear();
            for q in g.port_range(v) {
                let from = g.port(q).mate;
                inbox.extend_from_slice(&recv[from * w..(from + 1) * w]);
            }
            programs.absorb(v, &mut states[v], t, &inbox);
            counters.work += inbox.len() as u64 * bits;
            if let Some(ts) = transcripts.as_mut() {
                let r = g.port_range(v);
                ts[v].received.push(inbox.clone());
                ts[v].sent.push(sent[r.start * w..r.end * w].to_vec());
            }
        }
    }
    let mut outputs = vec![Msg::BOT; n * w];
    for v in 0..n {
        programs.finish(v, &states[v], &mut outputs[v * w..(v + 1) * w]);
        counters.work += w as u64 * bits;
    }
    counters.rounds = clock - spec.start;
    Execution { outputs, counters, transcripts }
}
