use alloc::vec::Vec;

use super::{base_flood, broadcast, ComposedProtocolSet, CorruptionAnalysis, ErasedTranscript, LiftedWire, OuterSet, Tower};
use crate::engine::{Execution, Wire};
use crate::msg::{Msg, Sym};

/// What went wrong at a replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Broadcast inside the source cloud did not deliver the message.
    Broadcast,
    /// A receipt differs from a known reference receipt.
    History,
    /// A sent message differs from a known reference message.
    Out,
    /// The decoded value differs from a known reference output.
    Output,
}

/// A disagreement between a composed run and the erased reference run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Vertex of Z (cloud vertex `(v, b)`).
    pub vertex: usize,
    /// Outer round, 1-based (0 for the broadcast and the final output).
    pub round: u32,
    /// Local port of the outer vertex.
    pub port: usize,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimulationReport {
    /// Positions compared.
    pub checked: u64,
    pub violations: Vec<Violation>,
}

/// A recorded single-level composed run: broadcast results in the source
/// cloud and the replicated outer execution with transcripts.
#[derive(Clone, Debug)]
pub struct PairTrace {
    pub source: usize,
    pub broadcast: Vec<Msg>,
    pub outer: Execution,
}

impl ComposedProtocolSet {
    /// Run from `x` with recording (no caching). Single-level towers only.
    pub fn trace_source(&self, tower: &Tower, x: usize, m: Msg, len: u32, wire: &mut dyn Wire) -> PairTrace {
        assert!(self.level == 1 && tower.depth() == 1, "tracing needs a single-level tower");
        let level = &tower.levels[0];
        let (u, _) = level.product.split(x);
        let (outer_in, c) = broadcast(tower, 1, x, &[m], len, 0, wire);
        let OuterSet::Flood(fs) = self.outer_of(x) else { unreachable!("level one has flooding outside") };
        let mut lifted = LiftedWire::new(tower, 1, wire, None);
        let outer = base_flood(tower, fs, u, &outer_in, len, c.rounds, &mut lifted, true);
        PairTrace { source: x, broadcast: outer_in, outer }
    }
}

/// Compare a recorded run against the erased reference run of its outer
/// protocol: for source `x` outside `D_u`, every replica `(v, b)` with `b`
/// outside `D_v` must agree with the reference wherever the reference is
/// not `★` (receipts, sent messages, final decoding).
pub fn verify_simulation(
    tower: &Tower,
    trace: &PairTrace,
    oracle: &ErasedTranscript,
    analysis: &CorruptionAnalysis,
    m: Msg,
) -> SimulationReport {
    let p = &tower.levels[0].product;
    let g = &p.g;
    let k = p.cloud_size();
    let x = trace.source;
    let (u, a) = p.split(x);
    let mut report = SimulationReport::default();
    if analysis.is_doomed(u, a) {
        return report;
    }
    for b in 0..k {
        if analysis.is_doomed(u, b) {
            continue;
        }
        report.checked += 1;
        if trace.broadcast[b] != m {
            report.violations.push(Violation { vertex: p.vertex(u, b), round: 0, port: 0, kind: ViolationKind::Broadcast });
        }
    }
    let ts = trace.outer.transcripts.as_ref().expect("recorded run");
    for v in 0..g.n() {
        let base = g.port_offset(v);
        for b in (0..k).filter(|&b| !analysis.is_doomed(v, b)) {
            let vertex = p.vertex(v, b);
            for (t, (recv, sent)) in ts[v].received.iter().zip(&ts[v].sent).enumerate() {
                for q in 0..g.degree(v) {
                    let checks = [
                        (recv[q * k + b], oracle.received[t][base + q], ViolationKind::History),
                        (sent[q * k + b], oracle.sent[t][base + q], ViolationKind::Out),
                    ];
                    for (got, want, kind) in checks {
                        if let Sym::Known(w) = want {
                            report.checked += 1;
                            if got != w {
                                report.violations.push(Violation { vertex, round: t as u32 + 1, port: q, kind });
                            }
                        }
                    }
                }
            }
            if let Sym::Known(w) = oracle.output[v] {
                report.checked += 1;
                if trace.outer.outputs[v * k + b] != w {
                    report.violations.push(Violation { vertex, round: 0, port: 0, kind: ViolationKind::Output });
                }
            }
        }
    }
    report
}

/// The three terms bounding the failing share of a single-level
/// composition: sources in their cloud's doomed set, destinations in
/// theirs, and pairs whose outer reference run is not guaranteed to
/// deliver (`outer_ok[x]`).
pub fn union_bound_terms(tower: &Tower, set: &ComposedProtocolSet, analysis: &CorruptionAnalysis, outer_ok: &[bool]) -> [f64; 3] {
    let p = &tower.levels.last().expect("at least one level").product;
    let n = set.pi.len() as f64;
    let mut t = [0usize; 3];
    for x in 0..set.pi.len() {
        let (u, a) = p.split(x);
        let (v, b) = p.split(set.pi.apply(x));
        t[0] += analysis.is_doomed(u, a) as usize;
        t[1] += analysis.is_doomed(v, b) as usize;
        t[2] += !outer_ok[x] as usize;
    }
    t.map(|c| c as f64 / n)
}
