use alloc::vec::Vec;

use crate::graph::MultiGraph;
use crate::msg::{Msg, Sym};
use crate::protocols::{flood_star_out, FloodSet};

/// Reference run of a flooding protocol in which every message on an
/// erased edge copy is `★`, and every vertex sends `σ` only when all
/// fillings of the `★` entries of its history make it send `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasedTranscript {
    /// `received[t][q]`: what global port `q` receives in round `t+1`.
    pub received: Vec<Vec<Sym>>,
    /// `sent[t][q]`: what global port `q` sends in round `t+1` (`M_t`).
    pub sent: Vec<Vec<Sym>>,
    /// Final belief of every vertex; `output[π(u)]` is `M_T(π(u))`.
    pub output: Vec<Sym>,
}

impl ErasedTranscript {
    /// The source's message is guaranteed at `v`.
    pub fn delivers(&self, v: usize, m: Msg) -> bool {
        self.output[v] == Sym::Known(m)
    }
}

/// Erased run of `set`'s flood from `source` with message `m` on `g`.
/// `erased[i]` marks dense copy index `i` of `g`.
pub fn erased_oracle(g: &MultiGraph, set: &FloodSet, erased: &[bool], source: usize, m: Msg) -> ErasedTranscript {
    assert_eq!(erased.len(), g.total_copies());
    let n = g.n();
    let ports = g.all_ports();
    let mut belief: Vec<Sym> = (0..n).map(|v| Sym::Known(if v == source { m } else { Msg::BOT })).collect();
    let mut received = Vec::with_capacity(set.rounds as usize);
    let mut sent = Vec::with_capacity(set.rounds as usize);
    let cut: Vec<bool> = ports.iter().map(|p| erased[g.copy_index(p.edge, p.copy)]).collect();
    for _ in 0..set.rounds {
        let out: Vec<Sym> = ports.iter().zip(&cut).map(|(p, &c)| if c { Sym::Star } else { belief[p.vertex] }).collect();
        let inn: Vec<Sym> = ports.iter().map(|p| out[p.mate]).collect();
        for v in 0..n {
            if v != source {
                belief[v] = flood_star_out(&inn[g.port_range(v)], belief[v]);
            }
        }
        sent.push(out);
        received.push(inn);
    }
    ErasedTranscript { received, sent, output: belief }
}
