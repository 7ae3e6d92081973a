use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{execute, Execution, Layout, RunSpec, VertexProgram, Wire};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, Permutation};
use crate::msg::{Msg, Sym};

/// Corrupted-edge fraction `ε` and failed or doomed fraction `ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceParams {
    pub epsilon: f64,
    pub nu: f64,
}

/// Majority flooding.
///
/// A frame is one block per replica; inside a block, slot `s` is a separate
/// channel whose source is `sources[s / group]`. The source of a channel sends its input every round.
/// Every other vertex sends its current belief. After each round the belief
/// becomes the strict majority of the non-`⊥` values that arrived on the
/// channel in that round, over all ports; if no value has a strict majority
/// the belief is kept. Beliefs start at `⊥`. The output is the belief after
/// the last round.
#[derive(Clone, Copy, Debug)]
pub struct Flood<'a> {
    pub sources: &'a [usize],
    pub group: usize,
}

impl Flood<'_> {
    fn source(&self, slot: usize) -> usize {
        self.sources[(slot % self.block()) / self.group]
    }

    /// Slots per replica.
    pub fn block(&self) -> usize {
        self.sources.len() * self.group
    }
}

impl VertexProgram for Flood<'_> {
    type State = Vec<Msg>;

    fn init(&self, v: usize, input: &[Msg]) -> Vec<Msg> {
        (0..input.len()).map(|s| if self.source(s) == v { input[s] } else { Msg::BOT }).collect()
    }

    fn out(&self, _: usize, state: &Vec<Msg>, _: u32, _: usize, frame: &mut [Msg]) {
        frame.copy_from_slice(state);
    }

    fn absorb(&self, v: usize, state: &mut Vec<Msg>, _: u32, receipts: &[Msg]) {
        let w = state.len();
        let deg = receipts.len() / w.max(1);
        for (s, belief) in state.iter_mut().enumerate() {
            if self.source(s) != v {
                let m = valued_majority(deg, |p| receipts[p * w + s]);
                if !m.is_bot() {
                    *belief = m;
                }
            }
        }
    }

    fn finish(&self, _: usize, state: &Vec<Msg>, output: &mut [Msg]) {
        output.copy_from_slice(state);
    }
}

/// Strict majority among the non-`⊥` entries; `⊥` if there are none or no
/// value has more than half of them.
pub fn valued_majority(n: usize, at: impl Fn(usize) -> Msg) -> Msg {
    let mut cand = Msg::BOT;
    let mut count = 0usize;
    let mut valued = 0usize;
    for i in 0..n {
        let m = at(i);
        if m.is_bot() {
            continue;
        }
        valued += 1;
        if count == 0 {
            cand = m;
            count = 1;
        } else if m == cand {
            count += 1;
        } else {
            count -= 1;
        }
    }
    if count == 0 {
        return Msg::BOT;
    }
    let hits = (0..n).filter(|&i| at(i) == cand).count();
    if 2 * hits > valued {
        cand
    } else {
        Msg::BOT
    }
}

/// The flooding belief update over receipts that may contain `★`, given
/// the previous belief: the value every filling of the `★` positions agrees
/// on, else `★`.
///
/// With `k` known non-`⊥` receipts, `c_x` of them equal to `x`, and `s`
/// erased ones, some filling makes `x` the strict majority iff
/// `2 c_x + s > k` (a value not present counts with `c_x = 0`), and every
/// filling does iff `2 c_x > k + s`. When no filling produces a majority the
/// previous belief stays, which is then the only outcome.
pub fn flood_star_out(receipts: &[Sym], prev: Sym) -> Sym {
    let mut known: Vec<Msg> = Vec::with_capacity(receipts.len());
    let mut stars = 0usize;
    for r in receipts {
        match r {
            Sym::Star => stars += 1,
            Sym::Known(m) if m.is_bot() => {}
            Sym::Known(m) => known.push(*m),
        }
    }
    let k = known.len();
    known.sort_unstable();
    let mut counts: Vec<(Msg, usize)> = Vec::new();
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j < k && known[j] == known[i] {
            j += 1;
        }
        counts.push((known[i], j - i));
        i = j;
    }
    if let Some(&(x, _)) = counts.iter().find(|&&(_, c)| 2 * c > k + stars) {
        return Sym::Known(x);
    }
    if let Sym::Known(p) = prev {
        if stars <= k && counts.iter().all(|&(x, c)| x == p || 2 * c + stars <= k) {
            return Sym::Known(p);
        }
    }
    Sym::Star
}

/// Majority flooding as a permutation routing set: `R(u, π(u))` floods from
/// `u` for `rounds` rounds and `π(u)` reads its belief.
#[derive(Clone, Debug, PartialEq)]
pub struct FloodSet {
    pub pi: Permutation,
    pub rounds: u32,
    /// Tolerance declared by the caller (measured, never assumed).
    pub declared: Option<ToleranceParams>,
}

/// Build the flooding set for `pi` on `g` with walk length `rounds`.
/// Fails if `g` is disconnected or `rounds` is below its diameter.
pub fn flood_majority_perm(g: &MultiGraph, pi: &Permutation, rounds: u32) -> Result<FloodSet> {
    if pi.len() != g.n() {
        return Err(Error::Mismatch("permutation size differs from |V(G)|"));
    }
    let diameter = g.diameter().ok_or(Error::Disconnected)?;
    if rounds < diameter || rounds == 0 {
        return Err(Error::WalkTooShort { rounds, diameter });
    }
    Ok(FloodSet { pi: pi.clone(), rounds, declared: None })
}

impl FloodSet {
    /// Flood the given per-source messages, all sources at once on separate
    /// channels. Returns what each `π(u)` decoded for `u`, and the run.
    pub fn run_all<W: Wire + ?Sized>(
        &self,
        g: &MultiGraph,
        layout: &Layout,
        messages: &[Msg],
        len: u32,
        wire: &mut W,
        record: bool,
    ) -> (Vec<Msg>, Execution) {
        let n = g.n();
        assert_eq!(messages.len(), n);
        let sources: Vec<usize> = (0..n).collect();
        let prog = Flood { sources: &sources, group: 1 };
        let mut inputs = vec![Msg::BOT; n * n];
        for u in 0..n {
            inputs[u * n + u] = messages[u];
        }
        let spec = RunSpec { graph: g, layout, width: n, len, rounds: self.rounds, start: 0 };
        let ex = execute(spec, &prog, &inputs, wire, record);
        let decoded = (0..n)
            .map(|u| {
                let d = self.pi.apply(u);
                ex.outputs[d * n + u]
            })
            .collect();
        (decoded, ex)
    }
}
