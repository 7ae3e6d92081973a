use std::collections::HashSet;

use proptest::prelude::*;
use relaynet::adversary::{
    exhaustive_adversary, sample_corruption, vertex_star, AdversaryWire, Behavior, BehaviorRule, CorruptionSet, Strategy as Spread, MENU,
};
use relaynet::engine::{execute, Layout, PerfectWire, RunSpec, Transcript, VertexProgram};
use relaynet::graph::{permutation_to_matchings, random_regular_graph, replacement_product, MultiGraph, Permutation, ProductOptions};
use relaynet::protocols::{flood_star_out, min_doomed_cover, round_robin, valued_majority};
use relaynet::rng::{derive, seeded};
use relaynet::{majority, Msg, Sym};

fn msg_from(code: u8) -> Msg {
    if code == 0 {
        Msg::BOT
    } else {
        Msg::val(code as u64)
    }
}

fn sym_from(code: u8) -> Sym {
    if code == 9 {
        Sym::Star
    } else {
        Sym::Known(msg_from(code))
    }
}

/// The concrete flooding update: strict majority of non-⊥ receipts, else keep.
fn concrete_update(receipts: &[Msg], prev: Msg) -> Msg {
    let m = valued_majority(receipts.len(), |i| receipts[i]);
    if m.is_bot() {
        prev
    } else {
        m
    }
}

/// Enumerate every filling of the starred positions (and of a starred
/// previous belief) over the present values, ⊥ and two fresh values.
fn brute_star(receipts: &[Sym], prev: Sym) -> Sym {
    let mut alphabet: Vec<Msg> = vec![Msg::BOT, Msg::val(100), Msg::val(101)];
    for s in receipts.iter().chain([&prev]) {
        if let Sym::Known(m) = s {
            if !alphabet.contains(m) {
                alphabet.push(*m);
            }
        }
    }
    let mut slots: Vec<usize> = receipts.iter().enumerate().filter(|(_, s)| **s == Sym::Star).map(|(i, _)| i).collect();
    let prev_star = prev == Sym::Star;
    if prev_star {
        slots.push(receipts.len());
    }
    let a = alphabet.len();
    let mut outcome: Option<Msg> = None;
    let total = a.pow(slots.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut filled: Vec<Msg> = receipts.iter().map(|s| s.known().unwrap_or(Msg::BOT)).collect();
        let mut p = prev.known().unwrap_or(Msg::BOT);
        for &i in &slots {
            let v = alphabet[c % a];
            c /= a;
            if i == receipts.len() {
                p = v;
            } else {
                filled[i] = v;
            }
        }
        let r = concrete_update(&filled, p);
        match outcome {
            None => outcome = Some(r),
            Some(o) if o != r => return Sym::Star,
            _ => {}
        }
    }
    Sym::Known(outcome.expect("at least one filling"))
}

/// Chatter that depends on the whole history, to exercise the engine.
struct Chatter;

impl VertexProgram for Chatter {
    type State = u64;

    fn init(&self, v: usize, input: &[Msg]) -> u64 {
        derive(v as u64, input[0].raw())
    }

    fn out(&self, _: usize, state: &u64, round: u32, port: usize, frame: &mut [Msg]) {
        for (i, m) in frame.iter_mut().enumerate() {
            *m = Msg::val(derive(*state, (round as u64) << 16 | (port as u64) << 4 | i as u64) & 0xFFFF);
        }
    }

    fn absorb(&self, _: usize, state: &mut u64, _: u32, receipts: &[Msg]) {
        for m in receipts {
            *state = derive(*state, m.raw());
        }
    }

    fn finish(&self, _: usize, state: &u64, output: &mut [Msg]) {
        output.iter_mut().for_each(|m| *m = Msg::val(*state & 0xFFFF));
    }
}

/// Sends a fixed function of (vertex, round, port), ignoring what it hears.
struct Oblivious;

impl VertexProgram for Oblivious {
    type State = ();

    fn init(&self, _: usize, _: &[Msg]) {}

    fn out(&self, v: usize, _: &(), round: u32, port: usize, frame: &mut [Msg]) {
        frame.iter_mut().for_each(|m| *m = Msg::val(derive(v as u64, (round as u64) << 8 | port as u64) & 0xFF));
    }

    fn absorb(&self, _: usize, _: &mut (), _: u32, _: &[Msg]) {}

    fn finish(&self, _: usize, _: &(), _: &mut [Msg]) {}
}

/// Check every receipt on an uncorrupted copy equals what its sender put on it.
fn receipts_match_sends(g: &MultiGraph, ts: &[Transcript], w: usize, set: &CorruptionSet) -> bool {
    for v in 0..g.n() {
        for (t, recv) in ts[v].received.iter().enumerate() {
            for (q, port) in g.ports_of(v).iter().enumerate() {
                if set.contains(g, port.edge, port.copy) {
                    continue;
                }
                let mate = g.port(port.mate);
                let mq = port.mate - g.port_offset(mate.vertex);
                if recv[q * w..(q + 1) * w] != ts[mate.vertex].sent[t][mq * w..(mq + 1) * w] {
                    return false;
                }
            }
        }
    }
    true
}

fn small_regular() -> impl Strategy<Value = (usize, usize, u64)> {
    (3usize..9, 1usize..5, any::<u64>()).prop_filter_map("feasible", |(half, d, seed)| {
        let n = 2 * half;
        (d < n).then_some((n, d, seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn star_extension_matches_enumeration(codes in prop::collection::vec(0u8..10, 1..6), prev in 0u8..10) {
        // codes 0 = ⊥, 1..=8 a small value alphabet, 9 = ★
        let codes: Vec<u8> = codes.into_iter().map(|c| if c > 3 && c < 9 { c % 3 + 1 } else { c }).collect();
        let receipts: Vec<Sym> = codes.iter().map(|&c| sym_from(c)).collect();
        let prev = sym_from(prev);
        prop_assert_eq!(flood_star_out(&receipts, prev), brute_star(&receipts, prev));
    }

    #[test]
    fn majority_is_strict(codes in prop::collection::vec(0u8..4, 1..12)) {
        let values: Vec<Msg> = codes.iter().map(|&c| msg_from(c)).collect();
        let expected = (0u8..4)
            .map(msg_from)
            .find(|m| 2 * values.iter().filter(|v| *v == m).count() > values.len())
            .unwrap_or(Msg::BOT);
        prop_assert_eq!(majority(&values), expected);
    }

    #[test]
    fn relay_majority_soundness(good in 1usize..40, bad in prop::collection::vec(0u8..4, 0..40)) {
        // more than half the relay paths are correct
        prop_assume!(good > bad.len());
        let m = Msg::val(7);
        let mut votes: Vec<Msg> = vec![m; good];
        votes.extend(bad.iter().map(|&c| msg_from(c)));
        prop_assert_eq!(majority(&votes), m);
    }

    #[test]
    fn round_robin_covers_each_pair_once(n in 1usize..24) {
        let rr = round_robin(n);
        prop_assert_eq!(rr.len(), n);
        let mut seen = vec![0usize; n * n];
        for p in &rr {
            for a in 0..n {
                prop_assert_eq!(p.apply(p.apply(a)), a);
                seen[a * n + p.apply(a)] += 1;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    prop_assert_eq!(seen[a * n + b], 1);
                }
            }
        }
    }

    #[test]
    fn product_is_balanced((n, d, seed) in small_regular(), k in 1usize..4) {
        prop_assume!(k < d && (d * k) % 2 == 0);
        let g = random_regular_graph(n, d, seed).unwrap();
        let h = random_regular_graph(d, k, seed ^ 1).unwrap();
        let p = replacement_product(&g, &h, ProductOptions::default()).unwrap();
        prop_assert_eq!(p.z.n(), n * d);
        prop_assert_eq!(p.z.regular_degree(), Some(2 * k));
        prop_assert_eq!(p.inner_edge_count(), p.cross_edge_count());
        let again = replacement_product(&g, &h, ProductOptions::default()).unwrap();
        prop_assert_eq!(&p.port_map, &again.port_map);
        // distinct port vertices within each cloud, each in the right cloud
        for u in 0..n {
            let ports: HashSet<usize> = (0..d).map(|i| p.port_vertex(u, i)).collect();
            prop_assert_eq!(ports.len(), d);
            prop_assert!(ports.iter().all(|&x| p.split(x).0 == u));
        }
        for se in &p.super_edges {
            prop_assert_eq!(p.split(se.port_v).0, se.v);
            prop_assert_eq!(p.split(se.port_w).0, se.w);
            prop_assert!(se.multiplicity >= 1);
        }
    }

    #[test]
    fn matchings_partition_pairs((n, d, seed) in small_regular(), pseed in any::<u64>()) {
        prop_assume!(d >= 3);
        let g = random_regular_graph(n, d, seed).unwrap();
        let h = MultiGraph::cycle(d);
        let p = replacement_product(&g, &h, ProductOptions::default()).unwrap();
        let pi = Permutation::random(p.z.n(), &mut seeded(pseed));
        let dec = permutation_to_matchings(&p, &pi).unwrap();
        prop_assert_eq!(dec.matchings.len(), d);
        let mut seen = 0;
        for (i, m) in dec.matchings.iter().enumerate() {
            prop_assert_eq!(m.len(), n);
            for x in dec.class(i) {
                prop_assert_eq!(pi.apply(x) / d, m.apply(x / d));
                seen += 1;
            }
            // one pair per cloud vertex row: each matching carries |V(G)| pairs
            prop_assert_eq!(dec.class(i).count(), n);
        }
        prop_assert_eq!(seen, p.z.n());
    }

    #[test]
    fn random_regular_is_reproducible((n, d, seed) in small_regular()) {
        let a = random_regular_graph(n, d, seed).unwrap();
        let b = random_regular_graph(n, d, seed).unwrap();
        prop_assert_eq!(a.validate_regular().unwrap(), d);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fault_free_fidelity_and_determinism((n, d, seed) in small_regular(), rounds in 1u32..5, w in 1usize..3) {
        let g = random_regular_graph(n, d, seed).unwrap();
        let layout = Layout::direct(&g);
        let inputs: Vec<Msg> = (0..n * w).map(|i| Msg::val(i as u64)).collect();
        let spec = RunSpec { graph: &g, layout: &layout, width: w, len: 16, rounds, start: 0 };
        let a = execute(spec, &Chatter, &inputs, &mut PerfectWire, true);
        let empty = CorruptionSet::empty(&g);
        let mut rule = BehaviorRule::Uniform(Behavior::Drop);
        let b = execute(spec, &Chatter, &inputs, &mut AdversaryWire::new(&g, &empty, &mut rule), true);
        let ta = a.transcripts.as_ref().unwrap();
        prop_assert!(receipts_match_sends(&g, ta, w, &empty));
        prop_assert_eq!(ta, b.transcripts.as_ref().unwrap());
        prop_assert_eq!(a.counters, b.counters);
        prop_assert_eq!(a.counters.rounds, rounds as u64);
        let longer = execute(RunSpec { len: 17, ..spec }, &Chatter, &inputs, &mut PerfectWire, false);
        prop_assert!(longer.counters.work > a.counters.work);
    }

    #[test]
    fn adversary_confined_to_corrupted_copies((n, d, seed) in small_regular(), frac in 0.0f64..0.5, b1 in 0usize..4, b2 in 0usize..4) {
        let g = random_regular_graph(n, d, seed).unwrap();
        let layout = Layout::direct(&g);
        let set = sample_corruption(&g, None, frac, Spread::Uniform, seed).unwrap();
        let inputs = vec![Msg::val(1); n];
        let spec = RunSpec { graph: &g, layout: &layout, width: 1, len: 16, rounds: 3, start: 0 };
        let mut r1 = BehaviorRule::Uniform(MENU[b1]);
        let mut r2 = BehaviorRule::Uniform(MENU[b2]);
        let x = execute(spec, &Chatter, &inputs, &mut AdversaryWire::new(&g, &set, &mut r1), true);
        prop_assert!(receipts_match_sends(&g, x.transcripts.as_ref().unwrap(), 1, &set));
        let y = execute(spec, &Oblivious, &inputs, &mut AdversaryWire::new(&g, &set, &mut r1), true);
        let z = execute(spec, &Oblivious, &inputs, &mut AdversaryWire::new(&g, &set, &mut r2), true);
        let (ty, tz) = (y.transcripts.unwrap(), z.transcripts.unwrap());
        for v in 0..n {
            for t in 0..3 {
                for (q, port) in g.ports_of(v).iter().enumerate() {
                    if !set.contains(&g, port.edge, port.copy) {
                        prop_assert_eq!(ty[v].received[t][q], tz[v].received[t][q]);
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_fraction_within_budget((n, d, seed) in small_regular(), eps in 0.0f64..=1.0, s in 0usize..2) {
        let g = random_regular_graph(n, d, seed).unwrap();
        let strategy = [Spread::Uniform, Spread::VertexStar][s];
        let set = sample_corruption(&g, None, eps, strategy, seed).unwrap();
        prop_assert!(set.fraction() <= eps + 1e-12);
        if strategy == Spread::Uniform {
            prop_assert_eq!(set.len(), relaynet::adversary::budget(eps, g.total_copies()));
        }
    }

    #[test]
    fn product_strategies_within_budget(seed in any::<u64>(), eps in 0.0f64..=1.0, s in 0usize..2) {
        let p = replacement_product(&MultiGraph::petersen(), &MultiGraph::cycle(4), ProductOptions::default()).unwrap();
        let strategy = [Spread::CloudConcentrated, Spread::SuperEdgeConcentrated][s];
        let set = sample_corruption(&p.z, Some(&p), eps, strategy, seed).unwrap();
        prop_assert!(set.fraction() <= eps + 1e-12);
    }

    #[test]
    fn vertex_star_is_exact_incidence((n, d, seed) in small_regular(), t in 1usize..4) {
        let g = random_regular_graph(n, d, seed).unwrap();
        let targets = relaynet::adversary::random_targets(n, t, seed);
        let set = vertex_star(&g, &targets).unwrap();
        let expected: HashSet<usize> = targets
            .iter()
            .flat_map(|&v| g.ports_of(v).iter().map(|p| g.copy_index(p.edge, p.copy)))
            .collect();
        let got: HashSet<usize> = set.indices().iter().copied().collect();
        prop_assert_eq!(got, expected);
        prop_assert!(set.len() <= d * targets.len());
    }

    #[test]
    fn larger_failure_sets_need_larger_covers(n in 2usize..7, bits in any::<u64>(), extra in any::<u64>()) {
        let small: Vec<bool> = (0..n * n).map(|i| i / n != i % n && bits >> i & 1 == 1).collect();
        let large: Vec<bool> = small.iter().enumerate().map(|(i, &f)| f || (i / n != i % n && extra >> i & 1 == 1)).collect();
        let (a, _) = min_doomed_cover(n, &small, 24);
        let (b, _) = min_doomed_cover(n, &large, 24);
        prop_assert!(a.len() <= b.len());
    }
}

#[test]
fn exhaustive_enumeration_has_no_repeats() {
    let g = MultiGraph::complete(4);
    let items: Vec<(Vec<usize>, String)> =
        exhaustive_adversary(&g, 2, &MENU, 1 << 20).unwrap().map(|(s, r)| (s.indices().to_vec(), format!("{r:?}"))).collect();
    let unique: HashSet<_> = items.iter().cloned().collect();
    assert_eq!(unique.len(), items.len());
    assert_eq!(items.len() as u128, relaynet::adversary::exhaustive_count(6, 2, 4));
}
