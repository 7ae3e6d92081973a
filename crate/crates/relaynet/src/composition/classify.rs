use alloc::vec;
use alloc::vec::Vec;

use super::Tower;
use crate::adversary::{AdversaryWire, Behavior, BehaviorRule, CorruptionSet};
use crate::protocols::min_doomed_cover;

/// Corruption seen through the cloud structure of the top level.
///
/// A cloud is bad when its corrupted share of inner copies is at least
/// `√(2ε)` (and positive). `D_v` is a smallest vertex set touching every
/// failing inner pair of cloud `v`, where a pair fails if it fails under
/// the actual rule (when that rule is oblivious) or under any behavior of
/// the menu applied to all of the cloud's corrupted copies. A super-edge is
/// corrupted when an end cloud is bad, a port is doomed, or at least a
/// `√(2ε)` (positive) share of its parallel copies is corrupted.
#[derive(Clone, Debug, PartialEq)]
pub struct CorruptionAnalysis {
    /// Corrupted copies and all copies of the top network (`ε = k / N`).
    pub corrupted: usize,
    pub copies: usize,
    pub bad_clouds: Vec<bool>,
    /// Sorted inner indices per cloud.
    pub doomed: Vec<Vec<usize>>,
    /// False if some `D_v` came from the greedy fallback.
    pub doomed_exact: bool,
    /// Per super-edge.
    pub corrupted_super_edges: Vec<bool>,
    /// Corrupted inner copies per cloud and corrupted copies per super-edge.
    pub cloud_hits: Vec<usize>,
    pub bundle_hits: Vec<usize>,
    pub cloud_size: usize,
}

/// `hits / size >= √(2k/N)` and `hits > 0`, in integers.
fn over_threshold(hits: usize, size: usize, k: usize, n: usize) -> bool {
    hits > 0 && (hits as u128).pow(2) * n as u128 >= 2 * k as u128 * (size as u128).pow(2)
}

impl CorruptionAnalysis {
    pub fn epsilon(&self) -> f64 {
        self.corrupted as f64 / self.copies as f64
    }

    pub fn bad_cloud_fraction(&self) -> f64 {
        self.bad_clouds.iter().filter(|&&b| b).count() as f64 / self.bad_clouds.len() as f64
    }

    pub fn super_edge_fraction(&self) -> f64 {
        let n = self.corrupted_super_edges.len();
        if n == 0 {
            0.0
        } else {
            self.corrupted_super_edges.iter().filter(|&&b| b).count() as f64 / n as f64
        }
    }

    /// Share of vertices lying in some `D_v`.
    pub fn doomed_fraction(&self) -> f64 {
        let k = self.doomed.iter().map(Vec::len).sum::<usize>();
        k as f64 / (self.bad_clouds.len() * self.cloud_size) as f64
    }

    pub fn is_doomed(&self, cloud: usize, inner: usize) -> bool {
        self.doomed[cloud].binary_search(&inner).is_ok()
    }
}

/// Classify `corruption` of the top network of `tower`. `rule` is the
/// behavior actually used; inner pairs are probed with a fixed message of
/// `len` bits (enveloped like every inner transfer). `exact_limit` bounds
/// the cloud size for exact minimum covers.
pub fn classify(
    tower: &Tower,
    corruption: &CorruptionSet,
    rule: &mut BehaviorRule,
    menu: &[Behavior],
    len: u32,
    exact_limit: usize,
) -> CorruptionAnalysis {
    let level = tower.levels.last().expect("at least one level");
    let p = &level.product;
    let z = &p.z;
    let k = corruption.len();
    let total = z.total_copies();
    let cloud_size = p.cloud_size();
    let h_records = p.h.edges().len();
    let mut cloud_hits = vec![0usize; p.clouds()];
    let mut bundle_hits = vec![0usize; p.super_edges.len()];
    for &i in corruption.indices() {
        let (e, _) = z.copy_at(i);
        if p.is_inner(e) {
            cloud_hits[e / h_records] += 1;
        } else {
            bundle_hits[p.super_edge_of_z(e).expect("cross edge")] += 1;
        }
    }
    let inner_copies = p.h.total_copies();
    let bad_clouds: Vec<bool> = cloud_hits.iter().map(|&c| over_threshold(c, inner_copies, k, total)).collect();

    let probe = crate::protocols::probe(len).envelope();
    let oblivious = rule.is_oblivious();
    let mut doomed = vec![Vec::new(); p.clouds()];
    let mut doomed_exact = true;
    for v in 0..p.clouds() {
        if cloud_hits[v] == 0 {
            continue;
        }
        let net = level.cloud(v);
        let mut failing = vec![false; cloud_size * cloud_size];
        let mut probe_with = |r: &mut BehaviorRule| {
            let mut wire = AdversaryWire::new(z, corruption, r);
            let (ok, _) = level.inner.pair_outcomes(net, probe, len + 1, &mut wire);
            for (f, o) in failing.iter_mut().zip(ok) {
                *f |= !o;
            }
        };
        if oblivious {
            probe_with(rule);
        }
        for &b in menu {
            probe_with(&mut BehaviorRule::Uniform(b));
        }
        let (cover, exact) = min_doomed_cover(cloud_size, &failing, exact_limit);
        doomed_exact &= exact;
        doomed[v] = cover;
    }

    let corrupted_super_edges = p
        .super_edges
        .iter()
        .zip(&bundle_hits)
        .map(|(se, &hits)| {
            let (cv, a) = p.split(se.port_v);
            let (cw, b) = p.split(se.port_w);
            bad_clouds[cv]
                || bad_clouds[cw]
                || doomed[cv].binary_search(&a).is_ok()
                || doomed[cw].binary_search(&b).is_ok()
                || over_threshold(hits, se.multiplicity as usize, k, total)
        })
        .collect();
    CorruptionAnalysis {
        corrupted: k,
        copies: total,
        bad_clouds,
        doomed,
        doomed_exact,
        corrupted_super_edges,
        cloud_hits,
        bundle_hits,
        cloud_size,
    }
}

impl CorruptionAnalysis {
    /// Erased copies of the outer graph: `erased[i]` for its dense copy `i`.
    pub fn erased_outer_copies(&self, tower: &Tower) -> Vec<bool> {
        let p = &tower.levels.last().expect("at least one level").product;
        let mut erased = vec![false; p.g.total_copies()];
        for (se, &bad) in p.super_edges.iter().zip(&self.corrupted_super_edges) {
            if bad {
                erased[p.g.copy_index(se.g_edge, se.g_copy)] = true;
            }
        }
        erased
    }
}
