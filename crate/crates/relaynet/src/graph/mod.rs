//! Regular multigraphs with explicit parallel-edge multiplicity and a fixed
//! port order at every vertex, plus the constructions built on them.

mod matching;
mod perm;
mod product;
mod random;
mod spectral;

pub use matching::{permutation_to_matchings, MatchingDecomposition};
pub use perm::Permutation;
pub use product::{replacement_product, Multiplicity, ProductGraph, ProductOptions, SuperEdge};
pub use random::random_regular_graph;
pub use spectral::{spectral_gap_estimate, DEFAULT_ITERATIONS};

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One edge record: `mult` parallel copies between `u` and `v`, `u <= v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub mult: u32,
}

/// One endpoint slot. Ports are numbered globally; the ports of vertex `x`
/// are `port_range(x)`, ordered by (neighbor id, edge id, copy index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    pub vertex: usize,
    pub neighbor: usize,
    pub edge: usize,
    pub copy: u32,
    /// Global index of the port at the other end of the same copy.
    pub mate: usize,
}

/// Undirected multigraph. Parallel copies of an edge share one [`Edge`]
/// record and are addressed as `(edge id, copy index)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<Edge>,
    copy_base: Vec<usize>,
    ports: Vec<Port>,
    port_base: Vec<usize>,
    loops: bool,
}

impl MultiGraph {
    /// Build from edge records, rejecting self-loops.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::build(n, edges, false)
    }

    /// Build from edge records; self-loops are allowed if `loops` is set. A
    /// loop copy contributes two ports at its vertex.
    pub fn build(n: usize, mut edges: Vec<Edge>, loops: bool) -> Result<Self> {
        for e in edges.iter_mut() {
            if e.u > e.v {
                core::mem::swap(&mut e.u, &mut e.v);
            }
            if e.v >= n {
                return Err(Error::VertexRange { vertex: e.v, n });
            }
            if e.u == e.v && !loops {
                return Err(Error::SelfLoop { vertex: e.u });
            }
            if e.mult == 0 {
                return Err(Error::Parameter("edge multiplicity must be at least 1"));
            }
        }
        let mut copy_base = Vec::with_capacity(edges.len() + 1);
        let mut total = 0usize;
        for e in &edges {
            copy_base.push(total);
            total += e.mult as usize;
        }
        copy_base.push(total);

        // (vertex, neighbor, edge, copy, end)
        let mut ends: Vec<(usize, usize, usize, u32, u8)> = Vec::with_capacity(2 * total);
        for (id, e) in edges.iter().enumerate() {
            for c in 0..e.mult {
                ends.push((e.u, e.v, id, c, 0));
                ends.push((e.v, e.u, id, c, 1));
            }
        }
        ends.sort_unstable();
        let mut port_base = vec![0usize; n + 1];
        for &(x, ..) in &ends {
            port_base[x + 1] += 1;
        }
        for x in 0..n {
            port_base[x + 1] += port_base[x];
        }
        // locate both ends of each copy
        let mut slot = vec![[usize::MAX; 2]; total];
        for (i, &(_, _, id, c, end)) in ends.iter().enumerate() {
            slot[copy_base[id] + c as usize][end as usize] = i;
        }
        let ports = ends
            .iter()
            .map(|&(x, y, id, c, end)| Port {
                vertex: x,
                neighbor: y,
                edge: id,
                copy: c,
                mate: slot[copy_base[id] + c as usize][1 - end as usize],
            })
            .collect();
        Ok(MultiGraph { n, edges, copy_base, ports, port_base, loops })
    }

    /// Simple graph from a list of vertex pairs (each pair one copy).
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(u, v)| Edge { u, v, mult: 1 }).collect())
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Self::from_pairs(n, &pairs).expect("complete graph")
    }

    /// Cycle `C_n`, `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_pairs(n, &pairs).expect("cycle")
    }

    /// The Petersen graph, outer 5-cycle on 0..5, inner pentagram on 5..10.
    pub fn petersen() -> Self {
        let mut pairs = Vec::new();
        for i in 0..5 {
            pairs.push((i, (i + 1) % 5));
            pairs.push((i, i + 5));
            pairs.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::from_pairs(10, &pairs).expect("petersen")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn loops_allowed(&self) -> bool {
        self.loops
    }

    /// Number of edge copies (edges counted with multiplicity).
    pub fn total_copies(&self) -> usize {
        self.copy_base[self.edges.len()]
    }

    /// Dense index of copy `c` of edge `e`, in `0..total_copies()`.
    pub fn copy_index(&self, edge: usize, copy: u32) -> usize {
        debug_assert!(copy < self.edges[edge].mult);
        self.copy_base[edge] + copy as usize
    }

    /// Inverse of [`MultiGraph::copy_index`].
    pub fn copy_at(&self, index: usize) -> (usize, u32) {
        let e = self.copy_base.partition_point(|&b| b <= index) - 1;
        (e, (index - self.copy_base[e]) as u32)
    }

    pub fn degree(&self, x: usize) -> usize {
        self.port_base[x + 1] - self.port_base[x]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|x| self.degree(x)).max().unwrap_or(0)
    }

    /// The common degree, if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|x| self.degree(x) == d).then_some(d)
    }

    /// Check regularity; returns the degree.
    pub fn validate_regular(&self) -> Result<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        for x in 0..self.n {
            if self.degree(x) != d {
                return Err(Error::NotRegular { vertex: x, degree: self.degree(x), expected: d });
            }
        }
        Ok(d)
    }

    /// Global port indices of vertex `x`, in port order.
    pub fn port_range(&self, x: usize) -> core::ops::Range<usize> {
        self.port_base[x]..self.port_base[x + 1]
    }

    pub fn ports_of(&self, x: usize) -> &[Port] {
        &self.ports[self.port_range(x)]
    }

    pub fn port(&self, global: usize) -> Port {
        self.ports[global]
    }

    pub fn all_ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port_offset(&self, x: usize) -> usize {
        self.port_base[x]
    }

    /// Local index (0-based) at `x` of the port carrying `(edge, copy)`;
    /// for a loop returns the lower of its two ports.
    pub fn local_port(&self, x: usize, edge: usize, copy: u32) -> Option<usize> {
        self.ports_of(x).iter().position(|p| p.edge == edge && p.copy == copy)
    }

    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.ports_of(x).iter().map(|p| p.neighbor)
    }

    /// BFS distances from `s`; `u32::MAX` marks unreachable vertices.
    pub fn distances(&self, s: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if dist[y] == u32::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances(0).iter().all(|&d| d != u32::MAX)
    }

    /// Largest BFS distance, or `None` if disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.distances(s) {
                if d == u32::MAX {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ports_are_a_bijection_onto_endpoints() {
        let g = MultiGraph::new(3, vec![Edge { u: 0, v: 1, mult: 2 }, Edge { u: 1, v: 2, mult: 1 }, Edge { u: 2, v: 0, mult: 1 }]).unwrap();
        assert_eq!(g.total_copies(), 4);
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.degree(2), 2);
        for (i, p) in g.all_ports().iter().enumerate() {
            let q = g.port(p.mate);
            assert_eq!(q.mate, i);
            assert_eq!((q.edge, q.copy), (p.edge, p.copy));
            assert_eq!(q.vertex, p.neighbor);
        }
        // canonical order at vertex 0: neighbor 1 copies 0,1 then neighbor 2
        let order: Vec<_> = g.ports_of(0).iter().map(|p| (p.neighbor, p.copy)).collect();
        assert_eq!(order, vec![(1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn loops_need_permission() {
        let e = vec![Edge { u: 1, v: 1, mult: 1 }];
        assert_eq!(MultiGraph::new(2, e.clone()), Err(Error::SelfLoop { vertex: 1 }));
        let g = MultiGraph::build(2, e, true).unwrap();
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn copy_index_round_trip() {
        let g = MultiGraph::new(2, vec![Edge { u: 0, v: 1, mult: 3 }]).unwrap();
        for i in 0..3 {
            let (e, c) = g.copy_at(i);
            assert_eq!(g.copy_index(e, c), i);
        }
    }

    #[test]
    fn named_graphs() {
        assert_eq!(MultiGraph::complete(4).validate_regular(), Ok(3));
        assert_eq!(MultiGraph::cycle(6).diameter(), Some(3));
        let p = MultiGraph::petersen();
        assert_eq!(p.validate_regular(), Ok(3));
        assert_eq!(p.edges().len(), 15);
        assert_eq!(p.diameter(), Some(2));
    }
}
