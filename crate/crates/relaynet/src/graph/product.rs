use alloc::vec;
use alloc::vec::Vec;

use super::{Edge, MultiGraph};
use crate::error::{Error, Result};

/// How many parallel Z-edges realize one copy of a G-edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Multiplicity {
    /// `deg(H)` copies: inner and cross edge counts balance.
    #[default]
    Balanced,
    /// A single copy, as in the plain replacement product.
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductOptions {
    pub multiplicity: Multiplicity,
    /// Clouds may have up to `max_cloud_factor * deg(G)` vertices.
    pub max_cloud_factor: usize,
}

impl Default for ProductOptions {
    fn default() -> Self {
        ProductOptions { multiplicity: Multiplicity::Balanced, max_cloud_factor: 4 }
    }
}

/// One copy of a G-edge, realized as a bundle of parallel Z-edges between
/// its two port vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuperEdge {
    pub g_edge: usize,
    pub g_copy: u32,
    /// Endpoint clouds (`v <= w` as in the G-edge record).
    pub v: usize,
    pub w: usize,
    /// Port vertices of Z, `port_v` lies in cloud `v`, `port_w` in cloud `w`.
    pub port_v: usize,
    pub port_w: usize,
    /// The Z-edge record carrying the bundle.
    pub z_edge: usize,
    pub multiplicity: u32,
}

/// `Z = G ∘ H`, with cloud structure and super-edge index.
///
/// Vertex `(u, a)` of Z has id `u * |V(H)| + a`. Z-edges are numbered with
/// all inner edges first (cloud by cloud, in H's edge order) and the
/// super-edge bundles after them, in super-edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductGraph {
    pub z: MultiGraph,
    pub g: MultiGraph,
    pub h: MultiGraph,
    pub super_edges: Vec<SuperEdge>,
    /// For every global port of G, the Z vertex it is associated with.
    pub port_map: Vec<usize>,
    /// First super-edge index of each G-edge record.
    super_base: Vec<usize>,
    pub options: ProductOptions,
}

impl ProductGraph {
    pub fn cloud_size(&self) -> usize {
        self.h.n()
    }

    pub fn clouds(&self) -> usize {
        self.g.n()
    }

    pub fn vertex(&self, cloud: usize, inner: usize) -> usize {
        cloud * self.h.n() + inner
    }

    pub fn split(&self, x: usize) -> (usize, usize) {
        (x / self.h.n(), x % self.h.n())
    }

    /// Z-edge record of H-edge `h_edge` inside cloud `cloud`.
    pub fn inner_edge(&self, cloud: usize, h_edge: usize) -> usize {
        cloud * self.h.edges().len() + h_edge
    }

    pub fn inner_edge_count(&self) -> usize {
        self.g.n() * self.h.total_copies()
    }

    pub fn cross_edge_count(&self) -> usize {
        self.super_edges.iter().map(|s| s.multiplicity as usize).sum()
    }

    /// Whether a Z-edge record lies inside a cloud.
    pub fn is_inner(&self, z_edge: usize) -> bool {
        z_edge < self.g.n() * self.h.edges().len()
    }

    /// Super-edge realizing copy `copy` of G-edge `g_edge`.
    pub fn super_edge_of(&self, g_edge: usize, copy: u32) -> usize {
        self.super_base[g_edge] + copy as usize
    }

    /// Super-edge carried by a cross Z-edge record.
    pub fn super_edge_of_z(&self, z_edge: usize) -> Option<usize> {
        let inner = self.g.n() * self.h.edges().len();
        (z_edge >= inner).then(|| z_edge - inner)
    }

    /// Cloud vertex associated with the `i`-th port of G-vertex `u`.
    pub fn port_vertex(&self, u: usize, i: usize) -> usize {
        self.port_map[self.g.port_offset(u) + i]
    }

    /// Whether cloud vertex `a` (inner index) is associated with some G-edge.
    pub fn is_port(&self, a: usize) -> bool {
        a < self.g.regular_degree().unwrap_or_else(|| self.g.max_degree())
    }
}

/// Build the replacement product of `g` with `h`.
///
/// Port `i` of G-vertex `u` (canonical port order) is associated with cloud
/// vertex `(u, i)`; each copy of a G-edge becomes `deg(H)` parallel Z-edges
/// between its two port vertices (one with [`Multiplicity::Single`]).
/// Clouds with more than `deg(G)` vertices keep the extra vertices as
/// non-port vertices.
pub fn replacement_product(g: &MultiGraph, h: &MultiGraph, options: ProductOptions) -> Result<ProductGraph> {
    let dg = g.validate_regular()?;
    let dh = h.validate_regular()?;
    if dg == 0 || g.edges().is_empty() {
        return Err(Error::Parameter("outer graph has no edges"));
    }
    if dh == 0 {
        return Err(Error::Parameter("inner graph has no edges"));
    }
    let k = h.n();
    if k < dg {
        return Err(Error::InsufficientPorts { needed: dg, available: k });
    }
    if k > options.max_cloud_factor * dg {
        return Err(Error::CloudTooLarge { size: k, limit: options.max_cloud_factor * dg });
    }
    let mult = match options.multiplicity {
        Multiplicity::Balanced => dh as u32,
        Multiplicity::Single => 1,
    };

    let mut edges = Vec::with_capacity(g.n() * h.edges().len() + g.total_copies());
    for u in 0..g.n() {
        for e in h.edges() {
            edges.push(Edge { u: u * k + e.u, v: u * k + e.v, mult: e.mult });
        }
    }

    let mut port_map = vec![usize::MAX; g.all_ports().len()];
    for u in 0..g.n() {
        for (i, gp) in g.port_range(u).enumerate() {
            port_map[gp] = u * k + i;
        }
    }
    // every port vertex in a cloud is used once
    let mut used = vec![false; g.n() * k];
    for &x in &port_map {
        if x == usize::MAX || used[x] {
            return Err(Error::Invariant("port map collision"));
        }
        used[x] = true;
    }

    let mut super_edges = Vec::with_capacity(g.total_copies());
    let mut super_base = Vec::with_capacity(g.edges().len());
    let inner_records = edges.len();
    for (id, e) in g.edges().iter().enumerate() {
        super_base.push(super_edges.len());
        for c in 0..e.mult {
            let pu = g.local_port(e.u, id, c).ok_or(Error::Invariant("missing port"))?;
            let pv = if e.u == e.v {
                // the second port of a loop copy
                g.ports_of(e.v)
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.edge == id && p.copy == c)
                    .nth(1)
                    .map(|(i, _)| i)
                    .ok_or(Error::Invariant("missing loop port"))?
            } else {
                g.local_port(e.v, id, c).ok_or(Error::Invariant("missing port"))?
            };
            let port_v = port_map[g.port_offset(e.u) + pu];
            let port_w = port_map[g.port_offset(e.v) + pv];
            super_edges.push(SuperEdge {
                g_edge: id,
                g_copy: c,
                v: e.u,
                w: e.v,
                port_v,
                port_w,
                z_edge: inner_records + super_edges.len(),
                multiplicity: mult,
            });
            edges.push(Edge { u: port_v, v: port_w, mult });
        }
    }
    let z = MultiGraph::build(g.n() * k, edges, g.loops_allowed())?;
    Ok(ProductGraph { z, g: g.clone(), h: h.clone(), super_edges, port_map, super_base, options })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_with_triangle() {
        let p = replacement_product(&MultiGraph::complete(4), &MultiGraph::cycle(3), ProductOptions::default()).unwrap();
        assert_eq!(p.z.n(), 12);
        assert_eq!(p.z.validate_regular(), Ok(4));
        assert_eq!(p.inner_edge_count(), 12);
        assert_eq!(p.cross_edge_count(), 12);
        assert_eq!(p.z.total_copies(), 24);
        for s in &p.super_edges {
            assert_eq!(p.split(s.port_v).0, s.v);
            assert_eq!(p.split(s.port_w).0, s.w);
            assert_eq!(s.multiplicity, 2);
        }
    }

    #[test]
    fn petersen_with_square_is_extended() {
        let p = replacement_product(&MultiGraph::petersen(), &MultiGraph::cycle(4), ProductOptions::default()).unwrap();
        assert_eq!(p.z.n(), 40);
        assert_eq!(p.cross_edge_count(), 30);
        assert_eq!(p.inner_edge_count(), 40);
        // the fourth vertex of each cloud is not a port
        for u in 0..10 {
            assert_eq!(p.z.degree(p.vertex(u, 3)), 2);
            assert_eq!(p.z.degree(p.vertex(u, 0)), 4);
        }
    }

    #[test]
    fn preconditions() {
        let g = MultiGraph::complete(5);
        assert_eq!(
            replacement_product(&g, &MultiGraph::cycle(3), ProductOptions::default()),
            Err(Error::InsufficientPorts { needed: 4, available: 3 })
        );
        let empty = MultiGraph::new(3, vec![]).unwrap();
        assert!(replacement_product(&empty, &MultiGraph::cycle(3), ProductOptions::default()).is_err());
        let big = MultiGraph::cycle(13);
        assert!(matches!(replacement_product(&MultiGraph::complete(4), &big, ProductOptions::default()), Err(Error::CloudTooLarge { .. })));
    }
}
