use alloc::vec;
use alloc::vec::Vec;
use hashbrown::HashSet;

use super::{Edge, MultiGraph};
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng, SliceRandom};

const MATCHING_RETRIES: usize = 2000;
const RESTARTS: usize = 200;

/// A random simple `d`-regular graph on `n` vertices.
///
/// For even `n` the graph is a union of `d` random perfect matchings; a
/// matching that would repeat an edge is redrawn. For odd `n` (so `d` is
/// even) it is a union of `d/2` random Hamiltonian cycles, redrawn the same
/// way. When `d > (n-1)/2` the complement is sampled instead, which keeps
/// rejection rates low for dense targets. Same seed, same graph.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<MultiGraph> {
    if (n * d) % 2 != 0 {
        return Err(Error::Parameter("n*d must be even"));
    }
    if n <= d {
        return Err(Error::Parameter("need n > d"));
    }
    let mut rng = seeded(seed);
    let complement = 2 * d > n - 1;
    let target = if complement { n - 1 - d } else { d };
    for _ in 0..RESTARTS {
        if let Some(set) = attempt(n, target, &mut rng) {
            let mut pairs: Vec<(usize, usize)> = if complement {
                let mut out = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if !set.contains(&(u, v)) {
                            out.push((u, v));
                        }
                    }
                }
                out
            } else {
                set.into_iter().collect()
            };
            pairs.sort_unstable();
            let edges = pairs.into_iter().map(|(u, v)| Edge { u, v, mult: 1 }).collect();
            return MultiGraph::new(n, edges);
        }
    }
    Err(Error::Construction("random regular graph: retry budget exhausted"))
}

fn attempt(n: usize, d: usize, rng: &mut SimRng) -> Option<HashSet<(usize, usize)>> {
    let mut set = HashSet::new();
    let layers = if n % 2 == 0 { d } else { d / 2 };
    for _ in 0..layers {
        let mut placed = false;
        for _ in 0..MATCHING_RETRIES {
            let layer = if n % 2 == 0 { matching(n, rng) } else { hamiltonian_cycle(n, rng) };
            if layer.iter().all(|p| !set.contains(p)) && distinct(&layer) {
                set.extend(layer);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(set)
}

fn distinct(layer: &[(usize, usize)]) -> bool {
    let mut seen = HashSet::with_capacity(layer.len());
    layer.iter().all(|p| seen.insert(*p))
}

fn matching(n: usize, rng: &mut SimRng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect()
}

fn hamiltonian_cycle(n: usize, rng: &mut SimRng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = vec![];
    for i in 0..n {
        let (a, b) = (order[i], order[(i + 1) % n]);
        out.push((a.min(b), a.max(b)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = random_regular_graph(2, 1, 99).unwrap();
        assert_eq!(g.edges(), &[Edge { u: 0, v: 1, mult: 1 }]);
    }

    #[test]
    fn small_cubic_is_regular() {
        let g = random_regular_graph(8, 3, 7).unwrap();
        assert_eq!(g.validate_regular(), Ok(3));
        assert_eq!(g.edges().len(), 12);
    }

    #[test]
    fn odd_order_and_dense_cases() {
        let g = random_regular_graph(9, 4, 3).unwrap();
        assert_eq!(g.validate_regular(), Ok(4));
        let k = random_regular_graph(8, 7, 1).unwrap();
        assert_eq!(k, MultiGraph::complete(8));
        let g = random_regular_graph(10, 6, 5).unwrap();
        assert_eq!(g.validate_regular(), Ok(6));
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(random_regular_graph(7, 3, 0), Err(Error::Parameter(_))));
        assert!(matches!(random_regular_graph(4, 4, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn reproducible() {
        assert_eq!(random_regular_graph(40, 5, 11), random_regular_graph(40, 5, 11));
        assert_ne!(random_regular_graph(40, 5, 11), random_regular_graph(40, 5, 12));
    }
}
