use alloc::vec;
use alloc::vec::Vec;

use super::{Permutation, ProductGraph};
use crate::error::{Error, Result};

/// A permutation on V(Z) split into per-matching pieces on V(G).
///
/// `matchings[i]` is a permutation `π_i` of V(G); `label[x]` is the index `i`
/// with `π(x)` in cloud `π_i(cloud(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingDecomposition {
    pub matchings: Vec<Permutation>,
    pub label: Vec<usize>,
}

impl MatchingDecomposition {
    /// The pairs `(x, π(x))` labeled `i`, listed by source.
    pub fn class(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.label.iter().enumerate().filter(move |(_, &l)| l == i).map(|(x, _)| x)
    }
}

/// Split `pi` into `|V(H)|` matchings of the bipartite multigraph B with one
/// edge `cloud(x) -> cloud(π(x))` per vertex `x` of Z (`|V(H)| = deg(G)` in
/// the balanced case).
///
/// B is regular; even degrees are halved along Euler circuits, odd degrees
/// first peel one perfect matching with augmenting paths.
pub fn permutation_to_matchings(z: &ProductGraph, pi: &Permutation) -> Result<MatchingDecomposition> {
    let k = z.cloud_size();
    let n = z.clouds();
    if pi.len() != n * k {
        return Err(Error::Mismatch("permutation size differs from |V(Z)|"));
    }
    let src: Vec<usize> = (0..n * k).map(|x| x / k).collect();
    let dst: Vec<usize> = (0..n * k).map(|x| pi.apply(x) / k).collect();
    let mut indeg = vec![0usize; n];
    for &w in &dst {
        indeg[w] += 1;
    }
    if indeg.iter().any(|&c| c != k) {
        return Err(Error::Invariant("bipartite graph is not regular"));
    }
    let all: Vec<usize> = (0..n * k).collect();
    let mut classes = Vec::with_capacity(k);
    split(n, &src, &dst, all, k, &mut classes)?;

    let mut label = vec![usize::MAX; n * k];
    let mut matchings = Vec::with_capacity(k);
    for (i, class) in classes.iter().enumerate() {
        let mut image = vec![usize::MAX; n];
        for &x in class {
            label[x] = i;
            image[src[x]] = dst[x];
        }
        matchings.push(Permutation::new(image).map_err(|_| Error::Invariant("matching is not a bijection"))?);
    }
    Ok(MatchingDecomposition { matchings, label })
}

/// Decompose the `deg`-regular bipartite edge set `edges` into perfect matchings.
fn split(n: usize, src: &[usize], dst: &[usize], edges: Vec<usize>, deg: usize, out: &mut Vec<Vec<usize>>) -> Result<()> {
    if deg == 0 {
        return Ok(());
    }
    if deg == 1 {
        out.push(edges);
        return Ok(());
    }
    if deg % 2 == 1 {
        let m = perfect_matching(n, src, dst, &edges)?;
        let mut taken = vec![false; src.len()];
        for &x in &m {
            taken[x] = true;
        }
        let rest: Vec<usize> = edges.into_iter().filter(|&x| !taken[x]).collect();
        out.push(m);
        return split(n, src, dst, rest, deg - 1, out);
    }
    let (a, b) = euler_halves(n, src, dst, &edges);
    split(n, src, dst, a, deg / 2, out)?;
    split(n, src, dst, b, deg / 2, out)
}

/// Two-color the edges along Euler circuits so each vertex gets half its
/// edges in each color. Left vertex `u` is node `u`, right vertex `w` is
/// node `n + w`.
fn euler_halves(n: usize, src: &[usize], dst: &[usize], edges: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let nodes = 2 * n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for (slot, &x) in edges.iter().enumerate() {
        adj[src[x]].push((n + dst[x], slot));
        adj[n + dst[x]].push((src[x], slot));
    }
    let mut used = vec![false; edges.len()];
    let mut next = vec![0usize; nodes];
    let mut color = vec![0u8; edges.len()];
    for start in 0..nodes {
        loop {
            while next[start] < adj[start].len() && used[adj[start][next[start]].1] {
                next[start] += 1;
            }
            if next[start] == adj[start].len() {
                break;
            }
            // Hierholzer: collect the circuit as a sequence of edge slots
            let mut stack: Vec<(usize, usize)> = vec![(start, usize::MAX)];
            let mut circuit: Vec<usize> = Vec::new();
            while let Some(&(v, via)) = stack.last() {
                while next[v] < adj[v].len() && used[adj[v][next[v]].1] {
                    next[v] += 1;
                }
                if next[v] == adj[v].len() {
                    stack.pop();
                    if via != usize::MAX {
                        circuit.push(via);
                    }
                } else {
                    let (w, slot) = adj[v][next[v]];
                    used[slot] = true;
                    stack.push((w, slot));
                }
            }
            for (i, &slot) in circuit.iter().enumerate() {
                color[slot] = (i % 2) as u8;
            }
        }
    }
    let mut a = Vec::with_capacity(edges.len() / 2);
    let mut b = Vec::with_capacity(edges.len() / 2);
    for (slot, &x) in edges.iter().enumerate() {
        if color[slot] == 0 {
            a.push(x);
        } else {
            b.push(x);
        }
    }
    (a, b)
}

/// A perfect matching of a regular bipartite multigraph (Kuhn's algorithm).
fn perfect_matching(n: usize, src: &[usize], dst: &[usize], edges: &[usize]) -> Result<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &x in edges {
        adj[src[x]].push(x);
    }
    // match_right[w] = edge matched into right vertex w
    let mut match_right = vec![usize::MAX; n];
    let mut seen = vec![usize::MAX; n];
    for u in 0..n {
        if !augment(u, u, &adj, dst, src, &mut match_right, &mut seen) {
            return Err(Error::Invariant("regular bipartite graph without a perfect matching"));
        }
    }
    Ok(match_right)
}

fn augment(root: usize, u: usize, adj: &[Vec<usize>], dst: &[usize], src: &[usize], match_right: &mut [usize], seen: &mut [usize]) -> bool {
    // iterative DFS over alternating paths
    let mut stack: Vec<(usize, usize)> = vec![(u, 0)];
    let mut path: Vec<usize> = Vec::new();
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        if i == adj[v].len() {
            stack.pop();
            path.pop();
            continue;
        }
        top.1 += 1;
        let x = adj[v][i];
        let w = dst[x];
        if seen[w] == root {
            continue;
        }
        seen[w] = root;
        path.push(x);
        if match_right[w] == usize::MAX {
            for &e in &path {
                match_right[dst[e]] = e;
            }
            return true;
        }
        stack.push((src[match_right[w]], 0));
    }
    false
}
