use alloc::vec;
use alloc::vec::Vec;

/// How [`doomed_set_estimate`] turns per-vertex failure rates into a set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// `√ν` for the measured failing fraction `ν`.
    SqrtNu,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoomedEstimate {
    /// Sorted doomed vertices.
    pub doomed: Vec<usize>,
    /// Fraction of ordered pairs that fail.
    pub failing_fraction: f64,
    pub threshold: f64,
    /// Per vertex, the fraction of pairs touching it that fail.
    pub incidence: Vec<f64>,
}

/// Vertices whose share of failing pairs (as source or target) exceeds the
/// threshold. `failing[u * n + v]` marks a failing ordered pair.
///
/// Every failing pair with both ends below the threshold stays
/// uncovered, so this set need not cover the failing pairs.
pub fn doomed_set_estimate(n: usize, failing: &[bool], threshold: Threshold) -> DoomedEstimate {
    assert_eq!(failing.len(), n * n);
    let total = failing.iter().filter(|&&f| f).count();
    let nu = if n == 0 { 0.0 } else { total as f64 / (n * n) as f64 };
    let t = match threshold {
        Threshold::SqrtNu => libm::sqrt(nu),
        Threshold::Fixed(x) => x,
    };
    let mut incidence = vec![0.0; n];
    let mut doomed = Vec::new();
    for v in 0..n {
        let mut bad = 0usize;
        for w in 0..n {
            if failing[v * n + w] {
                bad += 1;
            }
            if w != v && failing[w * n + v] {
                bad += 1;
            }
        }
        incidence[v] = bad as f64 / (2 * n - 1) as f64;
        if incidence[v] > t {
            doomed.push(v);
        }
    }
    DoomedEstimate { doomed, failing_fraction: nu, threshold: t, incidence }
}

/// A smallest set of vertices touching every failing pair, and whether it
/// is provably smallest. Exact search up to `exact_limit` vertices (the
/// first set in size then lexicographic order), greedy above.
pub fn min_doomed_cover(n: usize, failing: &[bool], exact_limit: usize) -> (Vec<usize>, bool) {
    assert_eq!(failing.len(), n * n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|&(u, v)| failing[u * n + v]).collect();
    if pairs.is_empty() {
        return (Vec::new(), true);
    }
    if n <= exact_limit && n <= 24 {
        let need: Vec<u32> = pairs.iter().map(|&(u, v)| (1u32 << u) | (1u32 << v)).collect();
        for size in 1..=n {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                let mask: u32 = combo.iter().map(|&i| 1u32 << i).sum();
                if need.iter().all(|&m| m & mask != 0) {
                    return (combo, true);
                }
                let mut i = size;
                while i > 0 && combo[i - 1] == n - size + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                combo[i - 1] += 1;
                for k in i..size {
                    combo[k] = combo[k - 1] + 1;
                }
            }
        }
        unreachable!("the full vertex set covers everything");
    }
    let mut left = pairs;
    let mut cover = Vec::new();
    while !left.is_empty() {
        let mut deg = vec![0usize; n];
        for &(u, v) in &left {
            deg[u] += 1;
            if v != u {
                deg[v] += 1;
            }
        }
        let best = (0..n).max_by_key(|&v| (deg[v], core::cmp::Reverse(v))).unwrap();
        cover.push(best);
        left.retain(|&(u, v)| u != best && v != best);
    }
    cover.sort_unstable();
    (cover, false)
}
