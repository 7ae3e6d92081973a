use alloc::vec;
use alloc::vec::Vec;

use super::MultiGraph;
use crate::rng::{seeded, Rng};

pub const DEFAULT_ITERATIONS: usize = 2000;

/// `|λ₂| / d`, where `λ₂` is the second largest adjacency eigenvalue of a
/// connected `d`-regular graph.
///
/// Power iteration runs on `A + dI` (spectrum shifted to be nonnegative)
/// restricted to the complement of the all-ones vector, and finishes with a
/// Rayleigh quotient. Disconnected graphs report `1.0`.
pub fn spectral_gap_estimate(g: &MultiGraph, iterations: usize) -> f64 {
    let d = match g.regular_degree() {
        Some(d) if d > 0 => d as f64,
        _ => return 1.0,
    };
    if !g.is_connected() {
        return 1.0;
    }
    let n = g.n();
    if n <= 1 {
        return 0.0;
    }
    let mut rng = seeded(0x5eed_5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut y = vec![0.0; n];
    project(&mut x);
    normalize(&mut x);
    for _ in 0..iterations {
        shifted_apply(g, d, &x, &mut y);
        project(&mut y);
        if normalize(&mut y) == 0.0 {
            break;
        }
        core::mem::swap(&mut x, &mut y);
    }
    shifted_apply(g, d, &x, &mut y);
    let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let lambda2 = mu - d;
    (lambda2.abs() / d).min(1.0)
}

fn shifted_apply(g: &MultiGraph, d: f64, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        let s: f64 = g.neighbors(v).map(|w| x[w]).sum();
        *out = s + d * x[v];
    }
}

fn project(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|a| *a -= mean);
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = libm::sqrt(x.iter().map(|a| a * a).sum::<f64>());
    if norm > 0.0 {
        x.iter_mut().for_each(|a| *a /= norm);
    }
    norm
}
