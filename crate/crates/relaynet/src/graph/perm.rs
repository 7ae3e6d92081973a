use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::{SimRng, SliceRandom};

/// A bijection on `0..n`, stored as its image table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &y in &image {
            if y >= n || seen[y] {
                return Err(Error::NotPermutation);
            }
            seen[y] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn random(n: usize, rng: &mut SimRng) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Permutation(image)
    }

    /// The involution swapping the pairs of a matching; unmatched points are fixed.
    pub fn from_matching(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::NotPermutation);
            }
            image[a] = b;
            image[b] = a;
        }
        Self::new(image)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x == y)
    }
}
