//! Seeded random matrices for sketches and randomized checks.
//!
//! Everything is drawn from `ChaCha8Rng`, so a seed fixes the output on every
//! platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::Matrix;

/// Name recorded in reports next to the seed.
pub const GENERATOR: &str = "ChaCha8";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample in `[0, 1)` with 53 random bits.
pub fn unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform sample in `[-1, 1)`.
pub fn symmetric_unit<R: RngCore>(rng: &mut R) -> f64 {
    2.0 * unit(rng) - 1.0
}

/// Uniform integer in `0..bound`; `bound` must be positive.
pub fn below<R: RngCore>(rng: &mut R, bound: usize) -> usize {
    ((unit(rng) * bound as f64) as usize).min(bound - 1)
}

/// Entries i.i.d. uniform in `[-1, 1)`, filled row by row.
pub fn uniform_symmetric<R: RngCore>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| symmetric_unit(rng))
}

/// Entries i.i.d. uniform in `[0, 1)`, filled row by row.
pub fn uniform<R: RngCore>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| unit(rng))
}

/// Each entry is nonzero with probability `density`, with a uniform `[0, 1)` value.
pub fn sparse_uniform<R: RngCore>(rng: &mut R, rows: usize, cols: usize, density: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        if unit(rng) < density {
            unit(rng)
        } else {
            0.0
        }
    })
}

/// `L R` with `L` (rows x rank) and `R` (rank x cols) uniform in `[-1, 1)`;
/// has rank `rank` with probability one when `rank <= min(rows, cols)`.
pub fn low_rank<R: RngCore>(rng: &mut R, rows: usize, cols: usize, rank: usize) -> Matrix {
    let l = uniform_symmetric(rng, rows, rank);
    let r = uniform_symmetric(rng, rank, cols);
    &l * &r
}

/// Random subset of `0..n` of size `k`, sorted.
pub fn subset<R: RngCore>(rng: &mut R, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = i + below(rng, n - i);
        pool.swap(i, j);
    }
    let mut out = pool[..k.min(n)].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = uniform_symmetric(&mut rng(11), 4, 3);
        let b = uniform_symmetric(&mut rng(11), 4, 3);
        assert_eq!(a, b);
        assert_ne!(a, uniform_symmetric(&mut rng(12), 4, 3));
        assert!(a.as_slice().iter().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn subset_is_sorted_and_distinct() {
        let mut r = rng(5);
        for k in 0..=9 {
            let s = subset(&mut r, 9, k);
            assert_eq!(s.len(), k);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 9));
        }
    }

    #[test]
    fn low_rank_has_requested_rank() {
        let a = low_rank(&mut rng(2), 8, 6, 3);
        assert_eq!(crate::numerical_rank(&a, None), 3);
    }
}
