//! Seeded permutation, pinned so result files reproduce bit-for-bit.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`).
//! The permutation is the backwards Fisher–Yates walk: for `i = n-1 .. 1`,
//! swap `i` with `j` drawn uniformly from `0..=i`. Each `j` comes from
//! Lemire's multiply-shift method on one `next_u64()` output, with rejection
//! of the biased low region. Both loops are written here rather than taken from
//! `rand::seq`, whose algorithm is not part of its stability guarantee.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;

/// Uniform draw from `0..bound` (`bound > 0`).
pub fn bounded_index<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0, "empty range");
    let mut m = u128::from(rng.next_u64()) * u128::from(bound);
    if (m as u64) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (m as u64) < threshold {
            m = u128::from(rng.next_u64()) * u128::from(bound);
        }
    }
    (m >> 64) as u64
}

/// The permutation of `0..n` produced by `seed`; element `k` is the source
/// position of the example placed at position `k`.
pub fn shuffle_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = bounded_index(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

pub fn shuffle(dataset: &Dataset, seed: u64) -> Dataset {
    let order = shuffle_order(dataset.len(), seed);
    Dataset {
        examples: order.iter().map(|&k| dataset.examples[k].clone()).collect(),
        dim: dataset.dim,
        metadata: dataset.metadata.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::Example;
    use crate::sparse::SparseVector;

    fn numbered(n: usize) -> Dataset {
        let examples = (0..n)
            .map(|k| Example::new(SparseVector::singleton(0, k as f64 + 1.0), 1.0))
            .collect();
        Dataset::new("n", examples)
    }

    #[test]
    fn deterministic() {
        let ds = numbered(50);
        assert_eq!(shuffle(&ds, 9), shuffle(&ds, 9));
    }

    #[test]
    fn singleton_unchanged() {
        let ds = numbered(1);
        assert_eq!(shuffle(&ds, 3), ds);
        assert!(shuffle_order(0, 3).is_empty());
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(shuffle_order(100, 1), shuffle_order(100, 2));
    }

    #[test]
    fn is_permutation() {
        let mut order = shuffle_order(1000, 42);
        order.sort_unstable();
        assert_eq!(order, (0..1000).collect::<Vec<_>>());
    }

    // Pins the documented algorithm: a change to the generator or the walk
    // shows up here before it silently reorders result files.
    #[test]
    fn pinned_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut expected: Vec<usize> = (0..5).collect();
        for (k, i) in (1..5usize).rev().enumerate() {
            let bound = i as u128 + 1;
            // no rejection is possible unless the low word falls below 2^64 mod bound
            let m = u128::from(draws[k]) * bound;
            assert!((m as u64) >= (bound as u64).wrapping_neg() % bound as u64);
            let j = (m >> 64) as usize;
            assert_eq!(bounded_index(&mut rng, i as u64 + 1) as usize, j);
            expected.swap(i, j);
        }
        assert_eq!(shuffle_order(5, 7), expected);
    }

    #[test]
    fn bounded_index_is_roughly_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[bounded_index(&mut rng, 6) as usize] += 1;
        }
        for c in counts {
            assert!((9_500..10_500).contains(&c), "{counts:?}");
        }
    }
}
