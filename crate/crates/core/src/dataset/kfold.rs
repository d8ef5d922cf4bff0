//! Seeded k-fold assignment.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

/// Fold membership for every row: `fold_of[i]` is in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn n_rows(&self) -> usize {
        self.fold_of.len()
    }

    /// Row indices held out by fold `f`, ascending.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == f)
            .collect()
    }

    /// Row indices used for training against fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffle rows with the given seed and deal them into `k` balanced folds.
///
/// Fold sizes differ by at most one; the first `n % k` folds take the extra
/// row. Identical inputs always produce the identical assignment.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(seed, &[name_tag("kfold_split")]);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0usize; n];
    let mut cursor = 0usize;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &row in &order[cursor..cursor + size] {
            fold_of[row] = f;
        }
        cursor += size;
    }
    Ok(FoldAssignment { k, fold_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_fold_counts() {
        assert!(matches!(
            kfold_split(5, 1, 0),
            Err(Error::InvalidFoldCount { k: 1, n: 5 })
        ));
        assert!(matches!(
            kfold_split(5, 6, 0),
            Err(Error::InvalidFoldCount { k: 6, n: 5 })
        ));
        assert!(kfold_split(5, 5, 0).is_ok());
    }

    #[test]
    fn same_seed_reproduces_assignment() {
        let a = kfold_split(100, 10, 42).unwrap();
        let b = kfold_split(100, 10, 42).unwrap();
        let c = kfold_split(100, 10, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uneven_split_sizes_differ_by_at_most_one() {
        let folds = kfold_split(23, 5, 7).unwrap();
        let mut sizes = folds.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![4, 4, 5, 5, 5]);
    }

    #[test]
    fn train_and_test_partition_rows() {
        let folds = kfold_split(17, 4, 3).unwrap();
        for f in 0..4 {
            let mut all = folds.train_indices(f);
            all.extend(folds.test_indices(f));
            all.sort_unstable();
            assert_eq!(all, (0..17).collect::<Vec<_>>());
        }
    }

    proptest! {
        #[test]
        fn folds_are_balanced_and_exhaustive(
            n in 2usize..200,
            k in 2usize..20,
            seed in any::<u64>(),
        ) {
            prop_assume!(k <= n);
            let folds = kfold_split(n, k, seed).unwrap();
            let sizes = folds.fold_sizes();
            let min = sizes.iter().min().unwrap();
            let max = sizes.iter().max().unwrap();
            prop_assert!(max - min <= 1);
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            prop_assert!(folds.fold_of.iter().all(|&f| f < k));
        }
    }
}
