use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint train/validation/test row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every index below `n` appears exactly once.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= n || seen[i] {
                return Err(Error::Data(format!("split index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Data("split does not cover every row".into()));
        }
        if self.train.is_empty() {
            return Err(Error::EmptyDataset("training split is empty".into()));
        }
        Ok(())
    }
}

/// Seeded shuffle, then `floor(0.8 n)` / `floor(0.1 n)` / remainder.
pub fn split(n: usize, seed: u64) -> Result<Split> {
    if n < 10 {
        return Err(Error::Data(format!("need at least 10 rows to split, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok(Split { train: idx, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sizes() {
        let s = split(470, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (376, 47, 47));
        s.validate(470).unwrap();
        let s = split(10, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
        let s = split(19, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (15, 1, 3));
    }

    #[test]
    fn seeded_and_rejects_small() {
        assert_eq!(split(100, 5).unwrap(), split(100, 5).unwrap());
        assert_ne!(split(100, 5).unwrap(), split(100, 6).unwrap());
        assert!(split(9, 0).is_err());
    }
}
