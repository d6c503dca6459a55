use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::rng;

pub const TRAIN_PER_CLASS: usize = 20;
pub const VAL_SIZE: usize = 500;
pub const TEST_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// index files shipped with the dataset
    Predefined,
    /// 20 training nodes per class, then 500 validation and 1000 test nodes
    Random,
    /// 500 validation and 1000 test nodes, every other node trains
    Full,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Predefined => "predefined",
            Self::Random => "random",
            Self::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "predefined" => Ok(Self::Predefined),
            "random" => Ok(Self::Random),
            "full" => Ok(Self::Full),
            other => Err(IgtError::Config(format!(
                "unknown split mode `{other}` (expected predefined, random or full)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    /// seed of a sampled split, `None` for index files
    pub seed: Option<u64>,
}

impl SplitSpec {
    pub fn predefined(n: usize, train: Vec<usize>, val: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        let s = Self {
            mode: SplitMode::Predefined,
            train,
            val,
            test,
            seed: None,
        };
        s.validate(n)?;
        Ok(s)
    }

    /// Indices below `n`, no index in two sets, no repeats.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut owner = vec![false; n];
        for (name, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for &i in set {
                if i >= n {
                    return Err(IgtError::InvalidArgument(format!("{name} index {i} out of range for {n} nodes")));
                }
                if owner[i] {
                    return Err(IgtError::InvalidArgument(format!("node {i} appears twice across splits")));
                }
                owner[i] = true;
            }
        }
        Ok(())
    }
}

/// Set sizes for sampled splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train_per_class: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train_per_class: TRAIN_PER_CLASS,
            val: VAL_SIZE,
            test: TEST_SIZE,
        }
    }
}

pub fn num_classes(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    idx
}

/// Samples a split. Index order inside each set follows the shuffle, so
/// two seeds give different splits.
pub fn make_splits(n: usize, labels: &[usize], mode: SplitMode, seed: u64) -> Result<SplitSpec> {
    make_splits_sized(n, labels, mode, SplitSizes::default(), seed)
}

pub fn make_splits_sized(
    n: usize,
    labels: &[usize],
    mode: SplitMode,
    sizes: SplitSizes,
    seed: u64,
) -> Result<SplitSpec> {
    if labels.len() != n {
        return Err(IgtError::InvalidArgument(format!("{} labels for {n} nodes", labels.len())));
    }
    let order = shuffled(n, seed);
    let (train, rest) = match mode {
        SplitMode::Predefined => {
            return Err(IgtError::InvalidArgument(
                "predefined splits come from the dataset's split files".into(),
            ))
        }
        SplitMode::Random => {
            let classes = num_classes(labels);
            let mut taken = vec![0usize; classes];
            let mut train = Vec::with_capacity(classes * sizes.train_per_class);
            let mut rest = Vec::with_capacity(n);
            for &i in &order {
                let c = labels[i];
                if taken[c] < sizes.train_per_class {
                    taken[c] += 1;
                    train.push(i);
                } else {
                    rest.push(i);
                }
            }
            if let Some(c) = taken.iter().position(|&t| t < sizes.train_per_class) {
                return Err(IgtError::InsufficientNodes(format!(
                    "class {c} has {} nodes, random split needs {}",
                    taken[c], sizes.train_per_class
                )));
            }
            (train, rest)
        }
        SplitMode::Full => (Vec::new(), order),
    };
    let (nv, nt) = (sizes.val, sizes.test);
    if rest.len() < nv + nt {
        return Err(IgtError::InsufficientNodes(format!(
            "{} nodes left for validation and test, need {}",
            rest.len(),
            nv + nt
        )));
    }
    let val = rest[..nv].to_vec();
    let test = rest[nv..nv + nt].to_vec();
    let train = if mode == SplitMode::Full {
        rest[nv + nt..].to_vec()
    } else {
        train
    };
    Ok(SplitSpec {
        mode,
        train,
        val,
        test,
        seed: Some(seed),
    })
}

/// Class-blind split: `train` random nodes, `val` more, the rest for test.
pub fn uniform_split(n: usize, train: usize, val: usize, seed: u64) -> Result<SplitSpec> {
    if train + val >= n {
        return Err(IgtError::InsufficientNodes(format!(
            "{n} nodes cannot hold {train} training and {val} validation nodes plus a test set"
        )));
    }
    let order = shuffled(n, seed);
    Ok(SplitSpec {
        mode: SplitMode::Random,
        train: order[..train].to_vec(),
        val: order[train..train + val].to_vec(),
        test: order[train + val..].to_vec(),
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, classes: usize) -> Vec<usize> {
        (0..n).map(|i| i % classes).collect()
    }

    #[test]
    fn random_split_sizes() {
        let y = labels(2708, 7);
        let s = make_splits(2708, &y, SplitMode::Random, 1).unwrap();
        assert_eq!(s.train.len(), 140);
        assert_eq!((s.val.len(), s.test.len()), (500, 1000));
        for c in 0..7 {
            assert_eq!(s.train.iter().filter(|&&i| y[i] == c).count(), 20);
        }
        s.validate(2708).unwrap();
        assert_ne!(s, make_splits(2708, &y, SplitMode::Random, 2).unwrap());
    }

    #[test]
    fn full_split_fraction() {
        let s = make_splits(2708, &labels(2708, 7), SplitMode::Full, 0).unwrap();
        assert_eq!(s.train.len(), 1208);
        s.validate(2708).unwrap();
    }

    #[test]
    fn split_errors() {
        let y = labels(100, 7);
        assert!(matches!(make_splits(100, &y, SplitMode::Random, 0), Err(IgtError::InsufficientNodes(_))));
        assert!(make_splits(100, &y, SplitMode::Predefined, 0).is_err());
        assert!(SplitSpec::predefined(5, vec![0, 1], vec![1], vec![2]).is_err());
        assert!(SplitSpec::predefined(5, vec![0], vec![1], vec![7]).is_err());
        assert!(uniform_split(10, 5, 5, 0).is_err());
    }

    #[test]
    fn uniform_split_partitions() {
        let s = uniform_split(2000, 20, 500, 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (20, 500, 1480));
        s.validate(2000).unwrap();
    }
}
