//! Cross-validation fold construction.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Corpus;

/// One train/test split.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// A complete cross-validation fold set.
#[derive(Debug, Clone)]
pub struct FoldSet {
    pub scheme: String,
    pub folds: Vec<Fold>,
}

/// Fold construction scheme.
#[derive(Debug, Clone)]
pub enum FoldScheme {
    /// Five folds of (near-)equal test size after a seeded shuffle. With
    /// `n = 5q + r`, the first `r` test folds get `q + 1` problems.
    EqualFive { seed: u64 },
    /// Test folds are consecutive corpus-order chunks of the given sizes.
    FixedSizes(Vec<usize>),
    /// Five folds where all problems sharing a `seed_id` land in the same
    /// test fold, with variation types balanced across folds.
    SeedGroupedFive { seed: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoldError {
    #[error("fixed sizes sum to {got} but the corpus has {expected} problems")]
    SizesMismatch { got: usize, expected: usize },
    #[error("{0} problem(s) lack a seed_id required by the seed-grouped scheme")]
    MissingSeedIds(usize),
}

impl FoldSet {
    /// Check the partition invariants: per-fold disjointness, pairwise
    /// disjoint test sets, and test coverage of the whole corpus.
    pub fn validate(&self, corpus: &Corpus) -> bool {
        let all_ids: HashSet<&str> = corpus.problems.iter().map(|p| p.id.as_str()).collect();
        let mut covered: HashSet<&str> = HashSet::new();
        for fold in &self.folds {
            let train: HashSet<&str> = fold.train.iter().map(String::as_str).collect();
            for id in &fold.test {
                if train.contains(id.as_str()) || !covered.insert(id.as_str()) {
                    return false;
                }
            }
        }
        covered == all_ids
    }
}

/// Build cross-validation folds for a corpus.
pub fn make_folds(corpus: &Corpus, scheme: &FoldScheme) -> Result<FoldSet, FoldError> {
    match scheme {
        FoldScheme::EqualFive { seed } => {
            let mut ids: Vec<String> = corpus.problems.iter().map(|p| p.id.clone()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            ids.shuffle(&mut rng);
            Ok(chunked(&ids, &near_equal_sizes(ids.len(), 5), "equal-five"))
        }
        FoldScheme::FixedSizes(sizes) => {
            let ids: Vec<String> = corpus.problems.iter().map(|p| p.id.clone()).collect();
            let total: usize = sizes.iter().sum();
            if total != ids.len() {
                return Err(FoldError::SizesMismatch {
                    got: total,
                    expected: ids.len(),
                });
            }
            Ok(chunked(&ids, sizes, "fixed-sizes"))
        }
        FoldScheme::SeedGroupedFive { seed } => seed_grouped(corpus, *seed),
    }
}

fn near_equal_sizes(n: usize, k: usize) -> Vec<usize> {
    let q = n / k;
    let r = n % k;
    (0..k).map(|i| if i < r { q + 1 } else { q }).collect()
}

fn chunked(ids: &[String], sizes: &[usize], scheme: &str) -> FoldSet {
    let mut folds = Vec::new();
    let mut start = 0;
    for &size in sizes {
        let test: Vec<String> = ids[start..start + size].to_vec();
        let test_set: HashSet<&String> = test.iter().collect();
        let train: Vec<String> = ids
            .iter()
            .filter(|id| !test_set.contains(id))
            .cloned()
            .collect();
        folds.push(Fold { train, test });
        start += size;
    }
    FoldSet {
        scheme: scheme.to_string(),
        folds,
    }
}

fn seed_grouped(corpus: &Corpus, seed: u64) -> Result<FoldSet, FoldError> {
    let missing = corpus
        .problems
        .iter()
        .filter(|p| p.seed_id.is_none())
        .count();
    if missing > 0 {
        return Err(FoldError::MissingSeedIds(missing));
    }
    // Group problems by seed id, tallying variation-type usage per group.
    let mut groups: BTreeMap<String, (Vec<String>, BTreeMap<String, usize>)> = BTreeMap::new();
    for p in &corpus.problems {
        let entry = groups
            .entry(p.seed_id.clone().unwrap())
            .or_default();
        entry.0.push(p.id.clone());
        for label in &p.variation_chain {
            *entry.1.entry(label.clone()).or_insert(0) += 1;
        }
    }
    // Largest groups first, shuffled within equal sizes for the seed, then
    // each group goes to the set that keeps type counts most balanced.
    let mut order: Vec<&String> = groups.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order.sort_by_key(|g| std::cmp::Reverse(groups[*g].0.len()));

    let mut set_counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); 5];
    let mut set_sizes = vec![0usize; 5];
    let mut assignment: Vec<Vec<String>> = vec![Vec::new(); 5];
    for g in order {
        let (ids, type_counts) = &groups[g];
        // Marginal cost: squared per-type counts after assignment plus a
        // size-balance term. Smaller is better.
        let mut best = 0usize;
        let mut best_cost = u64::MAX;
        for s in 0..5 {
            let mut cost: u64 = (set_sizes[s] + ids.len()).pow(2) as u64;
            for (label, c) in type_counts {
                let cur = *set_counts[s].get(label).unwrap_or(&0);
                cost += ((cur + c) as u64).pow(2);
            }
            if cost < best_cost {
                best_cost = cost;
                best = s;
            }
        }
        for (label, c) in type_counts {
            *set_counts[best].entry(label.clone()).or_insert(0) += c;
        }
        set_sizes[best] += ids.len();
        assignment[best].extend(ids.iter().cloned());
    }
    let folds = assignment
        .into_iter()
        .map(|test| {
            let test_set: HashSet<&String> = test.iter().collect();
            let train = corpus
                .problems
                .iter()
                .filter(|p| !test_set.contains(&p.id))
                .map(|p| p.id.clone())
                .collect();
            Fold { train, test }
        })
        .collect();
    Ok(FoldSet {
        scheme: "seed-grouped-five".to_string(),
        folds,
    })
}
