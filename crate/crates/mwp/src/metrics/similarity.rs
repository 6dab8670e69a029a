//! N-gram overlap similarity and the default lexical-diversity formula.

use std::collections::HashMap;

use crate::corpus::{Corpus, Problem};

/// Precomputed unigram and bigram counts for one problem.
pub(crate) struct NgramProfile {
    unigrams: HashMap<String, usize>,
    bigrams: HashMap<(String, String), usize>,
    unigram_total: usize,
    bigram_total: usize,
}

impl NgramProfile {
    pub fn of(problem: &Problem) -> NgramProfile {
        let tokens = problem.tokens();
        let mut unigrams = HashMap::new();
        for t in &tokens {
            *unigrams.entry(t.clone()).or_insert(0) += 1;
        }
        let mut bigrams = HashMap::new();
        for w in tokens.windows(2) {
            *bigrams.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
        NgramProfile {
            unigram_total: tokens.len(),
            bigram_total: tokens.len().saturating_sub(1),
            unigrams,
            bigrams,
        }
    }

    fn precision_against(&self, reference: &NgramProfile) -> (f64, f64) {
        let clipped_uni: usize = self
            .unigrams
            .iter()
            .map(|(t, c)| (*c).min(*reference.unigrams.get(t).unwrap_or(&0)))
            .sum();
        let clipped_bi: usize = self
            .bigrams
            .iter()
            .map(|(t, c)| (*c).min(*reference.bigrams.get(t).unwrap_or(&0)))
            .sum();
        let p1 = if self.unigram_total == 0 {
            0.0
        } else {
            clipped_uni as f64 / self.unigram_total as f64
        };
        let p2 = if self.bigram_total == 0 {
            // Single-token problems fall back to unigram precision alone.
            p1
        } else {
            clipped_bi as f64 / self.bigram_total as f64
        };
        (p1, p2)
    }
}

/// BLEU-2-style overlap similarity in [0, 1]: the geometric mean of clipped
/// unigram and bigram precision, symmetrized by averaging both directions.
pub(crate) fn similarity(a: &NgramProfile, b: &NgramProfile) -> f64 {
    let (p1, p2) = a.precision_against(b);
    let ab = (p1 * p2).sqrt();
    let (q1, q2) = b.precision_against(a);
    let ba = (q1 * q2).sqrt();
    (ab + ba) / 2.0
}

/// Greedy similarity clustering: each problem joins the first existing
/// cluster containing a member with similarity ≥ `threshold`, else starts a
/// new cluster. Returns the cluster index per problem.
pub(crate) fn greedy_clusters(corpus: &Corpus, threshold: f64) -> Vec<usize> {
    let profiles: Vec<NgramProfile> = corpus.problems.iter().map(NgramProfile::of).collect();
    let mut cluster_of: Vec<usize> = Vec::with_capacity(profiles.len());
    // members[c] holds problem indices of cluster c
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, profile) in profiles.iter().enumerate() {
        let mut assigned = None;
        'clusters: for (c, ms) in members.iter().enumerate() {
            for &m in ms {
                if similarity(profile, &profiles[m]) >= threshold {
                    assigned = Some(c);
                    break 'clusters;
                }
            }
        }
        let c = match assigned {
            Some(c) => c,
            None => {
                members.push(Vec::new());
                members.len() - 1
            }
        };
        members[c].push(i);
        cluster_of.push(c);
    }
    cluster_of
}
