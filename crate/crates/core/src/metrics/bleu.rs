use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

/// Multiset of the `n`-grams of `tokens`.
pub fn ngram_counts<T: Hash + Eq>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped `n`-gram matches of `hyp` against `reference`, and the number
/// of `n`-grams in `hyp`.
pub fn clipped_matches<T: Hash + Eq>(hyp: &[T], reference: &[T], n: usize) -> (usize, usize) {
    let hyp_counts = ngram_counts(hyp, n);
    let ref_counts = ngram_counts(reference, n);
    let matched = hyp_counts
        .iter()
        .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, (hyp.len() + 1).saturating_sub(n))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bleu {
    /// 0-100.
    pub score: f64,
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl Bleu {
    /// Aggregate modified precision for order `n` (1-based).
    pub fn precision(&self, n: usize) -> f64 {
        let (m, t) = (self.matches[n - 1], self.totals[n - 1]);
        if t == 0 {
            0.0
        } else {
            m as f64 / t as f64
        }
    }
}

/// Corpus-level BLEU-4 with uniform weights and no smoothing.
///
/// Clipped matches and hypothesis n-gram totals are summed over the whole
/// corpus before taking precisions. Any zero aggregate precision gives 0.
pub fn bleu_corpus<T: Hash + Eq>(pairs: &[(Vec<T>, Vec<T>)]) -> Result<Bleu> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (hyp, reference) in pairs {
        if reference.is_empty() {
            return Err(Error::EmptyReference);
        }
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=MAX_ORDER {
            let (m, t) = clipped_matches(hyp, reference, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).min(0.0).exp()
    };
    let score = if matches.contains(&0) {
        0.0
    } else {
        let log_mean = (0..MAX_ORDER)
            .map(|i| (matches[i] as f64 / totals[i] as f64).ln())
            .sum::<f64>()
            / MAX_ORDER as f64;
        100.0 * brevity_penalty * log_mean.exp()
    };
    Ok(Bleu {
        score,
        matches,
        totals,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}
