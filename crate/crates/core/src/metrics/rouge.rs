use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::bleu::clipped_matches;
use crate::error::{Error, Result};

/// ROUGE-1, ROUGE-2 and ROUGE-L F1, each on 0-100.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rouge {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

fn f1(overlap: usize, hyp_count: usize, ref_count: usize) -> f64 {
    if overlap == 0 || hyp_count == 0 || ref_count == 0 {
        return 0.0;
    }
    let p = overlap as f64 / hyp_count as f64;
    let r = overlap as f64 / ref_count as f64;
    100.0 * 2.0 * p * r / (p + r)
}

pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Per-pair ROUGE. R1/R2 use clipped n-gram overlap; RL uses the longest
/// common subsequence over the two token lengths. An empty hypothesis
/// scores zero everywhere.
pub fn rouge_scores<T: Hash + Eq>(hyp: &[T], reference: &[T]) -> Result<Rouge> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    if hyp.is_empty() {
        return Ok(Rouge::default());
    }
    let (m1, h1) = clipped_matches(hyp, reference, 1);
    let (m2, h2) = clipped_matches(hyp, reference, 2);
    let r2_ref = reference.len() - 1;
    Ok(Rouge {
        r1: f1(m1, h1, reference.len()),
        r2: f1(m2, h2, r2_ref),
        rl: f1(lcs_len(hyp, reference), hyp.len(), reference.len()),
    })
}

/// Unweighted mean of per-pair scores.
pub fn rouge_corpus<T: Hash + Eq>(pairs: &[(Vec<T>, Vec<T>)]) -> Result<Rouge> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut sum = Rouge::default();
    for (h, r) in pairs {
        let s = rouge_scores(h, r)?;
        sum.r1 += s.r1;
        sum.r2 += s.r2;
        sum.rl += s.rl;
    }
    let n = pairs.len() as f64;
    Ok(Rouge {
        r1: sum.r1 / n,
        r2: sum.r2 / n,
        rl: sum.rl / n,
    })
}
