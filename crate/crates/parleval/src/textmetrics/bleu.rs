//! Self-BLEU over groups of generations sharing one prompt.
//!
//! BLEU settings are frozen conventions: order 4, uniform weights,
//! additive-epsilon smoothing for zero-match orders, brevity penalty on.

use std::collections::HashMap;

use super::TokenizedText;

pub const BLEU_ORDER: usize = 4;
pub const BLEU_EPSILON: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Multi-reference BLEU-4 of `candidate` against `references`.
///
/// Per order n: clipped matches over candidate n-gram totals; a zero-match
/// order contributes epsilon / total, and an order with no candidate n-grams
/// at all contributes epsilon. Brevity penalty uses the reference length
/// closest to the candidate's (ties prefer the shorter reference).
pub fn bleu4(candidate: &[String], references: &[&[String]]) -> f64 {
    if candidate.is_empty() || references.is_empty() {
        return 0.0;
    }
    let c = candidate.len();
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| ((len as i64 - c as i64).abs(), len))
        .expect("references non-empty");

    let mut log_sum = 0.0;
    for n in 1..=BLEU_ORDER {
        let cand_counts = ngram_counts(candidate, n);
        let total: usize = cand_counts.values().sum();
        let p_n = if total == 0 {
            BLEU_EPSILON
        } else {
            let mut matched = 0usize;
            for (gram, &count) in &cand_counts {
                let max_ref = references
                    .iter()
                    .map(|r| ngram_counts(r, n).get(gram).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                matched += count.min(max_ref);
            }
            if matched == 0 {
                BLEU_EPSILON / total as f64
            } else {
                matched as f64 / total as f64
            }
        };
        log_sum += p_n.ln() / BLEU_ORDER as f64;
    }

    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    bp * log_sum.exp()
}

/// Mean BLEU-4 of each group member against the rest of its group as the
/// multi-reference set. `None` when the group has fewer than two members.
pub fn self_bleu(group: &[TokenizedText]) -> Option<f64> {
    if group.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    for (i, member) in group.iter().enumerate() {
        let refs: Vec<&[String]> = group
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| t.tokens.as_slice())
            .collect();
        sum += bleu4(&member.tokens, &refs);
    }
    Some(sum / group.len() as f64)
}
