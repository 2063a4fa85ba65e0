//! Native lexical and diversity metrics, plus the wire clients for
//! logprob-based perplexity and the external quality scorers.
//!
//! Tokenization is deliberately frozen and simple so that every metric is
//! reproducible across implementations: lowercase the text, then take
//! maximal runs of Unicode alphanumeric characters as tokens. Punctuation
//! disappears; no stemming, no language model.

mod bleu;
mod external;
mod ppl;

pub use bleu::{bleu4, self_bleu, BLEU_EPSILON, BLEU_ORDER};
pub use external::{
    external_score, ExternalMetric, ExternalScore, ExternalScorer, HttpExternalScorer,
    MockExternalScorer, ScoreError,
};
pub use ppl::{
    fetch_logprobs, perplexity, HttpLogprobScorer, LogprobError, LogprobReport, LogprobScorer,
    MockLogprobScorer,
};

use std::collections::HashSet;

/// A tokenized text, carrying the id of its source record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub source_id: String,
    pub tokens: Vec<String>,
}

/// The engine's single documented tokenizer.
pub fn tokenize(text: &str, source_id: impl Into<String>) -> TokenizedText {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenizedText {
        source_id: source_id.into(),
        tokens,
    }
}

/// Proportion of unique n-grams among all n-grams of the text.
///
/// `None` marks the score undefined (fewer than `n` tokens); callers exclude
/// and count such records rather than aggregating them.
pub fn distinct_n(text: &TokenizedText, n: usize) -> Option<f64> {
    if n == 0 || text.tokens.len() < n {
        return None;
    }
    let total = text.tokens.len() - n + 1;
    let unique: HashSet<&[String]> = text.tokens.windows(n).collect();
    Some(unique.len() as f64 / total as f64)
}
