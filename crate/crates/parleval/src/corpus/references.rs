//! Reference-set selection: the human speeches a generated speech is scored
//! against.

use thiserror::Error;

use super::{GeneratedRecord, SpeechRecord};
use crate::embedding::{cosine, EmbeddingVector, VectorError};

#[derive(Debug, Error, PartialEq)]
pub enum ReferenceError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("reference pool is empty")]
    EmptyPool,
    #[error("pool_embeddings length {got} does not match pool length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("embedding error: {0}")]
    Vector(#[from] VectorError),
}

#[derive(Debug, Clone)]
pub struct ReferenceSelection<'a> {
    pub references: Vec<&'a SpeechRecord>,
    /// Cosine similarity of each reference to the target, non-increasing.
    pub similarities: Vec<f64>,
    /// Same-party matching found nothing; topic-only fallback was used.
    pub topic_fallback: bool,
    /// Neither filter matched anything; the selection is empty.
    pub empty_warning: bool,
}

/// Picks up to `k` pool records sharing the target's context, ranked by
/// descending cosine similarity to the target embedding.
///
/// Context means same party and topic; when no pool record matches, the
/// filter relaxes to same topic only (flagged). Ties keep input order.
pub fn select_references<'a>(
    target: &GeneratedRecord,
    target_embedding: &EmbeddingVector,
    pool: &'a [SpeechRecord],
    pool_embeddings: &[EmbeddingVector],
    k: usize,
) -> Result<ReferenceSelection<'a>, ReferenceError> {
    if k == 0 {
        return Err(ReferenceError::ZeroK);
    }
    if pool.is_empty() {
        return Err(ReferenceError::EmptyPool);
    }
    if pool.len() != pool_embeddings.len() {
        return Err(ReferenceError::LengthMismatch {
            expected: pool.len(),
            got: pool_embeddings.len(),
        });
    }

    let same_context: Vec<usize> = (0..pool.len())
        .filter(|&i| pool[i].party == target.party && pool[i].topic == target.topic)
        .collect();
    let (candidates, topic_fallback) = if !same_context.is_empty() {
        (same_context, false)
    } else {
        let same_topic: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].topic == target.topic)
            .collect();
        let fallback = !same_topic.is_empty();
        (same_topic, fallback)
    };

    if candidates.is_empty() {
        return Ok(ReferenceSelection {
            references: Vec::new(),
            similarities: Vec::new(),
            topic_fallback: false,
            empty_warning: true,
        });
    }

    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(candidates.len());
    for i in candidates {
        scored.push((i, cosine(target_embedding, &pool_embeddings[i])?));
    }
    // Stable sort: equal similarities keep pool order.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    scored.truncate(k);

    Ok(ReferenceSelection {
        references: scored.iter().map(|&(i, _)| &pool[i]).collect(),
        similarities: scored.iter().map(|&(_, s)| s).collect(),
        topic_fallback,
        empty_warning: false,
    })
}
