//! Embedding providers: the batch HTTP JSON protocol client and the
//! deterministic in-repo mock used for offline runs.
//!
//! Wire protocol (v1): `POST <base>/embed` with
//! `{"model": str, "inputs": [{"id": str, "text": str}]}` answered by
//! `{"dim": int, "vectors": [{"id": str, "values": [f64]}]}`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{EmbeddingCache, EmbeddingVector};
pub use crate::net::RetryPolicy;

#[derive(Debug, Serialize, Deserialize)]
struct WireInput {
    id: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireRequest {
    model: String,
    inputs: Vec<WireInput>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireVector {
    id: String,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireResponse {
    dim: usize,
    vectors: Vec<WireVector>,
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding dimension changed across batches: {expected} then {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("provider returned ids that are not a permutation of the request ids")]
    IdMismatch,
    #[error("provider error: {0}")]
    Provider(String),
    #[error("invalid vector from provider: {0}")]
    InvalidVector(#[from] super::VectorError),
    #[error("cache error: {0}")]
    Cache(String),
}

/// One batch-capable embedding backend.
pub trait EmbeddingProvider: Send + Sync {
    /// Stable identifier of the backend, part of every cache key.
    fn provider_id(&self) -> &str;
    /// Model identifier sent with each request, part of every cache key.
    fn model_id(&self) -> &str;
    /// Embeds one batch. Ids in the response must be a permutation of the
    /// request ids and all vectors must share one dimension.
    fn embed_batch(
        &self,
        inputs: &[(String, String)],
    ) -> Result<Vec<(String, EmbeddingVector)>, EmbedError>;
}

/// Result of [`embed`]: resolved vectors plus per-id failures. Failures are
/// non-fatal; a dimension mismatch is fatal and surfaces as an `Err` instead.
#[derive(Debug, Default)]
pub struct EmbedOutcome {
    pub vectors: BTreeMap<String, EmbeddingVector>,
    pub failures: Vec<(String, String)>,
    /// Ids served from the cache (no network call issued).
    pub cache_hits: usize,
}

/// Embeds `texts`, serving from `cache` where possible and batching the
/// remainder through `provider` in chunks of `batch_size`.
///
/// Transport errors are retried per the provider's own policy; ids still
/// failing are reported in [`EmbedOutcome::failures`]. A dimension mismatch
/// across batches (or against the cache) is a fatal configuration error.
pub fn embed(
    texts: &[(String, String)],
    provider: &dyn EmbeddingProvider,
    cache: Option<&EmbeddingCache>,
    batch_size: usize,
) -> Result<EmbedOutcome, EmbedError> {
    let batch_size = batch_size.max(1);
    let mut out = EmbedOutcome::default();
    let mut dim: Option<usize> = None;
    let mut pending: Vec<(String, String)> = Vec::new();

    let mut note_dim = |d: usize, dim: &mut Option<usize>| -> Result<(), EmbedError> {
        match dim {
            None => {
                *dim = Some(d);
                Ok(())
            }
            Some(expected) if *expected == d => Ok(()),
            Some(expected) => Err(EmbedError::DimensionMismatch {
                expected: *expected,
                got: d,
            }),
        }
    };

    for (id, text) in texts {
        let cached = cache.and_then(|c| {
            c.get(provider.provider_id(), provider.model_id(), text)
                .transpose()
        });
        match cached {
            Some(Ok(v)) => {
                note_dim(v.dim(), &mut dim)?;
                out.cache_hits += 1;
                out.vectors.insert(id.clone(), v);
            }
            Some(Err(e)) => return Err(EmbedError::Cache(e.to_string())),
            None => pending.push((id.clone(), text.clone())),
        }
    }

    for chunk in pending.chunks(batch_size) {
        match provider.embed_batch(chunk) {
            Ok(vectors) => {
                let want: BTreeSet<&str> = chunk.iter().map(|(id, _)| id.as_str()).collect();
                let got: BTreeSet<&str> = vectors.iter().map(|(id, _)| id.as_str()).collect();
                if want != got {
                    return Err(EmbedError::IdMismatch);
                }
                let by_id: BTreeMap<&str, &str> =
                    chunk.iter().map(|(id, t)| (id.as_str(), t.as_str())).collect();
                for (id, v) in vectors {
                    note_dim(v.dim(), &mut dim)?;
                    if let (Some(c), Some(text)) = (cache, by_id.get(id.as_str())) {
                        c.put(provider.provider_id(), provider.model_id(), text, &v)
                            .map_err(|e| EmbedError::Cache(e.to_string()))?;
                    }
                    out.vectors.insert(id, v);
                }
            }
            Err(EmbedError::DimensionMismatch { expected, got }) => {
                return Err(EmbedError::DimensionMismatch { expected, got })
            }
            Err(e) => {
                for (id, _) in chunk {
                    out.failures.push((id.clone(), e.to_string()));
                }
            }
        }
    }
    Ok(out)
}

/// Remote embedding service speaking the v1 batch protocol.
pub struct HttpEmbeddingClient {
    base_url: String,
    model: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
}

impl HttpEmbeddingClient {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            client: reqwest::blocking::Client::new(),
            retry,
        }
    }
}

impl EmbeddingProvider for HttpEmbeddingClient {
    fn provider_id(&self) -> &str {
        &self.base_url
    }

    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed_batch(
        &self,
        inputs: &[(String, String)],
    ) -> Result<Vec<(String, EmbeddingVector)>, EmbedError> {
        let request = WireRequest {
            model: self.model.clone(),
            inputs: inputs
                .iter()
                .map(|(id, text)| WireInput {
                    id: id.clone(),
                    text: text.clone(),
                })
                .collect(),
        };
        let url = format!("{}/embed", self.base_url.trim_end_matches('/'));
        let response: WireResponse = self
            .retry
            .run(|| {
                self.client
                    .post(&url)
                    .json(&request)
                    .send()
                    .and_then(|r| r.error_for_status())
                    .map_err(|e| EmbedError::Provider(e.to_string()))?
                    .json::<WireResponse>()
                    .map_err(|e| EmbedError::Provider(e.to_string()))
            })?;
        let mut out = Vec::with_capacity(response.vectors.len());
        for wv in response.vectors {
            let v = EmbeddingVector::new(wv.values)?;
            if v.dim() != response.dim {
                return Err(EmbedError::DimensionMismatch {
                    expected: response.dim,
                    got: v.dim(),
                });
            }
            out.push((wv.id, v));
        }
        Ok(out)
    }
}

/// Deterministic offline provider: each text maps to a unit vector seeded by
/// the SHA-256 of `(provider_id, model_id, text)`, so any run with the same
/// configuration reproduces identical embeddings with zero network calls.
pub struct MockEmbeddingProvider {
    model: String,
    dim: usize,
}

impl MockEmbeddingProvider {
    pub fn new(model: impl Into<String>, dim: usize) -> Self {
        Self {
            model: model.into(),
            dim: dim.max(2),
        }
    }

    /// The vector the mock will return for `text`; exposed so tests can
    /// recompute expectations independently of `embed_batch`.
    pub fn vector_for(&self, text: &str) -> EmbeddingVector {
        let mut hasher = Sha256::new();
        hasher.update(self.provider_id().as_bytes());
        hasher.update([0]);
        hasher.update(self.model.as_bytes());
        hasher.update([0]);
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        loop {
            let values: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = EmbeddingVector::new(values).unwrap();
            let norm = v.norm();
            if norm > 1e-9 {
                let unit: Vec<f64> = v.values().iter().map(|x| x / norm).collect();
                return EmbeddingVector::new(unit).unwrap();
            }
        }
    }
}

impl EmbeddingProvider for MockEmbeddingProvider {
    fn provider_id(&self) -> &str {
        "mock"
    }

    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed_batch(
        &self,
        inputs: &[(String, String)],
    ) -> Result<Vec<(String, EmbeddingVector)>, EmbedError> {
        Ok(inputs
            .iter()
            .map(|(id, text)| (id.clone(), self.vector_for(text)))
            .collect())
    }
}
