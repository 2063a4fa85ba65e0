//! External-scorer protocol for the neural quality metrics the engine does
//! not reimplement.
//!
//! Wire protocol (v1): `POST <base>/score` with
//! `{"metric": str, "candidate": str, "references": [str]}` answered by
//! `{"score": f64, "range": [lo, hi]}`. The engine validates only that the
//! score lies inside the reported range.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::net::RetryPolicy;

/// Externally scored metrics. GRUEN is reference-free; the other two are
/// scored against the top human reference speeches for the same context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExternalMetric {
    Gruen,
    Bertscore,
    Moverscore,
}

impl ExternalMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExternalMetric::Gruen => "gruen",
            ExternalMetric::Bertscore => "bertscore",
            ExternalMetric::Moverscore => "moverscore",
        }
    }

    pub fn reference_free(&self) -> bool {
        matches!(self, ExternalMetric::Gruen)
    }
}

/// Maximum reference speeches sent with a reference-based request.
pub const MAX_REFERENCES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub score: f64,
    pub range: (f64, f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("scorer endpoint error: {0}")]
    Endpoint(String),
    #[error("score {score} outside the scorer's reported range [{lo}, {hi}]")]
    OutOfRange { score: f64, lo: f64, hi: f64 },
    #[error("{metric} is reference-free but references were supplied")]
    UnexpectedReferences { metric: String },
    #[error("{metric} takes at most {max} references, got {got}")]
    TooManyReferences {
        metric: String,
        max: usize,
        got: usize,
    },
}

pub trait ExternalScorer: Send + Sync {
    fn score(
        &self,
        metric: ExternalMetric,
        candidate: &str,
        references: &[String],
    ) -> Result<ExternalScore, ScoreError>;
}

/// Validates the reference-set contract, invokes the scorer, and checks the
/// returned score against its own reported range.
///
/// `None` endpoint means the metric is unavailable for this run; callers
/// mark the row and proceed.
pub fn external_score(
    metric: ExternalMetric,
    candidate: &str,
    references: &[String],
    endpoint: Option<&dyn ExternalScorer>,
) -> Result<Option<ExternalScore>, ScoreError> {
    if metric.reference_free() && !references.is_empty() {
        return Err(ScoreError::UnexpectedReferences {
            metric: metric.as_str().to_string(),
        });
    }
    if !metric.reference_free() && references.len() > MAX_REFERENCES {
        return Err(ScoreError::TooManyReferences {
            metric: metric.as_str().to_string(),
            max: MAX_REFERENCES,
            got: references.len(),
        });
    }
    let Some(endpoint) = endpoint else {
        return Ok(None);
    };
    let result = endpoint.score(metric, candidate, references)?;
    let (lo, hi) = result.range;
    if !(lo..=hi).contains(&result.score) {
        return Err(ScoreError::OutOfRange {
            score: result.score,
            lo,
            hi,
        });
    }
    Ok(Some(result))
}

#[derive(Serialize)]
struct WireRequest<'a> {
    metric: &'a str,
    candidate: &'a str,
    references: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    score: f64,
    range: [f64; 2],
}

pub struct HttpExternalScorer {
    base_url: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
}

impl HttpExternalScorer {
    pub fn new(base_url: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            base_url: base_url.into(),
            client: reqwest::blocking::Client::new(),
            retry,
        }
    }
}

impl ExternalScorer for HttpExternalScorer {
    fn score(
        &self,
        metric: ExternalMetric,
        candidate: &str,
        references: &[String],
    ) -> Result<ExternalScore, ScoreError> {
        let url = format!("{}/score", self.base_url.trim_end_matches('/'));
        let request = WireRequest {
            metric: metric.as_str(),
            candidate,
            references,
        };
        let response: WireResponse = self
            .retry
            .run(|| {
                self.client
                    .post(&url)
                    .json(&request)
                    .send()
                    .and_then(|r| r.error_for_status())
                    .map_err(|e| ScoreError::Endpoint(e.to_string()))?
                    .json::<WireResponse>()
                    .map_err(|e| ScoreError::Endpoint(e.to_string()))
            })?;
        Ok(ExternalScore {
            score: response.score,
            range: (response.range[0], response.range[1]),
        })
    }
}

/// Deterministic offline scorer: the score is a content hash of
/// `(metric, candidate)` mapped into [0, 1].
pub struct MockExternalScorer;

impl ExternalScorer for MockExternalScorer {
    fn score(
        &self,
        metric: ExternalMetric,
        candidate: &str,
        _references: &[String],
    ) -> Result<ExternalScore, ScoreError> {
        let mut hasher = Sha256::new();
        hasher.update(metric.as_str().as_bytes());
        hasher.update([0]);
        hasher.update(candidate.as_bytes());
        let digest = hasher.finalize();
        let h = u64::from_le_bytes(digest[..8].try_into().unwrap());
        Ok(ExternalScore {
            score: (h % 10_000) as f64 / 10_000.0,
            range: (0.0, 1.0),
        })
    }
}
