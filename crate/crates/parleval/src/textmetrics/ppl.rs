//! Perplexity from token log-probabilities supplied by an external
//! language-model scorer.
//!
//! Wire protocol (v1): `POST <base>/logprobs` with `{"text": str}` answered
//! by `{"tokens": [str], "logprobs": [f64]}`. Logprobs are natural-log and
//! the scorer's own tokenization is treated as opaque.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::RetryPolicy;

/// Natural-log token probabilities for one scored text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogprobReport {
    token_logprobs: Vec<f64>,
}

impl LogprobReport {
    /// Validates the report: non-empty, finite, no positive logprobs.
    pub fn new(token_logprobs: Vec<f64>) -> Result<Self, LogprobError> {
        if token_logprobs.is_empty() {
            return Err(LogprobError::EmptyReport);
        }
        if token_logprobs.iter().any(|l| !l.is_finite() || *l > 0.0) {
            return Err(LogprobError::InvalidLogprob);
        }
        Ok(Self { token_logprobs })
    }

    pub fn n_tokens(&self) -> usize {
        self.token_logprobs.len()
    }

    pub fn token_logprobs(&self) -> &[f64] {
        &self.token_logprobs
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LogprobError {
    #[error("logprob report must contain at least one token")]
    EmptyReport,
    #[error("logprob values must be finite and <= 0 (natural log)")]
    InvalidLogprob,
    #[error("text is not valid UTF-8; request rejected before send")]
    NotUtf8,
    #[error("text is empty; scorer cannot produce a report")]
    EmptyText,
    #[error("scorer error: {0}")]
    Scorer(String),
    #[error("scorer returned {tokens} tokens but {logprobs} logprobs")]
    LengthMismatch { tokens: usize, logprobs: usize },
}

/// exp of the mean negative log-probability; 1.0 means total certainty.
pub fn perplexity(report: &LogprobReport) -> f64 {
    let sum: f64 = report.token_logprobs.iter().sum();
    (-sum / report.n_tokens() as f64).exp()
}

/// A language-model scoring endpoint.
pub trait LogprobScorer: Send + Sync {
    fn logprobs(&self, text: &str) -> Result<LogprobReport, LogprobError>;
}

/// Validates the input bytes and fetches a report from the scorer.
///
/// Non-UTF-8 input and empty text are rejected before any request is sent;
/// transport failures surface as `Scorer` errors after the client's own
/// bounded retries.
pub fn fetch_logprobs(
    text: &[u8],
    scorer: &dyn LogprobScorer,
) -> Result<LogprobReport, LogprobError> {
    let text = std::str::from_utf8(text).map_err(|_| LogprobError::NotUtf8)?;
    if text.trim().is_empty() {
        return Err(LogprobError::EmptyText);
    }
    scorer.logprobs(text)
}

#[derive(Serialize)]
struct WireRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    tokens: Vec<String>,
    logprobs: Vec<f64>,
}

/// Remote scorer speaking the v1 logprobs protocol.
pub struct HttpLogprobScorer {
    base_url: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
}

impl HttpLogprobScorer {
    pub fn new(base_url: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            base_url: base_url.into(),
            client: reqwest::blocking::Client::new(),
            retry,
        }
    }
}

impl LogprobScorer for HttpLogprobScorer {
    fn logprobs(&self, text: &str) -> Result<LogprobReport, LogprobError> {
        let url = format!("{}/logprobs", self.base_url.trim_end_matches('/'));
        let response: WireResponse = self
            .retry
            .run(|| {
                self.client
                    .post(&url)
                    .json(&WireRequest { text })
                    .send()
                    .and_then(|r| r.error_for_status())
                    .map_err(|e| LogprobError::Scorer(e.to_string()))?
                    .json::<WireResponse>()
                    .map_err(|e| LogprobError::Scorer(e.to_string()))
            })?;
        if response.tokens.len() != response.logprobs.len() {
            return Err(LogprobError::LengthMismatch {
                tokens: response.tokens.len(),
                logprobs: response.logprobs.len(),
            });
        }
        LogprobReport::new(response.logprobs)
    }
}

/// Deterministic offline scorer. Splits on whitespace and either assigns a
/// fixed logprob per token or derives one from the token's content hash.
pub struct MockLogprobScorer {
    mode: MockMode,
}

enum MockMode {
    Fixed(f64),
    Hashed,
}

impl MockLogprobScorer {
    /// Every token scores exactly `logprob`.
    pub fn fixed(logprob: f64) -> Self {
        Self {
            mode: MockMode::Fixed(logprob),
        }
    }

    /// Token logprob varies deterministically with token content, giving
    /// realistic per-record spread for pipeline tests.
    pub fn hashed() -> Self {
        Self {
            mode: MockMode::Hashed,
        }
    }
}

impl LogprobScorer for MockLogprobScorer {
    fn logprobs(&self, text: &str) -> Result<LogprobReport, LogprobError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(LogprobError::EmptyText);
        }
        let logprobs: Vec<f64> = tokens
            .iter()
            .map(|t| match self.mode {
                MockMode::Fixed(lp) => lp,
                MockMode::Hashed => {
                    use sha2::{Digest, Sha256};
                    let digest = Sha256::digest(t.as_bytes());
                    let h = u64::from_le_bytes(digest[..8].try_into().unwrap());
                    -(0.5 + (h % 1000) as f64 / 250.0)
                }
            })
            .collect();
        LogprobReport::new(logprobs)
    }
}
