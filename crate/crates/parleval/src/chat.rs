//! Chat-completion protocol shared by the judge and the candidate-model
//! generation harness.
//!
//! Wire protocol (v1): `POST <base>/generate` with
//! `{"prompt": str, "temperature": f64, "max_new_tokens": u32}` answered by
//! `{"text": str}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::net::RetryPolicy;

#[derive(Debug, Error, PartialEq)]
pub enum ChatError {
    #[error("chat endpoint error: {0}")]
    Endpoint(String),
}

pub trait ChatCompletion: Send + Sync {
    fn generate(
        &self,
        prompt: &str,
        temperature: f64,
        max_new_tokens: u32,
    ) -> Result<String, ChatError>;
}

#[derive(Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    max_new_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

pub struct HttpChatClient {
    base_url: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
}

impl HttpChatClient {
    pub fn new(base_url: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            base_url: base_url.into(),
            client: reqwest::blocking::Client::new(),
            retry,
        }
    }
}

impl ChatCompletion for HttpChatClient {
    fn generate(
        &self,
        prompt: &str,
        temperature: f64,
        max_new_tokens: u32,
    ) -> Result<String, ChatError> {
        let url = format!("{}/generate", self.base_url.trim_end_matches('/'));
        let request = WireRequest {
            prompt,
            temperature,
            max_new_tokens,
        };
        let response: WireResponse = self
            .retry
            .run(|| {
                self.client
                    .post(&url)
                    .json(&request)
                    .send()
                    .and_then(|r| r.error_for_status())
                    .map_err(|e| ChatError::Endpoint(e.to_string()))?
                    .json::<WireResponse>()
                    .map_err(|e| ChatError::Endpoint(e.to_string()))
            })?;
        Ok(response.text)
    }
}

fn prompt_hash(tag: &str, prompt: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    hasher.update([0]);
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

const MOCK_LEXICON: [&str; 48] = [
    "the", "house", "will", "recognise", "that", "my", "honourable", "friend", "has", "raised",
    "a", "matter", "of", "great", "importance", "to", "constituents", "across", "country", "we",
    "must", "ensure", "government", "takes", "responsibility", "for", "policy", "and", "its",
    "consequences", "this", "debate", "concerns", "every", "member", "who", "values", "fair",
    "outcomes", "in", "our", "communities", "i", "urge", "ministers", "act", "without", "delay",
];

/// Deterministic offline speech generator. Output is a plain parliamentary
/// paragraph whose words and length derive from the hash of
/// `(model_tag, prompt)`, always inside the configured word bounds.
pub struct MockSpeechModel {
    model_tag: String,
    min_words: usize,
    max_words: usize,
}

impl MockSpeechModel {
    pub fn new(model_tag: impl Into<String>, min_words: usize, max_words: usize) -> Self {
        let min_words = min_words.max(3);
        Self {
            model_tag: model_tag.into(),
            min_words,
            max_words: max_words.max(min_words),
        }
    }
}

impl ChatCompletion for MockSpeechModel {
    fn generate(&self, prompt: &str, _t: f64, _m: u32) -> Result<String, ChatError> {
        let mut state = prompt_hash(&self.model_tag, prompt);
        let span = self.max_words - self.min_words + 1;
        let target = self.min_words + (state % span as u64) as usize;
        let mut words = Vec::with_capacity(target + 2);
        words.push("Mr".to_string());
        words.push("Speaker,".to_string());
        while words.len() < target {
            // xorshift keeps the stream cheap and fully reproducible.
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            words.push(MOCK_LEXICON[(state % MOCK_LEXICON.len() as u64) as usize].to_string());
        }
        let mut text = words.join(" ");
        text.push('.');
        Ok(text)
    }
}

/// Deterministic offline judge. Emits a well-formed feedback/score block
/// whose score derives from the prompt hash; roughly one response in 23
/// omits the score tag so downstream error defaults stay exercised.
pub struct MockJudgeModel;

impl ChatCompletion for MockJudgeModel {
    fn generate(&self, prompt: &str, _t: f64, _m: u32) -> Result<String, ChatError> {
        let h = prompt_hash("judge", prompt);
        if h % 23 == 0 {
            return Ok("<feedback>The speech was adequate overall.</feedback>".to_string());
        }
        let score = 1 + (h % 10);
        Ok(format!(
            "<feedback>Reviewed against the rubric; structure and register assessed.</feedback>\n<score>{score}</score>"
        ))
    }
}
