//! Shared networking plumbing: bounded-backoff retries and endpoint health
//! checks used by every remote-protocol client.

use std::thread;
use std::time::Duration;

use thiserror::Error;

/// Bounded exponential backoff. Delay doubles per attempt starting from
/// `base_delay`, capped at `max_delay`; `max_attempts` counts the first try.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(5),
        }
    }
}

impl RetryPolicy {
    /// No retries, no sleeping. Used by tests and mock providers.
    pub fn none() -> Self {
        Self {
            max_attempts: 1,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    fn delay_for(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        (self.base_delay * factor).min(self.max_delay)
    }

    /// Runs `op` until it succeeds or attempts are exhausted, sleeping the
    /// backoff delay between tries. Returns the last error on exhaustion.
    pub fn run<T, E>(&self, mut op: impl FnMut() -> Result<T, E>) -> Result<T, E> {
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(e) => {
                    attempt += 1;
                    if attempt >= self.max_attempts.max(1) {
                        return Err(e);
                    }
                    let d = self.delay_for(attempt - 1);
                    if !d.is_zero() {
                        thread::sleep(d);
                    }
                }
            }
        }
    }
}

/// Health-check policy for a configured endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthPolicy {
    /// GET `<base>/health` must answer 200 before any work is issued.
    Probe,
    /// Endpoint is trusted (mock providers, pre-verified services).
    Skip,
}

#[derive(Debug, Error)]
pub enum HealthError {
    #[error("endpoint {url} failed health check: {reason}")]
    Unhealthy { url: String, reason: String },
}

/// Fail-fast probe of `base_url` according to `policy`.
pub fn check_health(
    client: &reqwest::blocking::Client,
    base_url: &str,
    policy: HealthPolicy,
) -> Result<(), HealthError> {
    if policy == HealthPolicy::Skip {
        return Ok(());
    }
    let url = format!("{}/health", base_url.trim_end_matches('/'));
    match client.get(&url).send() {
        Ok(resp) if resp.status().is_success() => Ok(()),
        Ok(resp) => Err(HealthError::Unhealthy {
            url,
            reason: format!("status {}", resp.status()),
        }),
        Err(e) => Err(HealthError::Unhealthy {
            url,
            reason: e.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_returns_first_success() {
        let mut calls = 0;
        let policy = RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        };
        let out: Result<u32, &str> = policy.run(|| {
            calls += 1;
            if calls < 3 {
                Err("boom")
            } else {
                Ok(42)
            }
        });
        assert_eq!(out, Ok(42));
        assert_eq!(calls, 3);
    }

    #[test]
    fn retry_exhausts_and_returns_last_error() {
        let mut calls = 0;
        let policy = RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        };
        let out: Result<u32, String> = policy.run(|| {
            calls += 1;
            Err(format!("fail {calls}"))
        });
        assert_eq!(out, Err("fail 3".to_string()));
        assert_eq!(calls, 3);
    }

    #[test]
    fn delay_is_capped() {
        let policy = RetryPolicy {
            max_attempts: 10,
            base_delay: Duration::from_millis(100),
            max_delay: Duration::from_millis(250),
        };
        assert_eq!(policy.delay_for(0), Duration::from_millis(100));
        assert_eq!(policy.delay_for(1), Duration::from_millis(200));
        assert_eq!(policy.delay_for(2), Duration::from_millis(250));
        assert_eq!(policy.delay_for(8), Duration::from_millis(250));
    }
}
