//! Client for an HTTP embedding service.
//!
//! `POST {endpoint}/embed` with `{"model": id, "texts": [...]}` answers
//! `{"dimension": d, "vectors": [[...], ...]}`, one unit vector per text in
//! request order.

use std::sync::OnceLock;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingVector, Encoder};

/// Environment variable consulted when no endpoint is given explicitly.
pub const ENDPOINT_ENV: &str = "TAXOEVAL_EMBED_ENDPOINT";

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
    /// Extra attempts after a transport failure or HTTP 503.
    pub retries: u32,
    pub max_batch: usize,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            timeout: Duration::from_secs(30),
            retries: 2,
            max_batch: 256,
        }
    }

    /// Endpoint from [`ENDPOINT_ENV`], if set.
    pub fn endpoint_from_env() -> Option<String> {
        std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.trim().is_empty())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dimension: usize,
    vectors: Vec<Vec<f64>>,
}

pub struct RemoteEncoder {
    config: RemoteConfig,
    agent: ureq::Agent,
    dimension: OnceLock<usize>,
}

impl RemoteEncoder {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            agent,
            dimension: OnceLock::new(),
        }
    }

    fn url(&self) -> String {
        format!("{}/embed", self.config.endpoint.trim_end_matches('/'))
    }

    fn request(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        let body = EmbedRequest {
            model: &self.config.model,
            texts,
        };
        let mut attempt = 0;
        loop {
            let result = self.agent.post(&self.url()).send_json(&body);
            let retryable = match result {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status == 200 {
                        let parsed: EmbedResponse = resp
                            .body_mut()
                            .read_json()
                            .map_err(|e| EmbeddingError::Protocol(e.to_string()))?;
                        return self.check(texts.len(), parsed);
                    }
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    let err = EmbeddingError::Service { status, body: text };
                    if status != 503 {
                        return Err(err);
                    }
                    err
                }
                Err(e) => EmbeddingError::Transport {
                    endpoint: self.config.endpoint.clone(),
                    message: e.to_string(),
                },
            };
            if attempt >= self.config.retries {
                return Err(retryable);
            }
            attempt += 1;
            log::warn!("embedding request failed ({retryable}); retry {attempt}/{}", self.config.retries);
            thread::sleep(Duration::from_millis(100 * u64::from(attempt)));
        }
    }

    fn check(&self, expected: usize, resp: EmbedResponse) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        if resp.vectors.len() != expected {
            return Err(EmbeddingError::Protocol(format!(
                "expected {expected} vectors, got {}",
                resp.vectors.len()
            )));
        }
        if resp.dimension == 0 {
            return Err(EmbeddingError::Protocol("dimension 0".into()));
        }
        let known = *self.dimension.get_or_init(|| resp.dimension);
        if known != resp.dimension {
            return Err(EmbeddingError::Protocol(format!(
                "dimension changed from {known} to {}",
                resp.dimension
            )));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != known {
                    return Err(EmbeddingError::Protocol(format!(
                        "vector of length {} for dimension {known}",
                        v.len()
                    )));
                }
                EmbeddingVector::normalized(v).map_err(|e| EmbeddingError::Protocol(e.to_string()))
            })
            .collect()
    }
}

impl Encoder for RemoteEncoder {
    fn identity(&self) -> &str {
        &self.config.model
    }

    fn dimension(&self) -> Option<usize> {
        self.dimension.get().copied()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(EmbeddingError::Validation("cannot embed empty text".into()));
        }
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.config.max_batch.max(1)) {
            out.extend(self.request(chunk)?);
        }
        Ok(out)
    }
}
