//! Label similarity: sentence encoders, clipped cosine similarity and the
//! renaming cost shared by every structural metric.
//!
//! Metrics depend only on the [`Similarity`] trait. The usual implementation
//! is [`EncoderSimilarity`], which embeds text with an [`Encoder`] and keeps
//! vectors in memory (and optionally in a persistent [`SimilarityCache`]).
//! [`HashEncoder`] is a deterministic offline encoder for tests and
//! reproducible runs without a model; [`RemoteEncoder`] talks to an HTTP
//! embedding service.

mod cache;
mod hash;
pub mod remote;
mod table;

use std::collections::HashMap;
use std::sync::RwLock;

pub use cache::SimilarityCache;
pub use hash::HashEncoder;
pub use remote::{RemoteConfig, RemoteEncoder};
pub use table::{FixedEncoder, SimilarityTable};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("invalid embedding input: {0}")]
    Validation(String),
    #[error("embedding service unreachable at {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error("embedding service returned HTTP {status}: {body}")]
    Service { status: u16, body: String },
    #[error("malformed embedding response: {0}")]
    Protocol(String),
    #[error("embedding cache error: {0}")]
    Cache(#[from] std::io::Error),
}

impl EmbeddingError {
    /// Failures of the encoder backend itself, as opposed to bad input.
    pub fn is_backend_failure(&self) -> bool {
        !matches!(self, EmbeddingError::Validation(_))
    }
}

/// A finite embedding vector with unit norm, or the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    /// Scale `values` to unit length. A zero (or vanishing) input yields the
    /// zero vector.
    pub fn normalized(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Validation("embedding has dimension 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::Validation("embedding has non-finite components".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let values = if norm > f64::EPSILON {
            values.iter().map(|v| (v / norm) as f32).collect()
        } else {
            vec![0.0; values.len()]
        };
        Ok(Self { values })
    }

    /// Wrap stored components verbatim (used by the cache).
    pub(crate) fn from_raw(values: Vec<f32>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Cosine similarity; 0 against the zero vector, exactly 1 for a
    /// bitwise-identical non-zero vector.
    pub fn cosine(&self, other: &Self) -> f64 {
        if self.is_zero() || other.is_zero() || self.dimension() != other.dimension() {
            return 0.0;
        }
        if self.values == other.values {
            return 1.0;
        }
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f64::from(a) * f64::from(b))
            .sum();
        (dot / (self.norm() * other.norm())).clamp(-1.0, 1.0)
    }
}

/// A text encoder. Implementations must be deterministic for a fixed identity.
pub trait Encoder: Send + Sync {
    /// Stable identifier, e.g. `test-hash-v1` or a model id.
    fn identity(&self) -> &str;

    /// Output dimension, when known ahead of the first call.
    fn dimension(&self) -> Option<usize>;

    /// Embed already-preprocessed, non-empty texts, preserving order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError>;
}

/// Trim and collapse internal whitespace. Case is left untouched.
pub fn preprocess(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Embed one text with `encoder`.
pub fn embed(encoder: &dyn Encoder, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
    let text = preprocess(text);
    if text.is_empty() {
        return Err(EmbeddingError::Validation("cannot embed empty text".into()));
    }
    let mut out = encoder.embed_batch(std::slice::from_ref(&text))?;
    out.pop()
        .ok_or_else(|| EmbeddingError::Protocol("encoder returned no vector".into()))
}

/// Clipped semantic similarity between two labels, in `[0, 1]`.
pub trait Similarity: Send + Sync {
    fn similarity(&self, x: &str, y: &str) -> Result<f64, EmbeddingError>;

    /// Hint that these texts will be compared soon, so a batching backend
    /// can fetch them in one round trip.
    fn prepare(&self, _texts: &[&str]) -> Result<(), EmbeddingError> {
        Ok(())
    }

    /// Identifier recorded in reports.
    fn identity(&self) -> String;
}

/// `max(0, cos(e(x), e(y)))`.
pub fn sim(x: &str, y: &str, provider: &dyn Similarity) -> Result<f64, EmbeddingError> {
    provider.similarity(x, y)
}

/// `1 - sim(x, y)`.
pub fn renaming_cost(x: &str, y: &str, provider: &dyn Similarity) -> Result<f64, EmbeddingError> {
    Ok(1.0 - provider.similarity(x, y)?)
}

/// Similarity backed by an encoder, with an in-memory vector memo and an
/// optional persistent cache.
pub struct EncoderSimilarity<E> {
    encoder: E,
    memo: RwLock<HashMap<String, EmbeddingVector>>,
    cache: Option<SimilarityCache>,
}

impl<E: Encoder> EncoderSimilarity<E> {
    pub fn new(encoder: E) -> Self {
        Self {
            encoder,
            memo: RwLock::new(HashMap::new()),
            cache: None,
        }
    }

    pub fn with_cache(mut self, cache: SimilarityCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }

    /// Embedding of `text`, computed at most once per distinct text (modulo
    /// benign races between threads).
    pub fn vector(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let text = preprocess(text);
        if text.is_empty() {
            return Err(EmbeddingError::Validation("cannot embed empty text".into()));
        }
        if let Some(v) = self.memo.read().expect("memo lock poisoned").get(&text) {
            return Ok(v.clone());
        }
        self.fetch(std::slice::from_ref(&text))?;
        Ok(self.memo.read().expect("memo lock poisoned")[&text].clone())
    }

    fn fetch(&self, texts: &[String]) -> Result<(), EmbeddingError> {
        let identity = self.encoder.identity();
        let mut missing = Vec::new();
        for text in texts {
            if let Some(v) = self.cache.as_ref().and_then(|c| c.get(identity, text)) {
                self.memo.write().expect("memo lock poisoned").insert(text.clone(), v);
            } else {
                missing.push(text.clone());
            }
        }
        if missing.is_empty() {
            return Ok(());
        }
        let vectors = self.encoder.embed_batch(&missing)?;
        if vectors.len() != missing.len() {
            return Err(EmbeddingError::Protocol(format!(
                "encoder returned {} vectors for {} texts",
                vectors.len(),
                missing.len()
            )));
        }
        for (text, v) in missing.into_iter().zip(vectors) {
            if let Some(cache) = &self.cache {
                cache.insert(identity, &text, &v)?;
            }
            self.memo.write().expect("memo lock poisoned").insert(text, v);
        }
        Ok(())
    }
}

impl<E: Encoder> Similarity for EncoderSimilarity<E> {
    fn similarity(&self, x: &str, y: &str) -> Result<f64, EmbeddingError> {
        let (px, py) = (preprocess(x), preprocess(y));
        if px.is_empty() || py.is_empty() {
            return Err(EmbeddingError::Validation("cannot compare empty text".into()));
        }
        if px == py {
            return Ok(1.0);
        }
        let (ex, ey) = (self.vector(&px)?, self.vector(&py)?);
        Ok(ex.cosine(&ey).max(0.0))
    }

    fn prepare(&self, texts: &[&str]) -> Result<(), EmbeddingError> {
        let mut wanted: Vec<String> = {
            let memo = self.memo.read().expect("memo lock poisoned");
            texts
                .iter()
                .map(|t| preprocess(t))
                .filter(|t| !t.is_empty() && !memo.contains_key(t))
                .collect()
        };
        wanted.sort();
        wanted.dedup();
        if wanted.is_empty() {
            return Ok(());
        }
        self.fetch(&wanted)
    }

    fn identity(&self) -> String {
        self.encoder.identity().to_string()
    }
}

impl<S: Similarity + ?Sized> Similarity for &S {
    fn similarity(&self, x: &str, y: &str) -> Result<f64, EmbeddingError> {
        (**self).similarity(x, y)
    }

    fn prepare(&self, texts: &[&str]) -> Result<(), EmbeddingError> {
        (**self).prepare(texts)
    }

    fn identity(&self) -> String {
        (**self).identity()
    }
}

impl<S: Similarity + ?Sized> Similarity for Box<S> {
    fn similarity(&self, x: &str, y: &str) -> Result<f64, EmbeddingError> {
        (**self).similarity(x, y)
    }

    fn prepare(&self, texts: &[&str]) -> Result<(), EmbeddingError> {
        (**self).prepare(texts)
    }

    fn identity(&self) -> String {
        (**self).identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(pairs: &[(&str, Vec<f64>)]) -> EncoderSimilarity<FixedEncoder> {
        let mut enc = FixedEncoder::new("fixed");
        for (text, v) in pairs {
            enc.insert(text, v.clone()).unwrap();
        }
        EncoderSimilarity::new(enc)
    }

    #[test]
    fn embed_is_deterministic_and_unit() {
        let enc = HashEncoder::default();
        let a = embed(&enc, "x").unwrap();
        let b = embed(&enc, "x").unwrap();
        assert_eq!(a, b);
        for text in ["x", "large language models", "  tool   use "] {
            let v = embed(&enc, text).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-6);
        }
        assert!(matches!(embed(&enc, "   "), Err(EmbeddingError::Validation(_))));
    }

    #[test]
    fn sim_identity_and_clipping() {
        let s = fixed(&[
            ("a", vec![1.0, 0.0]),
            ("anti", vec![-1.0, 0.0]),
            ("orth", vec![0.0, 1.0]),
            ("q", vec![0.75, (1.0f64 - 0.5625).sqrt()]),
        ]);
        assert_eq!(sim("a", "a", &s).unwrap(), 1.0);
        assert_eq!(sim("a", "anti", &s).unwrap(), 0.0);
        assert_eq!(sim("a", "orth", &s).unwrap(), 0.0);
        assert_eq!(renaming_cost("a", "a", &s).unwrap(), 0.0);
        assert_eq!(renaming_cost("a", "orth", &s).unwrap(), 1.0);
        assert!((renaming_cost("a", "q", &s).unwrap() - 0.25).abs() < 1e-7);
    }

    #[test]
    fn zero_vector_has_zero_cosine() {
        let z = EmbeddingVector::normalized(vec![0.0, 0.0]).unwrap();
        let a = EmbeddingVector::normalized(vec![1.0, 0.0]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.cosine(&a), 0.0);
        assert_eq!(z.cosine(&z), 0.0);
        assert!(EmbeddingVector::normalized(vec![f64::NAN]).is_err());
    }

    #[test]
    fn whitespace_is_collapsed_but_case_kept() {
        assert_eq!(preprocess("  Tool   Use\t"), "Tool Use");
        let s = EncoderSimilarity::new(HashEncoder::default());
        assert_eq!(sim("tool  use", " tool use", &s).unwrap(), 1.0);
        assert!(sim("Tool", "tool", &s).unwrap() < 1.0);
    }

    #[test]
    fn prepare_then_lookup_is_transparent() {
        let cold = EncoderSimilarity::new(HashEncoder::default());
        let warm = EncoderSimilarity::new(HashEncoder::default());
        warm.prepare(&["alpha beta", "beta gamma"]).unwrap();
        assert_eq!(
            cold.similarity("alpha beta", "beta gamma").unwrap(),
            warm.similarity("alpha beta", "beta gamma").unwrap()
        );
    }
}
