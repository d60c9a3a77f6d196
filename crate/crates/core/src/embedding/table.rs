use std::collections::HashMap;

use super::{preprocess, EmbeddingError, EmbeddingVector, Encoder, Similarity};

/// Encoder with hand-picked vectors, for constructing exact geometries.
#[derive(Debug, Clone, Default)]
pub struct FixedEncoder {
    identity: String,
    dimension: Option<usize>,
    vectors: HashMap<String, EmbeddingVector>,
}

impl FixedEncoder {
    pub fn new(identity: impl Into<String>) -> Self {
        Self {
            identity: identity.into(),
            ..Self::default()
        }
    }

    /// Register the (normalized) vector for `text`.
    pub fn insert(&mut self, text: &str, values: Vec<f64>) -> Result<(), EmbeddingError> {
        let dim = values.len();
        match self.dimension {
            Some(d) if d != dim => {
                return Err(EmbeddingError::Validation(format!(
                    "vector for {text:?} has dimension {dim}, expected {d}"
                )))
            }
            _ => self.dimension = Some(dim),
        }
        self.vectors.insert(preprocess(text), EmbeddingVector::normalized(values)?);
        Ok(())
    }
}

impl Encoder for FixedEncoder {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(t)
                    .cloned()
                    .ok_or_else(|| EmbeddingError::Validation(format!("no vector registered for {t:?}")))
            })
            .collect()
    }
}

/// Similarity given directly as a symmetric table of pairwise values.
///
/// Identical texts always score 1; unlisted pairs score `default`. This can
/// express configurations that no single embedding space realizes.
#[derive(Debug, Clone)]
pub struct SimilarityTable {
    default: f64,
    pairs: HashMap<(String, String), f64>,
}

impl SimilarityTable {
    pub fn new(default: f64) -> Self {
        Self {
            default: default.clamp(0.0, 1.0),
            pairs: HashMap::new(),
        }
    }

    fn key(x: &str, y: &str) -> (String, String) {
        let (x, y) = (preprocess(x), preprocess(y));
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    }

    /// Set `sim(x, y) = sim(y, x) = value`, clipped to `[0, 1]`.
    pub fn set(&mut self, x: &str, y: &str, value: f64) -> &mut Self {
        self.pairs.insert(Self::key(x, y), value.clamp(0.0, 1.0));
        self
    }

    pub fn with(mut self, x: &str, y: &str, value: f64) -> Self {
        self.set(x, y, value);
        self
    }
}

impl Similarity for SimilarityTable {
    fn similarity(&self, x: &str, y: &str) -> Result<f64, EmbeddingError> {
        let key = Self::key(x, y);
        if key.0.is_empty() || key.1.is_empty() {
            return Err(EmbeddingError::Validation("cannot compare empty text".into()));
        }
        if key.0 == key.1 {
            return Ok(1.0);
        }
        Ok(self.pairs.get(&key).copied().unwrap_or(self.default))
    }

    fn identity(&self) -> String {
        "similarity-table".into()
    }
}
