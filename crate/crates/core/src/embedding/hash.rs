use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{EmbeddingError, EmbeddingVector, Encoder};

const DEFAULT_SEED: u64 = 0x7a78_6f65_7661_6c01;

/// Deterministic offline encoder.
///
/// Every whitespace token is hashed (SHA-256 of the seed and the token) into
/// the seed of a ChaCha8 stream, which draws a Gaussian vector: a uniformly
/// random direction per token. A text embeds to the renormalized mean of its
/// token directions, so texts sharing tokens get positive similarity and
/// texts with disjoint tokens are nearly orthogonal.
#[derive(Debug, Clone)]
pub struct HashEncoder {
    identity: String,
    dimension: usize,
    seed: u64,
}

impl HashEncoder {
    pub const IDENTITY: &'static str = "test-hash-v1";

    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        let identity = if dimension == 64 && seed == DEFAULT_SEED {
            Self::IDENTITY.to_string()
        } else {
            format!("{}-d{dimension}-s{seed:x}", Self::IDENTITY)
        };
        Self {
            identity,
            dimension,
            seed,
        }
    }

    fn token_direction(&self, token: &str, acc: &mut [f64]) {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(token.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(digest);
        let draws: Vec<f64> = (0..self.dimension).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = draws.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, d) in acc.iter_mut().zip(draws) {
            *a += d / norm;
        }
    }

    fn embed_one(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let mut acc = vec![0.0; self.dimension];
        let mut count = 0usize;
        for token in text.split_whitespace() {
            self.token_direction(token, &mut acc);
            count += 1;
        }
        if count == 0 {
            return Err(EmbeddingError::Validation("cannot embed empty text".into()));
        }
        let n = count as f64;
        EmbeddingVector::normalized(acc.into_iter().map(|v| v / n).collect())
    }
}

impl Default for HashEncoder {
    fn default() -> Self {
        Self::new(64, DEFAULT_SEED)
    }
}

impl Encoder for HashEncoder {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn dimension(&self) -> Option<usize> {
        Some(self.dimension)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
