//! Text embeddings: provider protocol, on-disk cache, and the vector math
//! shared by every embedding-based metric.

mod cache;
mod file;
mod provider;

pub use cache::EmbeddingCache;
pub use file::{read_embedding_file, write_embedding_file};
pub use provider::{
    embed, EmbedOutcome, EmbeddingProvider, HttpEmbeddingClient, MockEmbeddingProvider,
    RetryPolicy,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A fixed-dimension real vector representing a text.
///
/// All vectors in one evaluation run share the same dimension; entries are
/// finite by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Builds a vector, rejecting non-finite entries and zero dimension.
    pub fn new(values: Vec<f64>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VectorError {
    #[error("embedding vector must not be empty")]
    Empty,
    #[error("embedding vector contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("centroid of an empty vector list is undefined")]
    EmptyCentroid,
}

/// Cosine similarity between two vectors of equal dimension.
///
/// Undefined (error) when either vector is all-zero.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, VectorError> {
    if a.dim() != b.dim() {
        return Err(VectorError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.is_zero() || b.is_zero() {
        return Err(VectorError::ZeroVector);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok(dot / (a.norm() * b.norm()))
}

/// Component-wise arithmetic mean of a non-empty list of vectors.
pub fn centroid(vectors: &[EmbeddingVector]) -> Result<EmbeddingVector, VectorError> {
    let first = vectors.first().ok_or(VectorError::EmptyCentroid)?;
    let dim = first.dim();
    let mut sums = vec![0.0; dim];
    for v in vectors {
        if v.dim() != dim {
            return Err(VectorError::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
        for (s, x) in sums.iter_mut().zip(&v.0) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    for s in &mut sums {
        *s /= n;
    }
    EmbeddingVector::new(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn vec2(x: f64, y: f64) -> EmbeddingVector {
        EmbeddingVector::new(vec![x, y]).unwrap()
    }

    #[test]
    fn cosine_of_vector_with_itself_is_one() {
        let v = EmbeddingVector::new(vec![0.3, -1.2, 4.0]).unwrap();
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal_is_zero() {
        assert_eq!(cosine(&vec2(1.0, 0.0), &vec2(0.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn cosine_hand_computed() {
        // dot = 32, norms sqrt(14) and sqrt(77)
        let a = EmbeddingVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = EmbeddingVector::new(vec![4.0, 5.0, 6.0]).unwrap();
        assert!((cosine(&a, &b).unwrap() - 0.9746318461970762).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vector_errors() {
        let z = EmbeddingVector::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(cosine(&z, &vec2(1.0, 0.0)), Err(VectorError::ZeroVector));
    }

    #[test]
    fn cosine_dimension_mismatch_errors() {
        let a = EmbeddingVector::new(vec![1.0]).unwrap();
        assert!(matches!(
            cosine(&a, &vec2(1.0, 0.0)),
            Err(VectorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn centroid_singleton_is_identity() {
        let v = EmbeddingVector::new(vec![7.0, -2.0]).unwrap();
        assert_eq!(centroid(&[v.clone()]).unwrap(), v);
    }

    #[test]
    fn centroid_symmetric_pair() {
        let c = centroid(&[vec2(0.0, 0.0), vec2(2.0, 2.0)]).unwrap();
        assert_eq!(c, vec2(1.0, 1.0));
    }

    #[test]
    fn centroid_matches_summation_oracle() {
        // Independent oracle: accumulate component sums in a plain loop over
        // indices rather than through the centroid implementation.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dim = 16;
        let vectors: Vec<EmbeddingVector> = (0..100)
            .map(|_| {
                EmbeddingVector::new((0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).unwrap()
            })
            .collect();
        let mut expected = vec![0.0f64; dim];
        for i in 0..dim {
            let mut s = 0.0;
            for v in &vectors {
                s += v.values()[i];
            }
            expected[i] = s / vectors.len() as f64;
        }
        let got = centroid(&vectors).unwrap();
        for i in 0..dim {
            assert!((got.values()[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_symmetry_and_scale_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = EmbeddingVector::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .unwrap();
            let b = EmbeddingVector::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .unwrap();
            let ab = cosine(&a, &b).unwrap();
            let ba = cosine(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            let alpha = rng.gen_range(0.1..10.0);
            let scaled =
                EmbeddingVector::new(a.values().iter().map(|v| v * alpha).collect()).unwrap();
            assert!((cosine(&scaled, &b).unwrap() - ab).abs() < 1e-9);
            assert!(ab.abs() <= 1.0 + 1e-12);
        }
    }
}
