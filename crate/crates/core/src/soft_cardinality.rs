//! Soft-cardinality label-list metrics (NSR, NSP, Soft-F1).
//!
//! These scores compare label multisets only and ignore tree structure.
//! Reports list them as auxiliary diagnostics.

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{EmbeddingError, Similarity};
use crate::taxonomy::CategoryHierarchy;

#[derive(Debug, Error)]
pub enum SoftCardinalityError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("label {0:?} has a zero similarity row sum")]
    ZeroRow(String),
    #[error("label list is empty")]
    Empty,
}

/// Every hierarchy label in preorder, root included, duplicates kept.
pub fn collect_labels(h: &CategoryHierarchy) -> Vec<String> {
    h.root().preorder().map(|n| n.label().to_string()).collect()
}

/// `c(A) = sum_i 1 / sum_j Sim(a_i, a_j)`.
pub fn soft_cardinality<S: AsRef<str>>(labels: &[S], provider: &dyn Similarity) -> Result<f64, SoftCardinalityError> {
    let texts: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    provider.prepare(&texts)?;
    let n = texts.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        matrix[i][i] = provider.similarity(texts[i], texts[i])?;
        for j in i + 1..n {
            let s = provider.similarity(texts[i], texts[j])?;
            matrix[i][j] = s;
            matrix[j][i] = s;
        }
    }
    let mut total = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum <= 0.0 {
            return Err(SoftCardinalityError::ZeroRow(texts[i].to_string()));
        }
        total += 1.0 / sum;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftScores {
    pub nsr: f64,
    pub nsp: f64,
    pub soft_f1: f64,
}

/// NSR, NSP and their harmonic mean. The union is list concatenation.
pub fn nsr_nsp_f1<S: AsRef<str>>(
    a: &[S],
    b: &[S],
    provider: &dyn Similarity,
) -> Result<SoftScores, SoftCardinalityError> {
    if a.is_empty() || b.is_empty() {
        return Err(SoftCardinalityError::Empty);
    }
    let ca = soft_cardinality(a, provider)?;
    let cb = soft_cardinality(b, provider)?;
    let union: Vec<&str> = a.iter().map(AsRef::as_ref).chain(b.iter().map(AsRef::as_ref)).collect();
    let cu = soft_cardinality(&union, provider)?;
    let overlap = ca + cb - cu;
    let nsr = overlap / ca;
    let nsp = overlap / cb;
    let soft_f1 = if nsr + nsp == 0.0 { 0.0 } else { 2.0 * nsr * nsp / (nsr + nsp) };
    Ok(SoftScores { nsr, nsp, soft_f1 })
}
