//! Paper-title normalization and expert/model paper alignment.
//!
//! Two papers align when their normalized titles score a similarity of 1,
//! or score at least the threshold (0.6 by default) and one normalized title
//! contains the other. Each paper takes part in at most one pair.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use crate::embedding::{EmbeddingError, Similarity};

pub const DEFAULT_ALIGNMENT_THRESHOLD: f64 = 0.6;

/// Canonical title: NFC, lowercase, every character outside `[a-z0-9]`
/// replaced by a space, whitespace collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NormalizedTitle(String);

impl NormalizedTitle {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whole-word containment in either direction.
    pub fn contains_either(&self, other: &NormalizedTitle) -> bool {
        let (a, b) = (format!(" {} ", self.0), format!(" {} ", other.0));
        a.contains(&b) || b.contains(&a)
    }
}

impl fmt::Display for NormalizedTitle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedTitle {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn normalize_title(raw: &str) -> NormalizedTitle {
    let mapped: String = raw
        .nfc()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_ascii_lowercase() || c.is_ascii_digit() { c } else { ' ' })
        .collect();
    NormalizedTitle(mapped.split_whitespace().collect::<Vec<_>>().join(" "))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPair {
    pub expert: NormalizedTitle,
    pub model: NormalizedTitle,
    pub score: f64,
}

/// One-to-one matching between expert and model papers.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AlignmentSet {
    pub pairs: Vec<AlignedPair>,
    pub unmatched_expert: Vec<NormalizedTitle>,
    pub unmatched_model: Vec<NormalizedTitle>,
}

impl AlignmentSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Model paper matched to `expert`, if any.
    pub fn model_for(&self, expert: &NormalizedTitle) -> Option<&NormalizedTitle> {
        self.pairs.iter().find(|p| &p.expert == expert).map(|p| &p.model)
    }

    /// Map from expert paper to its matched model paper.
    pub fn expert_to_model(&self) -> BTreeMap<&NormalizedTitle, &NormalizedTitle> {
        self.pairs.iter().map(|p| (&p.expert, &p.model)).collect()
    }
}

fn dedup_normalized<S: AsRef<str>>(titles: &[S]) -> Vec<NormalizedTitle> {
    let mut seen = HashSet::new();
    titles
        .iter()
        .map(|t| normalize_title(t.as_ref()))
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect()
}

/// Whether a scored pair passes the matching rule.
pub fn is_match(expert: &NormalizedTitle, model: &NormalizedTitle, score: f64, threshold: f64) -> bool {
    score >= 1.0 || (score >= threshold && expert.contains_either(model))
}

struct Candidate {
    model: usize,
    score: f64,
    edit: usize,
}

/// Align with the default threshold of 0.6.
pub fn align<S: AsRef<str>>(
    expert: &[S],
    model: &[S],
    provider: &dyn Similarity,
) -> Result<AlignmentSet, EmbeddingError> {
    align_with_threshold(expert, model, provider, DEFAULT_ALIGNMENT_THRESHOLD)
}

/// Build the aligned-paper set.
///
/// Expert papers are processed in descending order of their best eligible
/// score; each claims its best remaining model paper. Equal scores prefer
/// the smaller Levenshtein distance between normalized titles, then the
/// lexicographically smaller model title.
pub fn align_with_threshold<S: AsRef<str>>(
    expert: &[S],
    model: &[S],
    provider: &dyn Similarity,
    threshold: f64,
) -> Result<AlignmentSet, EmbeddingError> {
    let experts = dedup_normalized(expert);
    let models = dedup_normalized(model);
    let texts: Vec<&str> = experts.iter().chain(&models).map(NormalizedTitle::as_str).collect();
    provider.prepare(&texts)?;

    let mut candidates: Vec<(usize, Vec<Candidate>)> = Vec::with_capacity(experts.len());
    for (ei, e) in experts.iter().enumerate() {
        let mut list = Vec::new();
        for (mi, m) in models.iter().enumerate() {
            let score = if e == m { 1.0 } else { provider.similarity(e.as_str(), m.as_str())? };
            if is_match(e, m, score, threshold) {
                list.push(Candidate {
                    model: mi,
                    score: score.min(1.0),
                    edit: strsim::levenshtein(e.as_str(), m.as_str()),
                });
            }
        }
        list.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then(a.edit.cmp(&b.edit))
                .then_with(|| models[a.model].cmp(&models[b.model]))
        });
        if !list.is_empty() {
            candidates.push((ei, list));
        }
    }
    candidates.sort_by(|(ea, a), (eb, b)| {
        b[0].score
            .partial_cmp(&a[0].score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| experts[*ea].cmp(&experts[*eb]))
    });

    let mut claimed = vec![false; models.len()];
    let mut matched_expert = vec![false; experts.len()];
    let mut pairs = Vec::new();
    for (ei, list) in candidates {
        if let Some(c) = list.iter().find(|c| !claimed[c.model]) {
            claimed[c.model] = true;
            matched_expert[ei] = true;
            pairs.push(AlignedPair {
                expert: experts[ei].clone(),
                model: models[c.model].clone(),
                score: c.score,
            });
        }
    }
    pairs.sort_by(|a, b| a.expert.cmp(&b.expert));
    Ok(AlignmentSet {
        pairs,
        unmatched_expert: experts
            .iter()
            .zip(&matched_expert)
            .filter(|(_, m)| !**m)
            .map(|(e, _)| e.clone())
            .collect(),
        unmatched_model: models
            .iter()
            .zip(&claimed)
            .filter(|(_, c)| !**c)
            .map(|(m, _)| m.clone())
            .collect(),
    })
}

/// Set-based retrieval scores. `None` where a denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetrievalScores {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

pub fn retrieval_scores(alignment: &AlignmentSet, n_expert: usize, n_model: usize) -> RetrievalScores {
    let hits = alignment.len() as f64;
    let recall = (n_expert > 0).then(|| hits / n_expert as f64);
    let precision = (n_model > 0).then(|| hits / n_model as f64);
    let f1 = match (recall, precision) {
        (Some(r), Some(p)) if r + p > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    RetrievalScores { recall, precision, f1 }
}
