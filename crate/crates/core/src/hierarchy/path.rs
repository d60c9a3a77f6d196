//! Ancestor-chain consistency between aligned papers.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::alignment::{AlignmentSet, NormalizedTitle};
use crate::embedding::{EmbeddingError, Similarity};
use crate::taxonomy::Taxonomy;

pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathAlignmentResult {
    /// Alignment cost `J_d`, keyed by expert paper.
    pub per_paper_costs: BTreeMap<NormalizedTitle, f64>,
    /// Mean of `1 / (1 + J_d)`; `None` when nothing is aligned.
    pub sem_path: Option<f64>,
    pub aligned_count: usize,
}

/// Cost of embedding the shorter label sequence into the longer one as an
/// ordered subsequence, plus `lambda` per unmatched element of the longer.
///
/// Uses `dp[0][j] = 0` and
/// `dp[i][j] = min(dp[i-1][j-1] + delta(a_i, b_j), dp[i][j-1])`.
pub fn sem_path_cost<S: AsRef<str>>(
    s: &[S],
    s_hat: &[S],
    lambda: f64,
    provider: &dyn Similarity,
) -> Result<f64, EmbeddingError> {
    let (short, long) = if s.len() <= s_hat.len() { (s, s_hat) } else { (s_hat, s) };
    let (m, n) = (short.len(), long.len());
    let gap = lambda * (n - m) as f64;
    if m == 0 {
        return Ok(gap);
    }
    let mut prev = vec![0.0f64; n + 1];
    let mut cur = vec![f64::INFINITY; n + 1];
    for i in 1..=m {
        cur[..i].fill(f64::INFINITY);
        for j in i..=n {
            let delta = 1.0 - provider.similarity(short[i - 1].as_ref(), long[j - 1].as_ref())?;
            cur[j] = (prev[j - 1] + delta).min(cur[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n] + gap)
}

/// Sem-Path over the aligned pairs. A paper stored under several leaves
/// takes the cheapest pair of candidate paths.
pub fn sem_path(
    expert: &Taxonomy,
    model: &Taxonomy,
    alignment: &AlignmentSet,
    lambda: f64,
    provider: &dyn Similarity,
) -> Result<PathAlignmentResult, EmbeddingError> {
    let mut jobs = Vec::with_capacity(alignment.len());
    let mut labels = BTreeSet::new();
    for pair in &alignment.pairs {
        let a = expert.ancestor_paths(pair.expert.as_str());
        let b = model.ancestor_paths(pair.model.as_str());
        for path in a.iter().chain(&b) {
            labels.extend(path.iter().cloned());
        }
        jobs.push((&pair.expert, a, b));
    }
    let texts: Vec<&str> = labels.iter().map(String::as_str).collect();
    provider.prepare(&texts)?;

    let mut per_paper_costs = BTreeMap::new();
    for (paper, a, b) in jobs {
        let mut best = f64::INFINITY;
        for pa in &a {
            for pb in &b {
                best = best.min(sem_path_cost(pa, pb, lambda, provider)?);
            }
        }
        if best.is_finite() {
            per_paper_costs.insert(paper.clone(), best);
        } else {
            log::warn!("aligned paper {paper} has no ancestor path in one of the trees");
        }
    }
    let aligned_count = per_paper_costs.len();
    let sem_path = (aligned_count > 0)
        .then(|| per_paper_costs.values().map(|j| 1.0 / (1.0 + j)).sum::<f64>() / aligned_count as f64);
    Ok(PathAlignmentResult {
        per_paper_costs,
        sem_path,
        aligned_count,
    })
}
