//! Leaf-level agreement between paper-to-category assignments: ARI and the
//! homogeneity / completeness / V-measure family, plus the two restricted
//! views used when the model did its own retrieval.

use std::collections::{BTreeMap, BTreeSet};

use crate::alignment::{AlignmentSet, NormalizedTitle};
use crate::taxonomy::{CategoryId, PaperAssignment};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("paper '{paper}' has no entry in the {side} assignment")]
    MissingEntry { paper: String, side: &'static str },
}

/// Counts `n_ij` of papers in expert class `i` and model cluster `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Build from a dense count matrix (rows = expert classes).
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let cols = counts.first().map_or(0, Vec::len);
        assert!(counts.iter().all(|r| r.len() == cols), "ragged contingency matrix");
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let total = row_sums.iter().sum();
        Self {
            counts,
            row_sums,
            col_sums,
            total,
        }
    }

    /// Build from two parallel label sequences.
    pub fn from_labels<A: Ord, B: Ord>(expert: &[A], model: &[B]) -> Self {
        assert_eq!(expert.len(), model.len(), "label sequences differ in length");
        let rows: BTreeMap<&A, usize> = expert
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let cols: BTreeMap<&B, usize> = model
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (a, b) in expert.iter().zip(model) {
            counts[rows[a]][cols[b]] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_sums.len(), self.col_sums.len())
    }

    fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flatten().copied()
    }
}

/// Contingency table of `u_star` against `u_hat` over `universe`.
pub fn contingency(
    u_star: &PaperAssignment,
    u_hat: &PaperAssignment,
    universe: &BTreeSet<NormalizedTitle>,
) -> Result<ContingencyTable, PartitionError> {
    let mut expert = Vec::with_capacity(universe.len());
    let mut model = Vec::with_capacity(universe.len());
    for paper in universe {
        let e = u_star.get(paper).ok_or_else(|| PartitionError::MissingEntry {
            paper: paper.to_string(),
            side: "expert",
        })?;
        let m = u_hat.get(paper).ok_or_else(|| PartitionError::MissingEntry {
            paper: paper.to_string(),
            side: "model",
        })?;
        expert.push(e);
        model.push(m);
    }
    Ok(ContingencyTable::from_labels(&expert, &model))
}

fn choose2(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand Index from the contingency table.
///
/// When the chance-corrected denominator vanishes (both partitions
/// trivial), returns 1 if the two partitions coincide and 0 otherwise.
pub fn ari(table: &ContingencyTable) -> f64 {
    let index: f64 = table.cells().map(choose2).sum();
    let sum_rows: f64 = table.row_sums.iter().copied().map(choose2).sum();
    let sum_cols: f64 = table.col_sums.iter().copied().map(choose2).sum();
    let pairs = choose2(table.total);
    let expected = if pairs > 0.0 { sum_rows * sum_cols / pairs } else { 0.0 };
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom.abs() <= 1e-12 * max_index.max(1.0) {
        return if same_partition(table) { 1.0 } else { 0.0 };
    }
    (index - expected) / denom
}

/// Whether every row and column has exactly one non-zero cell.
fn same_partition(table: &ContingencyTable) -> bool {
    let nonzero_in_row = table.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() == 1);
    let nonzero_in_col =
        (0..table.col_sums.len()).all(|j| table.counts.iter().filter(|r| r[j] > 0).count() == 1);
    nonzero_in_row && nonzero_in_col
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Homogeneity, completeness and V-measure (natural log).
///
/// Zero-entropy conventions: homogeneity is 1 when the expert partition has
/// a single class, completeness is 1 when the model has a single cluster,
/// and V is 0 when both components are 0.
pub fn homogeneity_completeness_v(table: &ContingencyTable) -> VMeasure {
    let n = table.total as f64;
    if table.total == 0 {
        return VMeasure {
            homogeneity: 1.0,
            completeness: 1.0,
            v_measure: 1.0,
        };
    }
    let h_expert = entropy(&table.row_sums, n);
    let h_model = entropy(&table.col_sums, n);
    // H(U*|Û) and H(Û|U*)
    let mut h_expert_given_model = 0.0;
    let mut h_model_given_expert = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            h_expert_given_model -= c / n * (c / table.col_sums[j] as f64).ln();
            h_model_given_expert -= c / n * (c / table.row_sums[i] as f64).ln();
        }
    }
    let homogeneity = if h_expert == 0.0 { 1.0 } else { (1.0 - h_expert_given_model / h_expert).clamp(0.0, 1.0) };
    let completeness = if h_model == 0.0 { 1.0 } else { (1.0 - h_model_given_expert / h_model).clamp(0.0, 1.0) };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    VMeasure {
        homogeneity,
        completeness,
        v_measure,
    }
}

/// Assignments restricted to the aligned expert papers.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedView {
    pub expert: PaperAssignment,
    /// Model assignment re-keyed by expert paper id.
    pub model: PaperAssignment,
    pub universe: BTreeSet<NormalizedTitle>,
}

impl RestrictedView {
    /// Empty intersections make downstream metrics undefined.
    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }
}

/// Restrict both assignments to the aligned papers, keyed by expert id.
pub fn restrict_to_intersection(
    u_star: &PaperAssignment,
    u_hat: &PaperAssignment,
    alignment: &AlignmentSet,
) -> RestrictedView {
    let mut expert = PaperAssignment::new();
    let mut model = PaperAssignment::new();
    let mut universe = BTreeSet::new();
    for pair in &alignment.pairs {
        if let (Some(e), Some(m)) = (u_star.get(&pair.expert), u_hat.get(&pair.model)) {
            expert.insert(pair.expert.clone(), e);
            model.insert(pair.expert.clone(), m);
            universe.insert(pair.expert.clone());
        }
    }
    RestrictedView {
        expert,
        model,
        universe,
    }
}

/// Model assignment over the whole expert universe: aligned papers keep the
/// category of their matched model paper, the rest map to `Unretrieved`.
pub fn extend_e2e(
    u_hat: &PaperAssignment,
    alignment: &AlignmentSet,
    expert_universe: &BTreeSet<NormalizedTitle>,
) -> PaperAssignment {
    let matched = alignment.expert_to_model();
    PaperAssignment::from_entries(expert_universe.iter().map(|p| {
        let category = matched
            .get(p)
            .and_then(|m| u_hat.get(m))
            .unwrap_or(CategoryId::Unretrieved);
        (p.clone(), category)
    }))
}

/// ARI and V-measure family of one comparison; `None` when the universe is
/// empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafScores {
    pub ari: Option<f64>,
    pub homogeneity: Option<f64>,
    pub completeness: Option<f64>,
    pub v_measure: Option<f64>,
}

impl LeafScores {
    pub const NULL: LeafScores = LeafScores {
        ari: None,
        homogeneity: None,
        completeness: None,
        v_measure: None,
    };
}

pub fn leaf_scores(
    u_star: &PaperAssignment,
    u_hat: &PaperAssignment,
    universe: &BTreeSet<NormalizedTitle>,
) -> Result<LeafScores, PartitionError> {
    if universe.is_empty() {
        return Ok(LeafScores::NULL);
    }
    let table = contingency(u_star, u_hat, universe)?;
    let v = homogeneity_completeness_v(&table);
    Ok(LeafScores {
        ari: Some(ari(&table)),
        homogeneity: Some(v.homogeneity),
        completeness: Some(v.completeness),
        v_measure: Some(v.v_measure),
    })
}
