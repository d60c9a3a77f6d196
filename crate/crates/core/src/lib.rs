//! Evaluation of generated survey taxonomies against expert references.
//!
//! Covers title alignment and retrieval scores, leaf-level partition
//! agreement, unordered semantic tree edit distance, ancestor-path
//! consistency, soft-cardinality label metrics, controlled perturbations,
//! and a batch harness producing JSON and CSV reports.

pub mod alignment;
pub mod embedding;
pub mod eval;
pub mod hierarchy;
pub mod partition;
pub mod perturb;
pub mod soft_cardinality;
pub mod synth;
pub mod taxonomy;

pub use alignment::{align, normalize_title, retrieval_scores, AlignmentSet, NormalizedTitle, RetrievalScores};
pub use embedding::{EmbeddingError, EncoderSimilarity, HashEncoder, Similarity, SimilarityTable};
pub use eval::{evaluate, EvaluationConfig, MetricReport, Mode};
pub use hierarchy::{sem_path, sem_path_cost, us_ted, EditDistanceResult, PathAlignmentResult};
pub use partition::{ari, homogeneity_completeness_v, ContingencyTable, LeafScores};
pub use perturb::Perturbation;
pub use soft_cardinality::{nsr_nsp_f1, soft_cardinality};
pub use taxonomy::{CategoryHierarchy, CategoryId, CategoryNode, PaperAssignment, ParseMode, Taxonomy};
