//! Hierarchy-level structural metrics.

mod assignment;
mod path;
mod ted;

pub use assignment::{match_children, match_cost, min_cost_assignment, padded_cost_matrix, Assignment, ChildMatching};
pub use path::{sem_path, sem_path_cost, PathAlignmentResult, DEFAULT_LAMBDA};
pub use ted::{us_nted, us_ted, us_ted_with_witness, EditDistanceResult, EditWitness};
