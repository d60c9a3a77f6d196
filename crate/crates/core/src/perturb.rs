//! Controlled edits of a taxonomy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::normalize_title;
use crate::taxonomy::{CategoryNode, NodePath, PathError, Taxonomy};

#[derive(Debug, Error, PartialEq)]
pub enum PerturbError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("'{a}' and '{b}' are in an ancestor relation")]
    AncestorConflict { a: String, b: String },
    #[error("the root cannot be contracted")]
    RootContraction,
    #[error("'{0}' is terminal")]
    Terminal(String),
    #[error("'{0}' is not terminal")]
    NotTerminal(String),
    #[error("'{path}' holds {papers} papers, fewer than {parts} parts")]
    TooFewPapers { path: String, papers: usize, parts: usize },
    #[error("a split needs at least 2 parts, got {0}")]
    TooFewParts(usize),
    #[error("labels must be non-empty")]
    EmptyLabel,
}

/// One edit, with its parameters. Paths are `>`-separated labels below the
/// root; the empty path is the root itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    SiblingShuffle { seed: u64 },
    RewireSwap { a: String, b: String },
    SplitLeaf { path: String, parts: usize },
    ContractNode { path: String },
    Relabel { path: String, label: String },
}

impl Perturbation {
    pub fn apply(&self, t: &Taxonomy) -> Result<Taxonomy, PerturbError> {
        match self {
            Perturbation::SiblingShuffle { seed } => Ok(shuffle_siblings(t, *seed)),
            Perturbation::RewireSwap { a, b } => rewire_swap(t, a, b),
            Perturbation::SplitLeaf { path, parts } => split_leaf(t, path, *parts),
            Perturbation::ContractNode { path } => contract_node(t, path),
            Perturbation::Relabel { path, label } => relabel(t, path, label),
        }
    }
}

fn rebuild(t: &Taxonomy, root: CategoryNode) -> Taxonomy {
    Taxonomy::from_validated(t.survey_id().to_string(), root)
}

fn shuffle_node(node: &mut CategoryNode, rng: &mut ChaCha8Rng) {
    node.children_mut().shuffle(rng);
    for child in node.children_mut() {
        shuffle_node(child, rng);
    }
}

/// Permute every children list with a seeded generator.
pub fn shuffle_siblings(t: &Taxonomy, seed: u64) -> Taxonomy {
    let mut root = t.root().clone();
    shuffle_node(&mut root, &mut ChaCha8Rng::seed_from_u64(seed));
    rebuild(t, root)
}

/// Exchange the positions of two subtrees that are not nested.
pub fn rewire_swap(t: &Taxonomy, path_a: &str, path_b: &str) -> Result<Taxonomy, PerturbError> {
    let a = t.resolve_path(path_a)?;
    let b = t.resolve_path(path_b)?;
    if a == b {
        return Ok(t.clone());
    }
    if a.is_ancestor_of(&b) || b.is_ancestor_of(&a) {
        return Err(PerturbError::AncestorConflict {
            a: path_a.to_string(),
            b: path_b.to_string(),
        });
    }
    let mut root = t.root().clone();
    let sub_a = root.get(&a).cloned().expect("resolved path");
    let sub_b = std::mem::replace(root.get_mut(&b).expect("resolved path"), sub_a);
    *root.get_mut(&a).expect("resolved path") = sub_b;
    Ok(rebuild(t, root))
}

/// Turn a terminal node into `parts` children labeled `"<label> / part i"`,
/// dealing its papers round-robin in normalized-title order.
pub fn split_leaf(t: &Taxonomy, path: &str, parts: usize) -> Result<Taxonomy, PerturbError> {
    if parts < 2 {
        return Err(PerturbError::TooFewParts(parts));
    }
    let at = t.resolve_path(path)?;
    let mut root = t.root().clone();
    let node = root.get_mut(&at).expect("resolved path");
    if !node.is_terminal() {
        return Err(PerturbError::NotTerminal(path.to_string()));
    }
    if node.papers().len() < parts {
        return Err(PerturbError::TooFewPapers {
            path: path.to_string(),
            papers: node.papers().len(),
            parts,
        });
    }
    let mut papers = std::mem::take(node.papers_mut());
    papers.sort_by_cached_key(|p| (normalize_title(p), p.clone()));
    let mut buckets = vec![Vec::new(); parts];
    for (i, paper) in papers.into_iter().enumerate() {
        buckets[i % parts].push(paper);
    }
    let label = node.label().to_string();
    *node.children_mut() = buckets
        .into_iter()
        .enumerate()
        .map(|(i, papers)| CategoryNode::leaf(format!("{label} / part {}", i + 1), papers))
        .collect();
    Ok(rebuild(t, root))
}

/// Remove an internal non-root node, attaching its children to its parent
/// in its place.
pub fn contract_node(t: &Taxonomy, path: &str) -> Result<Taxonomy, PerturbError> {
    let at = t.resolve_path(path)?;
    let Some(parent) = at.parent() else {
        return Err(PerturbError::RootContraction);
    };
    let index = *at.0.last().expect("non-root path");
    let mut root = t.root().clone();
    let siblings = root.get_mut(&parent).expect("resolved path").children_mut();
    if siblings[index].children().is_empty() {
        return Err(PerturbError::Terminal(path.to_string()));
    }
    let removed = siblings.remove(index);
    let grandchildren = removed.children().to_vec();
    siblings.splice(index..index, grandchildren);
    Ok(rebuild(t, root))
}

/// Replace one node's label.
pub fn relabel(t: &Taxonomy, path: &str, label: &str) -> Result<Taxonomy, PerturbError> {
    let label = label.trim();
    if label.is_empty() {
        return Err(PerturbError::EmptyLabel);
    }
    let at: NodePath = t.resolve_path(path)?;
    let mut root = t.root().clone();
    *root.get_mut(&at).expect("resolved path").label_mut() = label.to_string();
    Ok(rebuild(t, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::CategoryHierarchy;

    fn leaf(l: &str, p: &[&str]) -> CategoryNode {
        CategoryNode::leaf(l, p.iter().copied())
    }

    fn example() -> Taxonomy {
        Taxonomy::new(
            "ce1",
            CategoryNode::internal(
                "R",
                vec![
                    CategoryNode::internal("A", vec![leaf("B", &["p1"]), leaf("C", &["p2"])]),
                    CategoryNode::internal("D", vec![leaf("E", &["p3"]), leaf("F", &["p4"])]),
                ],
            ),
        )
        .unwrap()
    }

    fn labels(t: &Taxonomy) -> Vec<String> {
        let mut v: Vec<String> = t.root().preorder().map(|n| n.label().to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn rewire_produces_swapped_tree() {
        let t2 = rewire_swap(&example(), "A>C", "D>E").unwrap();
        let expected = CategoryNode::internal(
            "R",
            vec![
                CategoryNode::internal("A", vec![leaf("B", &["p1"]), leaf("E", &["p3"])]),
                CategoryNode::internal("D", vec![leaf("C", &["p2"]), leaf("F", &["p4"])]),
            ],
        );
        assert_eq!(t2.root(), &expected);
        assert_eq!(labels(&t2), labels(&example()));
        assert_eq!(rewire_swap(&example(), "A", "A").unwrap(), example());
        assert!(matches!(
            rewire_swap(&example(), "A", "A>C"),
            Err(PerturbError::AncestorConflict { .. })
        ));
    }

    #[test]
    fn shuffle_is_reproducible_and_keeps_edges() {
        let t = example();
        let a = shuffle_siblings(&t, 7);
        assert_eq!(a, shuffle_siblings(&t, 7));
        assert_eq!(labels(&a), labels(&t));
        assert_eq!(a.assignment().len(), 4);
        let single = Taxonomy::new("s", leaf("R", &["p"])).unwrap();
        assert_eq!(shuffle_siblings(&single, 3), single);
    }

    #[test]
    fn split_round_robin() {
        let t = Taxonomy::new("s", CategoryNode::internal("R", vec![leaf("A", &["d", "b", "a", "c"])])).unwrap();
        let s = split_leaf(&t, "A", 2).unwrap();
        let a = &s.root().children()[0];
        assert_eq!(a.children().len(), 2);
        assert_eq!(a.children()[0].label(), "A / part 1");
        assert_eq!(a.children()[0].papers(), ["a", "c"]);
        assert_eq!(a.children()[1].papers(), ["b", "d"]);
        let all = split_leaf(&t, "A", 4).unwrap();
        assert!(all.root().children()[0].children().iter().all(|c| c.papers().len() == 1));
        assert!(matches!(split_leaf(&t, "A", 5), Err(PerturbError::TooFewPapers { .. })));
        assert!(matches!(split_leaf(&t, "", 2), Err(PerturbError::NotTerminal(_))));
    }

    #[test]
    fn contract_chain() {
        let t = Taxonomy::new(
            "s",
            CategoryNode::internal("R", vec![CategoryNode::internal("A", vec![leaf("B", &["p"])])]),
        )
        .unwrap();
        let c = contract_node(&t, "A").unwrap();
        assert_eq!(c.root().depth(), 2);
        assert_eq!(CategoryHierarchy::new(c.root().clone()).node_count(), 2);
        assert_eq!(c.ancestor_paths("p"), vec![vec!["R".to_string(), "B".to_string()]]);
        assert_eq!(contract_node(&t, ""), Err(PerturbError::RootContraction));
        assert!(matches!(contract_node(&t, "A>B"), Err(PerturbError::Terminal(_))));
        assert!(matches!(contract_node(&t, "Z"), Err(PerturbError::Path(_))));
    }

    #[test]
    fn contract_keeps_sibling_position() {
        let c = contract_node(&example(), "A").unwrap();
        let order: Vec<&str> = c.root().children().iter().map(CategoryNode::label).collect();
        assert_eq!(order, ["B", "C", "D"]);
    }

    #[test]
    fn relabel_node() {
        let r = relabel(&example(), "D>F", "G").unwrap();
        assert_eq!(r.root().children()[1].children()[1].label(), "G");
        assert_eq!(relabel(&example(), "A", "  "), Err(PerturbError::EmptyLabel));
    }

    #[test]
    fn serde_shape() {
        let p: Perturbation = serde_json::from_str(r#"{"kind":"split-leaf","path":"A","parts":2}"#).unwrap();
        assert_eq!(p, Perturbation::SplitLeaf { path: "A".into(), parts: 2 });
    }
}
