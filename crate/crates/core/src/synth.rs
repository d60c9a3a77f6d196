//! Random hierarchies and taxonomies for tests and benchmarks.

use rand::Rng;

use crate::taxonomy::{CategoryNode, Taxonomy};

/// Topic words used to build labels with partial token overlap.
pub const VOCABULARY: &[&str] = &[
    "learning", "graph", "language", "model", "retrieval", "agent", "vision", "reasoning", "planning", "memory",
    "survey", "neural", "network", "transformer", "attention", "benchmark", "robust", "efficient", "multimodal",
    "generation", "alignment", "evaluation", "tool", "search",
];

/// A label of one to three vocabulary words.
pub fn random_label<R: Rng + ?Sized>(rng: &mut R) -> String {
    let words = rng.random_range(1..=3);
    (0..words)
        .map(|_| VOCABULARY[rng.random_range(0..VOCABULARY.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parent index for every non-root node of a random recursive tree.
fn random_parents<R: Rng + ?Sized>(rng: &mut R, nodes: usize) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); nodes];
    for i in 1..nodes {
        let parent = rng.random_range(0..i);
        children[parent].push(i);
    }
    children
}

fn assemble(i: usize, children: &[Vec<usize>], labels: &[String], papers: &mut Vec<Vec<String>>) -> CategoryNode {
    if children[i].is_empty() {
        CategoryNode::leaf(labels[i].clone(), std::mem::take(&mut papers[i]))
    } else {
        let kids = children[i].iter().map(|&c| assemble(c, children, labels, papers)).collect();
        CategoryNode::internal(labels[i].clone(), kids)
    }
}

/// Random paper-free tree with `nodes >= 1` nodes and vocabulary labels.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, nodes: usize) -> CategoryNode {
    let labels: Vec<String> = (0..nodes).map(|_| random_label(rng)).collect();
    tree_with_labels(rng, &labels)
}

/// Random tree shape carrying `labels` in preorder-independent positions.
pub fn tree_with_labels<R: Rng + ?Sized>(rng: &mut R, labels: &[String]) -> CategoryNode {
    assert!(!labels.is_empty(), "a tree needs at least one node");
    let children = random_parents(rng, labels.len());
    let mut papers = vec![Vec::new(); labels.len()];
    assemble(0, &children, labels, &mut papers)
}

/// Random taxonomy with `nodes` categories and `papers` distinct papers
/// spread uniformly over its terminal nodes.
pub fn random_taxonomy<R: Rng + ?Sized>(rng: &mut R, survey_id: &str, nodes: usize, papers: usize) -> Taxonomy {
    let labels: Vec<String> = (0..nodes).map(|_| random_label(rng)).collect();
    let children = random_parents(rng, nodes);
    let leaves: Vec<usize> = (0..nodes).filter(|&i| children[i].is_empty()).collect();
    let mut slots = vec![Vec::new(); nodes];
    for p in 0..papers {
        let leaf = leaves[rng.random_range(0..leaves.len())];
        slots[leaf].push(format!("paper {p}"));
    }
    let root = assemble(0, &children, &labels, &mut slots);
    Taxonomy::new(survey_id, root).expect("generated taxonomy is valid")
}
