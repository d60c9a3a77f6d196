//! Unordered semantic tree edit distance between category hierarchies.

use std::collections::HashMap;

use serde::Serialize;

use super::assignment::match_children;
use crate::embedding::{EmbeddingError, Similarity};
use crate::taxonomy::{CategoryHierarchy, CategoryNode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditDistanceResult {
    pub us_ted: f64,
    /// `us_ted / (expert nodes + model nodes)`, in `[0, 1]`.
    pub us_nted: f64,
    /// (expert nodes, model nodes)
    pub node_counts: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<EditWitness>,
}

/// One optimal edit script, as label paths.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EditWitness {
    /// (expert path, model path, renaming cost)
    pub matched: Vec<(String, String, f64)>,
    /// Roots of expert subtrees deleted whole.
    pub deleted: Vec<String>,
    /// Roots of model subtrees inserted whole.
    pub inserted: Vec<String>,
}

type ChildrenInputs = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

struct FlatNode {
    label: usize,
    children: Vec<usize>,
    size: usize,
    path: String,
}

/// Arena view of a hierarchy with interned labels.
struct FlatTree {
    nodes: Vec<FlatNode>,
    labels: Vec<String>,
}

impl FlatTree {
    fn new(root: &CategoryNode) -> Self {
        let mut tree = FlatTree {
            nodes: Vec::new(),
            labels: Vec::new(),
        };
        let mut interned = HashMap::new();
        tree.push(root, String::new(), &mut interned);
        tree
    }

    fn push(&mut self, node: &CategoryNode, parent_path: String, interned: &mut HashMap<String, usize>) -> usize {
        let label = *interned.entry(node.label().to_string()).or_insert_with(|| {
            self.labels.push(node.label().to_string());
            self.labels.len() - 1
        });
        let path = if parent_path.is_empty() {
            node.label().to_string()
        } else {
            format!("{parent_path} > {}", node.label())
        };
        let id = self.nodes.len();
        self.nodes.push(FlatNode {
            label,
            children: Vec::new(),
            size: 0,
            path: path.clone(),
        });
        let children: Vec<usize> = node
            .children()
            .iter()
            .map(|c| self.push(c, path.clone(), interned))
            .collect();
        let size = 1 + children.iter().map(|&c| self.nodes[c].size).sum::<usize>();
        self.nodes[id].children = children;
        self.nodes[id].size = size;
        id
    }
}

/// Memoized evaluation of the recursion `D(u, v)` for one tree pair.
struct Solver<'a> {
    a: &'a FlatTree,
    b: &'a FlatTree,
    provider: &'a dyn Similarity,
    rename: Vec<Option<f64>>,
    memo: Vec<Option<f64>>,
}

impl<'a> Solver<'a> {
    fn new(a: &'a FlatTree, b: &'a FlatTree, provider: &'a dyn Similarity) -> Self {
        Self {
            a,
            b,
            provider,
            rename: vec![None; a.labels.len() * b.labels.len()],
            memo: vec![None; a.nodes.len() * b.nodes.len()],
        }
    }

    fn rename_cost(&mut self, u: usize, v: usize) -> Result<f64, EmbeddingError> {
        let (la, lb) = (self.a.nodes[u].label, self.b.nodes[v].label);
        let key = la * self.b.labels.len() + lb;
        if let Some(c) = self.rename[key] {
            return Ok(c);
        }
        let c = 1.0 - self.provider.similarity(&self.a.labels[la], &self.b.labels[lb])?;
        self.rename[key] = Some(c);
        Ok(c)
    }

    fn children_inputs(&mut self, u: usize, v: usize) -> Result<ChildrenInputs, EmbeddingError> {
        let (cu, cv) = (self.a.nodes[u].children.clone(), self.b.nodes[v].children.clone());
        let mut pairwise = Vec::with_capacity(cu.len());
        for &x in &cu {
            let mut row = Vec::with_capacity(cv.len());
            for &y in &cv {
                row.push(self.distance(x, y)?);
            }
            pairwise.push(row);
        }
        let delete = cu.iter().map(|&x| self.a.nodes[x].size as f64).collect();
        let insert = cv.iter().map(|&y| self.b.nodes[y].size as f64).collect();
        Ok((pairwise, delete, insert))
    }

    fn distance(&mut self, u: usize, v: usize) -> Result<f64, EmbeddingError> {
        let key = u * self.b.nodes.len() + v;
        if let Some(d) = self.memo[key] {
            return Ok(d);
        }
        let rename = self.rename_cost(u, v)?;
        let children = if self.a.nodes[u].children.is_empty() && self.b.nodes[v].children.is_empty() {
            0.0
        } else {
            let (pairwise, delete, insert) = self.children_inputs(u, v)?;
            match_children(&pairwise, &delete, &insert).cost
        };
        let d = rename + children;
        self.memo[key] = Some(d);
        Ok(d)
    }

    fn witness(&mut self, u: usize, v: usize, out: &mut EditWitness) -> Result<(), EmbeddingError> {
        let rename = self.rename_cost(u, v)?;
        out.matched
            .push((self.a.nodes[u].path.clone(), self.b.nodes[v].path.clone(), rename));
        let (pairwise, delete, insert) = self.children_inputs(u, v)?;
        let m = match_children(&pairwise, &delete, &insert);
        let (cu, cv) = (self.a.nodes[u].children.clone(), self.b.nodes[v].children.clone());
        for &i in &m.deleted {
            out.deleted.push(self.a.nodes[cu[i]].path.clone());
        }
        for &j in &m.inserted {
            out.inserted.push(self.b.nodes[cv[j]].path.clone());
        }
        for &(i, j) in &m.pairs {
            self.witness(cu[i], cv[j], out)?;
        }
        Ok(())
    }
}

fn run(
    expert: &CategoryHierarchy,
    model: &CategoryHierarchy,
    provider: &dyn Similarity,
    with_witness: bool,
) -> Result<EditDistanceResult, EmbeddingError> {
    let a = FlatTree::new(expert.root());
    let b = FlatTree::new(model.root());
    let texts: Vec<&str> = a.labels.iter().chain(&b.labels).map(String::as_str).collect();
    provider.prepare(&texts)?;
    let mut solver = Solver::new(&a, &b, provider);
    let distance = solver.distance(0, 0)?;
    let witness = if with_witness {
        let mut w = EditWitness::default();
        solver.witness(0, 0, &mut w)?;
        Some(w)
    } else {
        None
    };
    let counts = (a.nodes.len(), b.nodes.len());
    Ok(EditDistanceResult {
        us_ted: distance,
        us_nted: us_nted(distance, counts.0, counts.1),
        node_counts: counts,
        witness,
    })
}

/// US-TED between two hierarchies: root renaming cost plus the optimal
/// unordered children matching, applied recursively.
pub fn us_ted(
    expert: &CategoryHierarchy,
    model: &CategoryHierarchy,
    provider: &dyn Similarity,
) -> Result<EditDistanceResult, EmbeddingError> {
    run(expert, model, provider, false)
}

/// [`us_ted`] plus one optimal edit script.
pub fn us_ted_with_witness(
    expert: &CategoryHierarchy,
    model: &CategoryHierarchy,
    provider: &dyn Similarity,
) -> Result<EditDistanceResult, EmbeddingError> {
    run(expert, model, provider, true)
}

/// Normalize a distance by the combined node count.
pub fn us_nted(us_ted: f64, expert_nodes: usize, model_nodes: usize) -> f64 {
    let total = expert_nodes + model_nodes;
    assert!(total > 0, "hierarchies must be non-empty");
    us_ted / total as f64
}
