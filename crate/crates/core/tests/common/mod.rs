//! Brute-force reference implementations and random inputs shared by the
//! integration tests. Nothing here calls the algorithms under test.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use taxoeval_core::taxonomy::CategoryNode;

/// Small labeled tree used by the oracles.
#[derive(Debug, Clone)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn from_node(node: &CategoryNode) -> Self {
        Tree {
            label: node.label().to_string(),
            children: node.children().iter().map(Tree::from_node).collect(),
        }
    }

    pub fn to_node(&self) -> CategoryNode {
        if self.children.is_empty() {
            CategoryNode::leaf(self.label.clone(), Vec::<String>::new())
        } else {
            CategoryNode::internal(self.label.clone(), self.children.iter().map(Tree::to_node).collect())
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = vec![self.label.clone()];
        for c in &self.children {
            out.extend(c.labels());
        }
        out
    }
}

/// Minimum over every partial one-to-one pairing of children, where each
/// child is either paired or removed with its whole subtree.
pub fn brute_force_ted(a: &Tree, b: &Tree, sim: &dyn Fn(&str, &str) -> f64) -> f64 {
    fn best(a: &[Tree], b: &[Tree], i: usize, used: &mut Vec<bool>, sim: &dyn Fn(&str, &str) -> f64) -> f64 {
        if i == a.len() {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(t, _)| t.size() as f64)
                .sum();
        }
        let mut result = a[i].size() as f64 + best(a, b, i + 1, used, sim);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let c = brute_force_ted(&a[i], &b[j], sim) + best(a, b, i + 1, used, sim);
                used[j] = false;
                result = result.min(c);
            }
        }
        result
    }
    let rename = 1.0 - sim(&a.label, &b.label);
    rename + best(&a.children, &b.children, 0, &mut vec![false; b.children.len()], sim)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Children matching cost by trying all k! assignments of the padded
/// k x k matrix.
pub fn brute_force_match_cost(pairwise: &[Vec<f64>], delete: &[f64], insert: &[f64]) -> f64 {
    let (m, n) = (delete.len(), insert.len());
    let k = m.max(n);
    let entry = |i: usize, j: usize| match (i < m, j < n) {
        (true, true) => pairwise[i][j],
        (true, false) => delete[i],
        (false, true) => insert[j],
        (false, false) => 0.0,
    };
    permutations(k)
        .into_iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| entry(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Path alignment cost by trying every strictly increasing map from the
/// shorter sequence into the longer one.
pub fn brute_force_path_cost(s: &[String], t: &[String], lambda: f64, sim: &dyn Fn(&str, &str) -> f64) -> f64 {
    let (short, long) = if s.len() <= t.len() { (s, t) } else { (t, s) };
    let gap = lambda * (long.len() - short.len()) as f64;
    combinations(long.len(), short.len())
        .into_iter()
        .map(|idx| {
            idx.iter()
                .enumerate()
                .map(|(i, &j)| 1.0 - sim(&short[i], &long[j]))
                .sum::<f64>()
                + gap
        })
        .fold(f64::INFINITY, f64::min)
}

/// ARI from the four pair counts over all item pairs.
pub fn pair_counting_ari(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len();
    let (mut tp, mut fp, mut fn_, mut tn) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (x[i] == x[j], y[i] == y[j]) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => tn += 1.0,
            }
        }
    }
    let denom = (tp + fn_) * (fn_ + tn) + (tp + fp) * (fp + tn);
    if denom == 0.0 {
        return if fp == 0.0 && fn_ == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (tp * tn - fn_ * fp) / denom
}

/// Symmetric random similarity over a fixed label pool, 1 on the diagonal.
pub struct RandomSim {
    values: HashMap<(String, String), f64>,
}

impl RandomSim {
    pub fn new<R: Rng>(rng: &mut R, labels: &[String]) -> Self {
        let mut values = HashMap::new();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if a != b {
                    let v: f64 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) };
                    values.insert((a.clone(), b.clone()), v);
                    values.insert((b.clone(), a.clone()), v);
                }
            }
        }
        Self { values }
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        if a == b {
            1.0
        } else {
            self.values[&(a.to_string(), b.to_string())]
        }
    }

    pub fn table(&self) -> taxoeval_core::SimilarityTable {
        let mut t = taxoeval_core::SimilarityTable::new(0.0);
        for ((a, b), v) in &self.values {
            t.set(a, b, *v);
        }
        t
    }
}

pub const POOL: &[&str] = &["a", "b", "c", "d", "e", "f", "g", "h"];

pub fn pool() -> Vec<String> {
    POOL.iter().map(|s| s.to_string()).collect()
}

/// Random recursive tree with labels drawn from `labels` (repeats allowed).
pub fn random_tree<R: Rng>(rng: &mut R, nodes: usize, labels: &[String]) -> Tree {
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for i in 1..nodes {
        kids[rng.random_range(0..i)].push(i);
    }
    let names: Vec<String> = (0..nodes).map(|_| labels[rng.random_range(0..labels.len())].clone()).collect();
    fn build(i: usize, kids: &[Vec<usize>], names: &[String]) -> Tree {
        Tree {
            label: names[i].clone(),
            children: kids[i].iter().map(|&c| build(c, kids, names)).collect(),
        }
    }
    build(0, &kids, &names)
}

/// Random tree whose labels are all distinct.
pub fn random_distinct_tree<R: Rng>(rng: &mut R, nodes: usize) -> Tree {
    let words = ["graph", "agent", "vision", "memory", "retrieval", "planning", "language", "robust"];
    let labels: Vec<String> = (0..nodes)
        .map(|i| format!("topic{i} {}", words[rng.random_range(0..words.len())]))
        .collect();
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for i in 1..nodes {
        kids[rng.random_range(0..i)].push(i);
    }
    fn build(i: usize, kids: &[Vec<usize>], names: &[String]) -> Tree {
        Tree {
            label: names[i].clone(),
            children: kids[i].iter().map(|&c| build(c, kids, names)).collect(),
        }
    }
    build(0, &kids, &labels)
}

/// Same tree with every children list shuffled.
pub fn shuffle_tree<R: Rng>(rng: &mut R, t: &Tree) -> Tree {
    use rand::seq::SliceRandom;
    let mut children: Vec<Tree> = t.children.iter().map(|c| shuffle_tree(rng, c)).collect();
    children.shuffle(rng);
    Tree {
        label: t.label.clone(),
        children,
    }
}

/// Random labeling of `n` items into at most `k` clusters.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// `>`-separated label path of every node below the root, with its parent path.
pub fn node_paths(t: &Tree) -> Vec<(String, Option<String>)> {
    fn go(t: &Tree, prefix: Option<&str>, out: &mut Vec<(String, Option<String>)>) {
        for c in &t.children {
            let p = match prefix {
                Some(pre) => format!("{pre}>{}", c.label),
                None => c.label.clone(),
            };
            out.push((p.clone(), prefix.map(str::to_string)));
            go(c, Some(&p), out);
        }
    }
    let mut out = Vec::new();
    go(t, None, &mut out);
    out
}
