//! Taxonomy trees: category nodes with papers attached under terminal nodes.
//!
//! A [`Taxonomy`] pairs a category hierarchy with a paper-to-category
//! assignment. The hierarchy alone ([`CategoryHierarchy`]) is what the
//! structural metrics consume; the assignment ([`PaperAssignment`]) is what
//! the partition metrics consume.

mod parse;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::alignment::{normalize_title, NormalizedTitle};

pub use parse::{
    parse_taxonomy, read_directory, read_taxonomy_file, validate_json, Diagnostic,
    DiagnosticKind, ParseMode, ParsedTaxonomy, TaxonomyError,
};

/// Separator used when a node is addressed by its label path.
pub const PATH_SEPARATOR: char = '>';

/// A category node. Internal nodes carry children, terminal nodes carry papers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryNode {
    label: String,
    children: Vec<CategoryNode>,
    papers: Vec<String>,
}

impl CategoryNode {
    /// Internal node with the given children.
    pub fn internal(label: impl Into<String>, children: Vec<CategoryNode>) -> Self {
        Self {
            label: label.into(),
            children,
            papers: Vec::new(),
        }
    }

    /// Terminal node holding the given paper titles.
    pub fn leaf<S: Into<String>>(label: impl Into<String>, papers: impl IntoIterator<Item = S>) -> Self {
        Self {
            label: label.into(),
            children: Vec::new(),
            papers: papers.into_iter().map(Into::into).collect(),
        }
    }

    pub(crate) fn from_parts(label: String, children: Vec<CategoryNode>, papers: Vec<String>) -> Self {
        Self {
            label,
            children,
            papers,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[CategoryNode] {
        &self.children
    }

    pub fn papers(&self) -> &[String] {
        &self.papers
    }

    pub fn is_terminal(&self) -> bool {
        self.children.is_empty()
    }

    pub(crate) fn label_mut(&mut self) -> &mut String {
        &mut self.label
    }

    pub(crate) fn children_mut(&mut self) -> &mut Vec<CategoryNode> {
        &mut self.children
    }

    pub(crate) fn papers_mut(&mut self) -> &mut Vec<String> {
        &mut self.papers
    }

    /// Number of category nodes in this subtree, this node included.
    pub fn subtree_size(&self) -> usize {
        1 + self.children.iter().map(CategoryNode::subtree_size).sum::<usize>()
    }

    /// Depth of the subtree in nodes (a lone node has depth 1).
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(CategoryNode::depth).max().unwrap_or(0)
    }

    /// Visit every node in preorder.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    fn strip_papers(&self) -> CategoryNode {
        CategoryNode {
            label: self.label.clone(),
            children: self.children.iter().map(CategoryNode::strip_papers).collect(),
            papers: Vec::new(),
        }
    }

    pub(crate) fn to_json_value(&self) -> Value {
        if self.children.is_empty() {
            json!({ "name": self.label, "papers": self.papers })
        } else {
            let children: Vec<Value> = self.children.iter().map(CategoryNode::to_json_value).collect();
            json!({ "name": self.label, "subtopics": children })
        }
    }

    pub(crate) fn get(&self, path: &NodePath) -> Option<&CategoryNode> {
        let mut node = self;
        for &i in &path.0 {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    pub(crate) fn get_mut(&mut self, path: &NodePath) -> Option<&mut CategoryNode> {
        let mut node = self;
        for &i in &path.0 {
            node = node.children.get_mut(i)?;
        }
        Some(node)
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a CategoryNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a CategoryNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// A validated taxonomy for one survey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    survey_id: String,
    root: CategoryNode,
}

impl Taxonomy {
    /// Build a taxonomy, enforcing every strict-mode invariant.
    pub fn new(survey_id: impl Into<String>, root: CategoryNode) -> Result<Self, TaxonomyError> {
        let survey_id = survey_id.into();
        let diagnostics = parse::check_tree(&root, true);
        if diagnostics.is_empty() {
            Ok(Self { survey_id, root })
        } else {
            Err(TaxonomyError::Invalid { diagnostics })
        }
    }

    /// Build a taxonomy that may store one paper title under several
    /// terminal nodes. All other invariants still apply.
    pub fn with_duplicate_papers(
        survey_id: impl Into<String>,
        root: CategoryNode,
    ) -> Result<Self, TaxonomyError> {
        let survey_id = survey_id.into();
        let diagnostics = parse::check_tree(&root, false);
        if diagnostics.is_empty() {
            Ok(Self { survey_id, root })
        } else {
            Err(TaxonomyError::Invalid { diagnostics })
        }
    }

    pub(crate) fn from_validated(survey_id: String, root: CategoryNode) -> Self {
        Self { survey_id, root }
    }

    pub fn survey_id(&self) -> &str {
        &self.survey_id
    }

    pub fn root(&self) -> &CategoryNode {
        &self.root
    }

    /// Total number of category nodes.
    pub fn category_count(&self) -> usize {
        self.root.subtree_size()
    }

    /// The paper-free category tree.
    pub fn hierarchy(&self) -> CategoryHierarchy {
        CategoryHierarchy {
            root: self.root.strip_papers(),
        }
    }

    /// Map every distinct paper to the terminal node holding it.
    ///
    /// Category ids are preorder indices into this taxonomy. When a title
    /// appears more than once, the first preorder occurrence wins.
    pub fn assignment(&self) -> PaperAssignment {
        let mut entries = BTreeMap::new();
        for (index, node) in self.root.preorder().enumerate() {
            for paper in &node.papers {
                let id = normalize_title(paper);
                entries.entry(id).or_insert(CategoryId::Node(index));
            }
        }
        PaperAssignment { entries }
    }

    /// Distinct normalized paper titles, in preorder of first occurrence.
    pub fn paper_ids(&self) -> Vec<NormalizedTitle> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for node in self.root.preorder() {
            for paper in &node.papers {
                let id = normalize_title(paper);
                if seen.insert(id.clone()) {
                    out.push(id);
                }
            }
        }
        out
    }

    /// Root-to-category label chains for every occurrence of `paper_title`.
    ///
    /// Titles are compared in normalized form. The paper itself is never part
    /// of a chain; the root label always is.
    pub fn ancestor_paths(&self, paper_title: &str) -> Vec<Vec<String>> {
        let target = normalize_title(paper_title);
        let mut out = Vec::new();
        let mut chain = Vec::new();
        collect_paths(&self.root, &target, &mut chain, &mut out);
        out
    }

    /// Resolve a label path (`"A>C"`, relative to the root) to child indices.
    pub fn resolve_path(&self, labels: &str) -> Result<NodePath, PathError> {
        NodePath::resolve(&self.root, labels)
    }

    /// Serialize back to the nested `name`/`subtopics`/`papers` JSON shape.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.root.to_json_value())
            .expect("serializing a JSON value cannot fail");
        text.push('\n');
        text
    }
}

fn collect_paths(
    node: &CategoryNode,
    target: &NormalizedTitle,
    chain: &mut Vec<String>,
    out: &mut Vec<Vec<String>>,
) {
    chain.push(node.label.clone());
    if node.papers.iter().any(|p| normalize_title(p) == *target) {
        out.push(chain.clone());
    }
    for child in &node.children {
        collect_paths(child, target, chain, out);
    }
    chain.pop();
}

/// A category tree with all papers removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryHierarchy {
    root: CategoryNode,
}

impl CategoryHierarchy {
    /// Build a hierarchy from any node tree; papers are dropped.
    pub fn new(root: CategoryNode) -> Self {
        Self {
            root: root.strip_papers(),
        }
    }

    pub fn root(&self) -> &CategoryNode {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.root.subtree_size()
    }

    /// View this hierarchy as a paper-free taxonomy.
    pub fn as_taxonomy(&self, survey_id: impl Into<String>) -> Taxonomy {
        Taxonomy::from_validated(survey_id.into(), self.root.clone())
    }
}

/// Identifier of a paper category, or the unretrieved marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CategoryId {
    /// Preorder index of a terminal node in its source taxonomy.
    Node(usize),
    /// Expert paper the model never retrieved.
    Unretrieved,
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryId::Node(i) => write!(f, "#{i}"),
            CategoryId::Unretrieved => f.write_str("UNRETRIEVED"),
        }
    }
}

/// Paper-to-category mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PaperAssignment {
    entries: BTreeMap<NormalizedTitle, CategoryId>,
}

impl PaperAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (NormalizedTitle, CategoryId)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, paper: NormalizedTitle, category: CategoryId) -> Option<CategoryId> {
        self.entries.insert(paper, category)
    }

    pub fn get(&self, paper: &NormalizedTitle) -> Option<CategoryId> {
        self.entries.get(paper).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NormalizedTitle, CategoryId)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn papers(&self) -> impl Iterator<Item = &NormalizedTitle> {
        self.entries.keys()
    }

    /// Number of distinct category ids in use.
    pub fn category_count(&self) -> usize {
        self.entries.values().collect::<HashSet<_>>().len()
    }
}

/// Child-index path from the root to a node. The empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodePath(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no node at path '{path}': '{missing}' not found")]
pub struct PathError {
    pub path: String,
    pub missing: String,
}

impl NodePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ancestor_of(&self, other: &NodePath) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Resolve `>`-separated child labels below `root`. The first sibling
    /// with a matching (trimmed) label is taken at each level.
    pub fn resolve(root: &CategoryNode, labels: &str) -> Result<NodePath, PathError> {
        let mut node = root;
        let mut indices = Vec::new();
        let trimmed = labels.trim();
        if trimmed.is_empty() {
            return Ok(NodePath::root());
        }
        for segment in trimmed.split(PATH_SEPARATOR).map(str::trim) {
            let Some(i) = node.children.iter().position(|c| c.label.trim() == segment) else {
                return Err(PathError {
                    path: labels.to_string(),
                    missing: segment.to_string(),
                });
            };
            indices.push(i);
            node = &node.children[i];
        }
        Ok(NodePath(indices))
    }

    /// Human-readable label path, root included.
    pub fn describe(&self, root: &CategoryNode) -> String {
        let mut parts = vec![root.label.clone()];
        let mut node = root;
        for &i in &self.0 {
            match node.children.get(i) {
                Some(child) => {
                    parts.push(child.label.clone());
                    node = child;
                }
                None => {
                    parts.push(format!("<missing #{i}>"));
                    break;
                }
            }
        }
        parts.join(" > ")
    }
}

/// Paper-free hierarchy of `t`.
pub fn hierarchy_of(t: &Taxonomy) -> CategoryHierarchy {
    t.hierarchy()
}

/// Paper-to-category assignment of `t`.
pub fn assignment_of(t: &Taxonomy) -> PaperAssignment {
    t.assignment()
}

/// Ancestor label chains of `paper_title` in `t`.
pub fn ancestor_paths(t: &Taxonomy, paper_title: &str) -> Vec<Vec<String>> {
    t.ancestor_paths(paper_title)
}

/// Number of category nodes under `n`, `n` included.
pub fn subtree_size(n: &CategoryNode) -> usize {
    n.subtree_size()
}
