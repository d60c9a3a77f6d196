//! Reading taxonomies from nested JSON or from a directory tree, with strict
//! validation or lenient repair.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::{CategoryNode, Taxonomy};
use crate::alignment::normalize_title;

const KNOWN_FIELDS: [&str; 3] = ["name", "subtopics", "papers"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

impl std::str::FromStr for ParseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(ParseMode::Strict),
            "lenient" => Ok(ParseMode::Lenient),
            other => Err(format!("unknown parse mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    /// Top level is an array of nodes rather than one root object.
    MultipleRoots,
    /// A node carries both `subtopics` and `papers`.
    DualRole,
    /// A paper title (normalized) occurs more than once.
    DuplicatePaper,
    EmptyLabel,
    EmptyPaperTitle,
    /// Wrong JSON type or missing `name`.
    Schema,
    /// Field other than `name`/`subtopics`/`papers`; ignored.
    UnknownField,
}

impl DiagnosticKind {
    /// Whether this breaks a taxonomy constraint (as opposed to a notice).
    pub fn is_violation(self) -> bool {
        !matches!(self, DiagnosticKind::UnknownField)
    }

    /// Whether lenient parsing can repair it.
    fn is_repairable(self) -> bool {
        matches!(
            self,
            DiagnosticKind::MultipleRoots
                | DiagnosticKind::DualRole
                | DiagnosticKind::DuplicatePaper
                | DiagnosticKind::EmptyPaperTitle
                | DiagnosticKind::UnknownField
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Label path of the offending node, root first.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid taxonomy ({} problem(s)); first: {}", .diagnostics.len(), .diagnostics[0])]
    Invalid { diagnostics: Vec<Diagnostic> },
}

impl TaxonomyError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        TaxonomyError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A parsed taxonomy plus every repair or notice produced while reading it.
#[derive(Debug, Clone)]
pub struct ParsedTaxonomy {
    pub taxonomy: Taxonomy,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
struct RawNode {
    label: String,
    subtopics: Option<Vec<RawNode>>,
    papers: Option<Vec<String>>,
}

impl RawNode {
    fn from_category(node: &CategoryNode) -> Self {
        RawNode {
            label: node.label.clone(),
            subtopics: (!node.children.is_empty())
                .then(|| node.children.iter().map(RawNode::from_category).collect()),
            papers: (!node.papers.is_empty()).then(|| node.papers.clone()),
        }
    }
}

fn join_path(parent: &str, label: &str) -> String {
    if parent.is_empty() {
        label.to_string()
    } else {
        format!("{parent} > {label}")
    }
}

/// Convert a JSON value into a raw node, collecting schema errors and
/// unknown-field notices.
fn raw_from_value(value: &Value, parent: &str, index: usize, diags: &mut Vec<Diagnostic>) -> Option<RawNode> {
    let here_unnamed = join_path(parent, &format!("<node #{index}>"));
    let Some(obj) = value.as_object() else {
        diags.push(Diagnostic {
            kind: DiagnosticKind::Schema,
            path: here_unnamed,
            message: "node is not a JSON object".into(),
        });
        return None;
    };
    let label = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Schema,
                path: here_unnamed,
                message: "\"name\" is not a string".into(),
            });
            return None;
        }
        None => {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Schema,
                path: here_unnamed,
                message: "node has no \"name\"".into(),
            });
            return None;
        }
    };
    let here = join_path(parent, &label);
    report_unknown_fields(obj, &here, diags);

    let subtopics = match obj.get("subtopics") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| raw_from_value(v, &here, i, diags))
                .collect(),
        ),
        Some(_) => {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Schema,
                path: here.clone(),
                message: "\"subtopics\" is not an array".into(),
            });
            None
        }
    };
    let papers = match obj.get("papers") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            let mut titles = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::String(s) => titles.push(s.clone()),
                    _ => diags.push(Diagnostic {
                        kind: DiagnosticKind::Schema,
                        path: here.clone(),
                        message: "paper entry is not a string".into(),
                    }),
                }
            }
            Some(titles)
        }
        Some(_) => {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Schema,
                path: here.clone(),
                message: "\"papers\" is not an array".into(),
            });
            None
        }
    };
    Some(RawNode {
        label,
        subtopics,
        papers,
    })
}

fn report_unknown_fields(obj: &Map<String, Value>, here: &str, diags: &mut Vec<Diagnostic>) {
    for key in obj.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            log::info!("ignoring unknown field '{key}' at {here}");
            diags.push(Diagnostic {
                kind: DiagnosticKind::UnknownField,
                path: here.to_string(),
                message: format!("unknown field \"{key}\" ignored"),
            });
        }
    }
}

/// Constraint violations in a raw tree (schema problems excluded).
fn check_raw(root: &RawNode, forbid_duplicates: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen: HashMap<String, String> = HashMap::new();
    check_node(root, "", forbid_duplicates, &mut seen, &mut diags);
    diags
}

fn check_node(
    node: &RawNode,
    parent: &str,
    forbid_duplicates: bool,
    seen: &mut HashMap<String, String>,
    diags: &mut Vec<Diagnostic>,
) {
    let here = join_path(parent, &node.label);
    if node.label.trim().is_empty() {
        diags.push(Diagnostic {
            kind: DiagnosticKind::EmptyLabel,
            path: here.clone(),
            message: "category label is empty".into(),
        });
    }
    let has_children = node.subtopics.as_ref().is_some_and(|c| !c.is_empty());
    let has_papers = node.papers.as_ref().is_some_and(|p| !p.is_empty());
    if has_children && has_papers {
        diags.push(Diagnostic {
            kind: DiagnosticKind::DualRole,
            path: here.clone(),
            message: "node has both \"subtopics\" and \"papers\"".into(),
        });
    }
    for paper in node.papers.iter().flatten() {
        let id = normalize_title(paper);
        if id.is_empty() {
            diags.push(Diagnostic {
                kind: DiagnosticKind::EmptyPaperTitle,
                path: here.clone(),
                message: format!("paper title {paper:?} is empty after normalization"),
            });
            continue;
        }
        match seen.get(id.as_str()) {
            Some(first) if forbid_duplicates => diags.push(Diagnostic {
                kind: DiagnosticKind::DuplicatePaper,
                path: here.clone(),
                message: format!("paper {paper:?} already appears at {first}"),
            }),
            Some(_) => {}
            None => {
                seen.insert(id.as_str().to_string(), here.clone());
            }
        }
    }
    for child in node.subtopics.iter().flatten() {
        check_node(child, &here, forbid_duplicates, seen, diags);
    }
}

pub(crate) fn check_tree(root: &CategoryNode, forbid_duplicates: bool) -> Vec<Diagnostic> {
    check_raw(&RawNode::from_category(root), forbid_duplicates)
}

/// Apply lenient repairs: dual-role nodes get a `(misc)` child, later
/// duplicates and empty titles are dropped.
fn repair(node: RawNode, seen: &mut std::collections::HashSet<String>) -> CategoryNode {
    let RawNode {
        label,
        subtopics,
        papers,
    } = node;
    let mut children = subtopics.unwrap_or_default();
    let papers = papers.unwrap_or_default();
    if !children.is_empty() && !papers.is_empty() {
        children.push(RawNode {
            label: format!("{label} (misc)"),
            subtopics: None,
            papers: Some(papers),
        });
        let children = children.into_iter().map(|c| repair(c, seen)).collect();
        return CategoryNode::from_parts(label, children, Vec::new());
    }
    let kept: Vec<String> = papers
        .into_iter()
        .filter(|p| {
            let id = normalize_title(p);
            !id.is_empty() && seen.insert(id.as_str().to_string())
        })
        .collect();
    let children = children.into_iter().map(|c| repair(c, seen)).collect();
    CategoryNode::from_parts(label, children, kept)
}

fn into_category(node: RawNode) -> CategoryNode {
    let children = node
        .subtopics
        .unwrap_or_default()
        .into_iter()
        .map(into_category)
        .collect();
    CategoryNode::from_parts(node.label, children, node.papers.unwrap_or_default())
}

/// Roots plus all diagnostics gathered from a JSON document.
fn raw_roots(value: &Value, survey_id: &str) -> (Vec<RawNode>, bool, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    match value {
        Value::Array(items) => {
            if items.len() != 1 {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::MultipleRoots,
                    path: survey_id.to_string(),
                    message: format!("top level holds {} nodes instead of one root", items.len()),
                });
            }
            let roots = items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| raw_from_value(v, "", i, &mut diags))
                .collect();
            (roots, items.len() != 1, diags)
        }
        other => {
            let roots = raw_from_value(other, "", 0, &mut diags).into_iter().collect();
            (roots, false, diags)
        }
    }
}

fn finish(
    roots: Vec<RawNode>,
    wrapped: bool,
    mut diags: Vec<Diagnostic>,
    survey_id: &str,
    mode: ParseMode,
) -> Result<ParsedTaxonomy, TaxonomyError> {
    let root = if wrapped || roots.len() != 1 {
        RawNode {
            label: survey_id.to_string(),
            subtopics: Some(roots),
            papers: None,
        }
    } else {
        roots.into_iter().next().expect("one root")
    };
    diags.extend(check_raw(&root, true));

    let fatal = |d: &Diagnostic| match mode {
        ParseMode::Strict => d.kind.is_violation(),
        ParseMode::Lenient => !d.kind.is_repairable(),
    };
    let fatal_diags: Vec<Diagnostic> = diags.iter().filter(|d| fatal(d)).cloned().collect();
    if !fatal_diags.is_empty() {
        return Err(TaxonomyError::Invalid {
            diagnostics: fatal_diags,
        });
    }
    let node = match mode {
        ParseMode::Strict => into_category(root),
        ParseMode::Lenient => repair(root, &mut Default::default()),
    };
    for d in &diags {
        log::warn!("{survey_id}: {d}");
    }
    Ok(ParsedTaxonomy {
        taxonomy: Taxonomy::from_validated(survey_id.to_string(), node),
        warnings: diags,
    })
}

/// Parse a taxonomy from the nested `name`/`subtopics`/`papers` JSON shape.
///
/// `survey_id` identifies the survey and labels the synthetic root when a
/// lenient parse has to wrap several top-level nodes.
pub fn parse_taxonomy(json_text: &str, survey_id: &str, mode: ParseMode) -> Result<ParsedTaxonomy, TaxonomyError> {
    let value: Value = serde_json::from_str(json_text)?;
    let (roots, wrapped, diags) = raw_roots(&value, survey_id);
    finish(roots, wrapped, diags, survey_id, mode)
}

/// Every constraint violation and notice in a JSON taxonomy, without repair.
pub fn validate_json(json_text: &str, survey_id: &str) -> Result<Vec<Diagnostic>, TaxonomyError> {
    let value: Value = serde_json::from_str(json_text)?;
    let (roots, wrapped, mut diags) = raw_roots(&value, survey_id);
    let root = if wrapped || roots.len() != 1 {
        RawNode {
            label: survey_id.to_string(),
            subtopics: Some(roots),
            papers: None,
        }
    } else {
        roots.into_iter().next().expect("one root")
    };
    diags.extend(check_raw(&root, true));
    Ok(diags)
}

fn raw_from_dir(dir: &Path) -> Result<RawNode, TaxonomyError> {
    let label = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| TaxonomyError::io(dir, e))?
        .collect::<Result<_, _>>()
        .map_err(|e| TaxonomyError::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());

    let mut children = Vec::new();
    let mut papers = Vec::new();
    for entry in entries {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let path = entry.path();
        if path.is_dir() {
            children.push(raw_from_dir(&path)?);
        } else {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or(name);
            papers.push(stem);
        }
    }
    Ok(RawNode {
        label,
        subtopics: (!children.is_empty()).then_some(children),
        papers: (!papers.is_empty()).then_some(papers),
    })
}

/// Read an expert taxonomy stored as folders (categories) and files (papers).
///
/// The directory's own name becomes the root label; file stems become paper
/// titles. Hidden entries are skipped.
pub fn read_directory(dir: &Path, survey_id: &str, mode: ParseMode) -> Result<ParsedTaxonomy, TaxonomyError> {
    let root = raw_from_dir(dir)?;
    finish(vec![root], false, Vec::new(), survey_id, mode)
}

/// Read a taxonomy from a JSON file or a directory tree. The survey id is the
/// file stem or directory name.
pub fn read_taxonomy_file(path: &Path, mode: ParseMode) -> Result<ParsedTaxonomy, TaxonomyError> {
    let survey_id = survey_id_of(path);
    if path.is_dir() {
        read_directory(path, &survey_id, mode)
    } else {
        let text = fs::read_to_string(path).map_err(|e| TaxonomyError::io(path, e))?;
        parse_taxonomy(&text, &survey_id, mode)
    }
}

pub(crate) fn survey_id_of(path: &Path) -> String {
    if path.is_dir() {
        path.file_name()
    } else {
        path.file_stem()
    }
    .map(|s| s.to_string_lossy().into_owned())
    .unwrap_or_default()
}
