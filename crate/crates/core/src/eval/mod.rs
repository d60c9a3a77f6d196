//! Batch evaluation of expert/model taxonomy pairs.

mod report;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use report::{
    macro_average, metric_names, MacroAverages, MacroEntry, MetricReport, MetricValues, SurveyCounts,
    SurveyReport, SurveyStatus, AUXILIARY_METRICS, BOTTOM_UP_METRICS, DEEP_RESEARCH_METRICS, SCHEMA_VERSION,
};

use crate::alignment::{align_with_threshold, retrieval_scores, DEFAULT_ALIGNMENT_THRESHOLD};
use crate::embedding::{
    EmbeddingError, EncoderSimilarity, HashEncoder, RemoteConfig, RemoteEncoder, Similarity, SimilarityCache,
};
use crate::hierarchy::{sem_path, us_ted, us_ted_with_witness, DEFAULT_LAMBDA};
use crate::partition::{extend_e2e, leaf_scores, restrict_to_intersection, PartitionError};
use crate::soft_cardinality::{collect_labels, nsr_nsp_f1, SoftCardinalityError};
use crate::taxonomy::{read_taxonomy_file, ParseMode, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The model organizes the expert paper set.
    BottomUp,
    /// The model retrieves and organizes its own papers.
    DeepResearch,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bottom-up" => Ok(Mode::BottomUp),
            "deep-research" => Ok(Mode::DeepResearch),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::BottomUp => "bottom-up",
            Mode::DeepResearch => "deep-research",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EncoderSpec {
    /// Offline hash encoder.
    Test,
    Remote { model: String, endpoint: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationConfig {
    pub mode: Mode,
    pub expert_path: PathBuf,
    pub model_path: PathBuf,
    pub encoder: EncoderSpec,
    pub lambda: f64,
    pub alignment_threshold: f64,
    pub parse_mode: ParseMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
    /// Include one optimal edit script per survey.
    pub witness: bool,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl EvaluationConfig {
    pub fn new(mode: Mode, expert_path: impl Into<PathBuf>, model_path: impl Into<PathBuf>) -> Self {
        Self {
            mode,
            expert_path: expert_path.into(),
            model_path: model_path.into(),
            encoder: EncoderSpec::Test,
            lambda: DEFAULT_LAMBDA,
            alignment_threshold: DEFAULT_ALIGNMENT_THRESHOLD,
            parse_mode: ParseMode::Strict,
            cache_path: None,
            witness: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.alignment_threshold > 0.0 && self.alignment_threshold <= 1.0) {
            return Err(EvalError::Config(format!(
                "alignment threshold must be in (0, 1], got {}",
                self.alignment_threshold
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(EvalError::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if self.workers == Some(0) {
            return Err(EvalError::Config("workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no taxonomies found under {0}")]
    NoSurveys(PathBuf),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Failure while evaluating one survey.
#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("{0}")]
    Load(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    SoftCardinality(SoftCardinalityError),
}

impl From<SoftCardinalityError> for SurveyError {
    fn from(e: SoftCardinalityError) -> Self {
        match e {
            SoftCardinalityError::Embedding(e) => SurveyError::Embedding(e),
            other => SurveyError::SoftCardinality(other),
        }
    }
}

impl SurveyError {
    fn is_encoder_failure(&self) -> bool {
        matches!(self, SurveyError::Embedding(e) if e.is_backend_failure())
    }
}

/// One survey's input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyInput {
    pub survey_id: String,
    pub expert: PathBuf,
    pub model: Option<PathBuf>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Survey entries of a collection directory: `*.json` files and
/// subdirectories, keyed by file stem or directory name.
fn list_entries(dir: &Path) -> Result<Vec<(String, PathBuf)>, EvalError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_error(dir))? {
        let path = entry.map_err(io_error(dir))?.path();
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if name.starts_with('.') {
            continue;
        }
        if path.is_dir() {
            out.push((name, path));
        } else if path.extension().is_some_and(|e| e == "json") {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((stem, path));
        }
    }
    out.sort();
    Ok(out)
}

fn find_entry(dir: &Path, survey_id: &str) -> Option<PathBuf> {
    let file = dir.join(format!("{survey_id}.json"));
    if file.is_file() {
        return Some(file);
    }
    let sub = dir.join(survey_id);
    sub.is_dir().then_some(sub)
}

/// Pair expert and model taxonomies by survey id. A file path names a single
/// survey; a directory holds one survey per `*.json` file or subdirectory.
/// Returns the pairs and notes about unpaired model entries.
pub fn discover(expert_root: &Path, model_root: &Path) -> Result<(Vec<SurveyInput>, Vec<String>), EvalError> {
    if !expert_root.exists() {
        return Err(EvalError::Io {
            path: expert_root.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        });
    }
    if !model_root.exists() {
        return Err(EvalError::Io {
            path: model_root.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        });
    }
    if expert_root.is_file() {
        let survey_id = expert_root
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let model = if model_root.is_file() {
            Some(model_root.to_path_buf())
        } else {
            find_entry(model_root, &survey_id)
        };
        let input = SurveyInput {
            survey_id,
            expert: expert_root.to_path_buf(),
            model,
        };
        return Ok((vec![input], Vec::new()));
    }
    if model_root.is_file() {
        return Err(EvalError::Config(
            "expert path is a directory but model path is a single file".into(),
        ));
    }
    let experts = list_entries(expert_root)?;
    if experts.is_empty() {
        return Err(EvalError::NoSurveys(expert_root.to_path_buf()));
    }
    let known: BTreeSet<&str> = experts.iter().map(|(id, _)| id.as_str()).collect();
    let notes = list_entries(model_root)?
        .into_iter()
        .filter(|(id, _)| !known.contains(id.as_str()))
        .map(|(id, _)| format!("model taxonomy '{id}' has no expert counterpart and was ignored"))
        .collect();
    let inputs = experts
        .into_iter()
        .map(|(survey_id, expert)| {
            let model = find_entry(model_root, &survey_id);
            SurveyInput {
                survey_id,
                expert,
                model,
            }
        })
        .collect();
    Ok((inputs, notes))
}

/// Similarity provider for `config.encoder`, with the persistent cache when
/// one is configured.
pub fn build_provider(config: &EvaluationConfig) -> Result<Box<dyn Similarity>, EvalError> {
    let cache = config
        .cache_path
        .as_ref()
        .map(|p| SimilarityCache::open(p).map_err(io_error(p)))
        .transpose()?;
    Ok(match &config.encoder {
        EncoderSpec::Test => {
            let s = EncoderSimilarity::new(HashEncoder::default());
            Box::new(match cache {
                Some(c) => s.with_cache(c),
                None => s,
            })
        }
        EncoderSpec::Remote { model, endpoint } => {
            let s = EncoderSimilarity::new(RemoteEncoder::new(RemoteConfig::new(endpoint.clone(), model.clone())));
            Box::new(match cache {
                Some(c) => s.with_cache(c),
                None => s,
            })
        }
    })
}

/// All metrics for one expert/model pair.
pub fn evaluate_pair(
    config: &EvaluationConfig,
    expert: &Taxonomy,
    model: &Taxonomy,
    provider: &dyn Similarity,
) -> Result<SurveyReport, SurveyError> {
    let mode = config.mode;
    let mut report = SurveyReport::empty(mode);
    let expert_papers = expert.paper_ids();
    let model_papers = model.paper_ids();
    let alignment = align_with_threshold(&expert_papers, &model_papers, provider, config.alignment_threshold)?;

    let u_star = expert.assignment();
    let u_hat = model.assignment();
    let universe: BTreeSet<_> = expert_papers.iter().cloned().collect();
    let e2e = extend_e2e(&u_hat, &alignment, &universe);
    let full = leaf_scores(&u_star, &e2e, &universe)?;
    let m = &mut report.metrics;
    m.set("ari", full.ari);
    m.set("hom", full.homogeneity);
    m.set("comp", full.completeness);
    m.set("v", full.v_measure);

    match mode {
        Mode::DeepResearch => {
            let r = retrieval_scores(&alignment, expert_papers.len(), model_papers.len());
            m.set("recall", r.recall);
            m.set("precision", r.precision);
            m.set("f1", r.f1);
            let view = restrict_to_intersection(&u_star, &u_hat, &alignment);
            let cap = leaf_scores(&view.expert, &view.model, &view.universe)?;
            m.set("ari_cap", cap.ari);
            m.set("v_cap", cap.v_measure);
            if view.is_empty() {
                report
                    .warnings
                    .push("no aligned papers: intersection metrics and sem_path are null".into());
            }
        }
        Mode::BottomUp => {
            let (e, mo) = (alignment.unmatched_expert.len(), alignment.unmatched_model.len());
            if e > 0 || mo > 0 {
                report.warnings.push(format!(
                    "bottom-up paper sets differ: {e} expert and {mo} model papers have no counterpart"
                ));
            }
        }
    }

    let (h_expert, h_model) = (expert.hierarchy(), model.hierarchy());
    let ted = if config.witness {
        us_ted_with_witness(&h_expert, &h_model, provider)?
    } else {
        us_ted(&h_expert, &h_model, provider)?
    };
    let m = &mut report.metrics;
    m.set("us_ted", Some(ted.us_ted));
    m.set("us_nted_pct", Some(ted.us_nted * 100.0));
    let paths = sem_path(expert, model, &alignment, config.lambda, provider)?;
    m.set("sem_path", paths.sem_path);

    let soft = nsr_nsp_f1(&collect_labels(&h_expert), &collect_labels(&h_model), provider)?;
    let aux = &mut report.auxiliary_diagnostics;
    aux.set("nsr", Some(soft.nsr));
    aux.set("nsp", Some(soft.nsp));
    aux.set("soft_f1", Some(soft.soft_f1));

    report.counts = SurveyCounts {
        expert_papers: expert_papers.len(),
        model_papers: model_papers.len(),
        aligned: alignment.len(),
        expert_nodes: ted.node_counts.0,
        model_nodes: ted.node_counts.1,
    };
    report.witness = ted.witness;
    Ok(report)
}

fn run_survey(
    config: &EvaluationConfig,
    input: &SurveyInput,
    provider: &dyn Similarity,
) -> Result<SurveyReport, SurveyError> {
    let expert = read_taxonomy_file(&input.expert, config.parse_mode)
        .map_err(|e| SurveyError::Load(format!("expert taxonomy {}: {e}", input.expert.display())))?;
    let model_path = input
        .model
        .as_ref()
        .ok_or_else(|| SurveyError::Load(format!("no model taxonomy for survey '{}'", input.survey_id)))?;
    let model = read_taxonomy_file(model_path, config.parse_mode)
        .map_err(|e| SurveyError::Load(format!("model taxonomy {}: {e}", model_path.display())))?;
    let mut report = evaluate_pair(config, &expert.taxonomy, &model.taxonomy, provider)?;
    let parse_warnings = expert
        .warnings
        .iter()
        .map(|d| format!("expert: {d}"))
        .chain(model.warnings.iter().map(|d| format!("model: {d}")));
    report.warnings.splice(0..0, parse_warnings);
    Ok(report)
}

/// Evaluate every survey with the provider described by `config`.
pub fn evaluate(config: &EvaluationConfig) -> Result<MetricReport, EvalError> {
    config.validate()?;
    let provider = build_provider(config)?;
    evaluate_with(config, provider.as_ref())
}

/// Evaluate every survey with an explicit similarity provider.
///
/// Per-survey failures are recorded in the report. An encoder failure stops
/// the remaining surveys and marks the report incomplete.
pub fn evaluate_with(config: &EvaluationConfig, provider: &dyn Similarity) -> Result<MetricReport, EvalError> {
    config.validate()?;
    let (inputs, discovery_notes) = discover(&config.expert_path, &config.model_path)?;
    let stopped = AtomicBool::new(false);
    let run_all = || -> Vec<(String, SurveyReport)> {
        inputs
            .par_iter()
            .map(|input| {
                if stopped.load(Ordering::SeqCst) {
                    let r = SurveyReport::failed(
                        config.mode,
                        SurveyStatus::Skipped,
                        "not evaluated: the encoder failed on another survey".into(),
                    );
                    return (input.survey_id.clone(), r);
                }
                let r = match run_survey(config, input, provider) {
                    Ok(r) => r,
                    Err(e) => {
                        if e.is_encoder_failure() {
                            stopped.store(true, Ordering::SeqCst);
                        }
                        log::error!("{}: {e}", input.survey_id);
                        SurveyReport::failed(config.mode, SurveyStatus::Error, e.to_string())
                    }
                };
                (input.survey_id.clone(), r)
            })
            .collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| EvalError::Config(e.to_string()))?
            .install(run_all),
        None => run_all(),
    };
    let per_survey = results.into_iter().collect();
    let complete = !stopped.load(Ordering::SeqCst);
    let mut notes = report::default_notes(config.mode);
    notes.extend(discovery_notes);
    if !complete {
        notes.push("incomplete: an encoder failure stopped the run".into());
    }
    Ok(MetricReport {
        schema_version: SCHEMA_VERSION,
        mode: config.mode,
        config: config.clone(),
        encoder: provider.identity(),
        complete,
        notes,
        macro_avg: macro_average(config.mode, &per_survey),
        per_survey,
    })
}

/// Process exit code for a finished run: 0 when every survey succeeded, 2
/// when some failed, 1 when the run is incomplete.
pub fn exit_code(report: &MetricReport) -> i32 {
    if !report.complete {
        1
    } else if report.macro_avg.surveys_failed > 0 {
        2
    } else {
        0
    }
}
