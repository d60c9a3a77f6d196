//! Report types, macro averaging, and CSV export.

use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::{EvaluationConfig, Mode};
use crate::hierarchy::EditWitness;

pub const SCHEMA_VERSION: u32 = 1;

/// Metric names reported per mode, in column order.
pub const BOTTOM_UP_METRICS: &[&str] = &["ari", "hom", "comp", "v", "us_ted", "us_nted_pct", "sem_path"];
pub const DEEP_RESEARCH_METRICS: &[&str] = &[
    "recall",
    "precision",
    "f1",
    "ari",
    "ari_cap",
    "hom",
    "comp",
    "v",
    "v_cap",
    "us_ted",
    "us_nted_pct",
    "sem_path",
];
pub const AUXILIARY_METRICS: &[&str] = &["nsr", "nsp", "soft_f1"];

/// Metrics stored as fractions; the CSV adds a percentage column for each.
const FRACTION_METRICS: &[&str] = &[
    "recall", "precision", "f1", "ari", "ari_cap", "hom", "comp", "v", "v_cap", "sem_path",
];

pub fn metric_names(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::BottomUp => BOTTOM_UP_METRICS,
        Mode::DeepResearch => DEEP_RESEARCH_METRICS,
    }
}

/// Named metric values in a fixed order. Undefined values stay `None` and
/// serialize as JSON null.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricValues(Vec<(&'static str, Option<f64>)>);

impl MetricValues {
    pub fn new(names: &[&'static str]) -> Self {
        Self(names.iter().map(|&n| (n, None)).collect())
    }

    pub fn set(&mut self, name: &str, value: Option<f64>) {
        let slot = self
            .0
            .iter_mut()
            .find(|(n, _)| *n == name)
            .unwrap_or_else(|| panic!("unknown metric {name}"));
        slot.1 = value;
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| *n == name).and_then(|(_, v)| *v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|(n, _)| *n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> + '_ {
        self.0.iter().copied()
    }
}

impl Serialize for MetricValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, value) in &self.0 {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurveyStatus {
    Ok,
    Error,
    /// Not evaluated because an encoder failure stopped the run.
    Skipped,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SurveyCounts {
    pub expert_papers: usize,
    pub model_papers: usize,
    pub aligned: usize,
    pub expert_nodes: usize,
    pub model_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyReport {
    pub status: SurveyStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: MetricValues,
    pub auxiliary_diagnostics: MetricValues,
    pub counts: SurveyCounts,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<EditWitness>,
}

impl SurveyReport {
    pub fn empty(mode: Mode) -> Self {
        Self {
            status: SurveyStatus::Ok,
            error: None,
            metrics: MetricValues::new(metric_names(mode)),
            auxiliary_diagnostics: MetricValues::new(AUXILIARY_METRICS),
            counts: SurveyCounts::default(),
            warnings: Vec::new(),
            witness: None,
        }
    }

    pub fn failed(mode: Mode, status: SurveyStatus, error: String) -> Self {
        Self {
            status,
            error: Some(error),
            ..Self::empty(mode)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroEntry {
    pub mean: Option<f64>,
    /// Surveys contributing a value.
    pub n: usize,
    /// Evaluated surveys whose value was null.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroAverages {
    pub metrics: BTreeMap<&'static str, MacroEntry>,
    pub auxiliary_diagnostics: BTreeMap<&'static str, MacroEntry>,
    pub surveys_evaluated: usize,
    pub surveys_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub config: EvaluationConfig,
    pub encoder: String,
    /// False when an encoder failure stopped the run early.
    pub complete: bool,
    pub notes: Vec<String>,
    pub per_survey: BTreeMap<String, SurveyReport>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroAverages,
}

fn average(values: &[Option<f64>]) -> MacroEntry {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    MacroEntry {
        mean: (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64),
        n: present.len(),
        excluded: values.len() - present.len(),
    }
}

/// Unweighted mean over surveys with a value, per metric.
pub fn macro_average(mode: Mode, surveys: &BTreeMap<String, SurveyReport>) -> MacroAverages {
    let ok: Vec<&SurveyReport> = surveys.values().filter(|s| s.status == SurveyStatus::Ok).collect();
    let collect = |names: &[&'static str], aux: bool| {
        names
            .iter()
            .map(|&name| {
                let values: Vec<Option<f64>> = ok
                    .iter()
                    .map(|s| if aux { &s.auxiliary_diagnostics } else { &s.metrics }.get(name))
                    .collect();
                (name, average(&values))
            })
            .collect()
    };
    MacroAverages {
        metrics: collect(metric_names(mode), false),
        auxiliary_diagnostics: collect(AUXILIARY_METRICS, true),
        surveys_evaluated: ok.len(),
        surveys_failed: surveys.len() - ok.len(),
    }
}

pub(crate) fn default_notes(mode: Mode) -> Vec<String> {
    let mut notes = vec![
        "metric values are fractions in [0, 1]; us_ted is an absolute edit cost and us_nted_pct a percentage".to_string(),
        "null marks an undefined value; macro means skip nulls and count them under 'excluded'".to_string(),
        "nsr, nsp and soft_f1 compare label multisets only and are auxiliary diagnostics, not structural scores"
            .to_string(),
    ];
    match mode {
        Mode::BottomUp => notes.push(
            "bottom-up mode: leaf metrics use the model assignment transported through the title alignment; \
             expert papers without a model counterpart are labeled UNRETRIEVED"
                .to_string(),
        ),
        Mode::DeepResearch => notes.push(
            "deep-research mode: ari/hom/comp/v cover all expert papers with unretrieved ones labeled UNRETRIEVED; \
             ari_cap/v_cap cover aligned papers only"
                .to_string(),
        ),
    }
    notes
}

impl MetricReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat CSV: one row per survey plus a `MACRO` row. Fraction metrics get
    /// an extra `<name>_pct` display column.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let names = metric_names(self.mode);
        let mut header = vec!["survey_id".to_string(), "status".to_string()];
        for &n in names.iter().chain(AUXILIARY_METRICS) {
            header.push(n.to_string());
            if FRACTION_METRICS.contains(&n) {
                header.push(format!("{n}_pct"));
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;

        let cells = |lookup: &dyn Fn(&str) -> Option<f64>| {
            let mut row = Vec::new();
            for &n in names.iter().chain(AUXILIARY_METRICS) {
                let v = lookup(n);
                row.push(v.map(|x| x.to_string()).unwrap_or_default());
                if FRACTION_METRICS.contains(&n) {
                    row.push(v.map(|x| format!("{:.2}", x * 100.0)).unwrap_or_default());
                }
            }
            row
        };
        for (id, s) in &self.per_survey {
            let status = serde_json::to_value(s.status).expect("status serializes");
            let mut row = vec![id.clone(), status.as_str().unwrap_or_default().to_string()];
            row.extend(cells(&|n| {
                if s.metrics.contains(n) {
                    s.metrics.get(n)
                } else {
                    s.auxiliary_diagnostics.get(n)
                }
            }));
            w.write_record(&row)?;
        }
        let mut row = vec!["MACRO".to_string(), String::new()];
        row.extend(cells(&|n| {
            self.macro_avg
                .metrics
                .get(n)
                .or_else(|| self.macro_avg.auxiliary_diagnostics.get(n))
                .and_then(|e| e.mean)
        }));
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }
}
