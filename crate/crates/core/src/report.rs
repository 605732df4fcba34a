//! Joins evaluation records to their suite and aggregates scores overall and
//! per morpheme count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval_client::{EvalRecord, Parsed};
use crate::lang_profile::Language;
use crate::metrics::{coherence, exact_match, option_accuracy, sample_macro_f1};
use crate::num::{mean, round1, Scalar};
use crate::suite::{Distribution, Label, Task, TaskInstance};

pub const ACCURACY: &str = "accuracy";
pub const MACRO_F1: &str = "macro_f1";
pub const COHERENCE: &str = "coherence";
pub const OPTION_ACCURACY: &str = "option_accuracy";

/// Answer normalization applied before scoring, recorded in every report.
pub const NORMALIZATION: &str = "productivity: last <Answer> span if any, else last nonempty line; \
leading answer label removed; surrounding non-alphanumerics trimmed; NFC; language case folding. \
systematicity: last <Answer> span for chain-of-thought prompts; first word of the last nonempty line \
matched against yes/evet/kyllä and no/hayır/hayir/ei. Unparseable answers count as wrong.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub model_name: String,
    pub language: Language,
    pub task: Task,
    pub distribution: Distribution,
    /// Metric name to score in 0..=100.
    pub overall: BTreeMap<String, f64>,
    pub by_stratum: BTreeMap<usize, BTreeMap<String, f64>>,
    /// Scored samples per morpheme count.
    pub counts: BTreeMap<usize, usize>,
    pub samples: usize,
    pub predictions: usize,
    pub parse_failures: usize,
    pub parse_failure_rate: f64,
    /// Evaluation instances without any record.
    pub unscored: usize,
    pub normalization: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// Per-sample metric values, grouped by morpheme count.
#[derive(Debug, Clone)]
pub struct SampleScores<T> {
    pub metrics: Vec<&'static str>,
    pub by_stratum: BTreeMap<usize, Vec<Vec<T>>>,
}

impl<T: Scalar> SampleScores<T> {
    /// Mean of each metric over the given samples, scaled to 0..=100.
    fn summarize<'a>(&self, samples: impl Iterator<Item = &'a Vec<T>>) -> Vec<T>
    where
        T: 'a,
    {
        let samples: Vec<&Vec<T>> = samples.collect();
        (0..self.metrics.len())
            .map(|m| {
                let column: Vec<T> = samples.iter().map(|s| s[m].clone()).collect();
                mean(&column) * T::hundred()
            })
            .collect()
    }

    pub fn overall(&self) -> Vec<T> {
        self.summarize(self.by_stratum.values().flatten())
    }

    pub fn stratum(&self, count: usize) -> Vec<T> {
        self.summarize(self.by_stratum.get(&count).into_iter().flatten())
    }
}

struct Joined<'a> {
    instances: Vec<(&'a TaskInstance, Vec<&'a EvalRecord>)>,
    unscored: usize,
}

fn join<'a>(records: &'a [EvalRecord], suite: &'a [TaskInstance]) -> Result<Joined<'a>> {
    let index: HashMap<&str, &TaskInstance> = suite.iter().map(|i| (i.instance_id.as_str(), i)).collect();
    let mut grouped: BTreeMap<&str, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        let inst = index
            .get(r.instance_id.as_str())
            .ok_or_else(|| Error::OrphanRecord(r.instance_id.clone()))?;
        if let Some(i) = r.option_index {
            if i >= inst.options.len() {
                return Err(Error::OrphanRecord(format!("{} option {i}", r.instance_id)));
            }
        }
        grouped.entry(r.instance_id.as_str()).or_default().push(r);
    }
    let mut instances = Vec::new();
    let mut unscored = 0;
    for inst in suite.iter().filter(|i| i.split == crate::suite::Split::Eval) {
        match grouped.remove(inst.instance_id.as_str()) {
            Some(recs) => instances.push((inst, recs)),
            None => unscored += 1,
        }
    }
    // Records for demo-split instances are joinable but not scored.
    Ok(Joined { instances, unscored })
}

fn homogeneous(instances: &[(&TaskInstance, Vec<&EvalRecord>)]) -> Result<Option<(Task, Distribution, Language)>> {
    let kinds: BTreeSet<(Task, Distribution, Language)> = instances
        .iter()
        .map(|(i, _)| (i.task, i.distribution, i.language))
        .collect();
    match kinds.len() {
        0 => Ok(None),
        1 => Ok(kinds.into_iter().next()),
        _ => Err(Error::Config("records span several task/distribution/language suites".into())),
    }
}

/// Scores every joined sample with scalar type `T`.
pub fn score_samples<T: Scalar>(records: &[EvalRecord], suite: &[TaskInstance]) -> Result<SampleScores<T>> {
    let joined = join(records, suite)?;
    let task = homogeneous(&joined.instances)?.map(|k| k.0).unwrap_or(Task::Productivity);
    let metrics = match task {
        Task::Productivity => vec![ACCURACY],
        Task::Systematicity => vec![MACRO_F1, COHERENCE, OPTION_ACCURACY],
    };
    let mut by_stratum: BTreeMap<usize, Vec<Vec<T>>> = BTreeMap::new();
    for (inst, recs) in &joined.instances {
        let values = match task {
            Task::Productivity => {
                let pred = recs.first().and_then(|r| r.parsed.word());
                let gold = inst.gold_surface.as_deref().unwrap_or_default();
                let right = exact_match(pred, gold) || inst.alternatives.iter().any(|a| exact_match(pred, a));
                vec![if right { T::one() } else { T::zero() }]
            }
            Task::Systematicity => {
                let labels: Vec<Label> = inst.options.iter().map(|o| o.label).collect();
                let mut preds: Vec<Option<Label>> = vec![None; labels.len()];
                for r in recs {
                    if let Some(i) = r.option_index {
                        preds[i] = r.parsed.label();
                    }
                }
                vec![
                    sample_macro_f1(&preds, &labels)?,
                    coherence(&preds, &labels)?,
                    option_accuracy(&preds, &labels)?,
                ]
            }
        };
        by_stratum.entry(inst.morpheme_count).or_default().push(values);
    }
    Ok(SampleScores { metrics, by_stratum })
}

fn named<T: Scalar>(metrics: &[&str], values: Vec<T>) -> BTreeMap<String, f64> {
    metrics
        .iter()
        .zip(values)
        .map(|(m, v)| (m.to_string(), v.to_f64_lossy()))
        .collect()
}

/// Overall and per-stratum scores. Macro-F1 and coherence are averaged over
/// samples; the overall value pools every sample rather than averaging the
/// stratum means.
pub fn stratify_report(records: &[EvalRecord], suite: &[TaskInstance]) -> Result<ScoreReport> {
    let joined = join(records, suite)?;
    let (task, distribution, language) = homogeneous(&joined.instances)?
        .or_else(|| suite.first().map(|i| (i.task, i.distribution, i.language)))
        .ok_or_else(|| Error::Config("empty suite".into()))?;
    let scores = score_samples::<f64>(records, suite)?;
    let by_stratum = scores
        .by_stratum
        .keys()
        .map(|&k| (k, named(&scores.metrics, scores.stratum(k))))
        .collect();
    let counts = scores.by_stratum.iter().map(|(k, v)| (*k, v.len())).collect();
    let parse_failures = records.iter().filter(|r| r.parsed == Parsed::ParseFailure).count();
    let model_name = records
        .iter()
        .map(|r| r.model_name.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect::<Vec<_>>()
        .join("+");
    Ok(ScoreReport {
        model_name,
        language,
        task,
        distribution,
        overall: named(&scores.metrics, scores.overall()),
        by_stratum,
        counts,
        samples: joined.instances.len(),
        predictions: records.len(),
        parse_failures,
        parse_failure_rate: if records.is_empty() {
            0.0
        } else {
            100.0 * parse_failures as f64 / records.len() as f64
        },
        unscored: joined.unscored,
        normalization: NORMALIZATION.to_string(),
        manifest: None,
    })
}

fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

impl ScoreReport {
    fn metric_names(&self) -> Vec<&str> {
        self.overall.keys().map(String::as_str).collect()
    }

    pub fn to_csv(&self) -> String {
        let metrics = self.metric_names();
        let mut out = format!("stratum,count,{}\n", metrics.join(","));
        for (k, values) in &self.by_stratum {
            let cells: Vec<String> = metrics.iter().map(|m| fmt1(values[*m])).collect();
            writeln!(out, "{k},{},{}", self.counts[k], cells.join(",")).expect("write to string");
        }
        let cells: Vec<String> = metrics.iter().map(|m| fmt1(self.overall[*m])).collect();
        writeln!(out, "all,{},{}", self.samples, cells.join(",")).expect("write to string");
        out
    }

    pub fn to_text(&self) -> String {
        let metrics = self.metric_names();
        let mut out = String::new();
        writeln!(
            out,
            "model {} | {} {} {}",
            self.model_name, self.language, self.task, self.distribution
        )
        .expect("write to string");
        let mut header = format!("{:<8}{:>7}", "morph", "n");
        for m in &metrics {
            header.push_str(&format!("{m:>17}"));
        }
        out.push_str(header.trim_end());
        out.push('\n');
        let row = |label: String, n: usize, values: &BTreeMap<String, f64>| {
            let mut line = format!("{label:<8}{n:>7}");
            for m in &metrics {
                line.push_str(&format!("{:>17}", fmt1(values[*m])));
            }
            line
        };
        for (k, values) in &self.by_stratum {
            writeln!(out, "{}", row(k.to_string(), self.counts[k], values)).expect("write to string");
        }
        writeln!(out, "{}", row("all".into(), self.samples, &self.overall)).expect("write to string");
        writeln!(
            out,
            "parse failures: {} of {} ({}%)",
            self.parse_failures,
            self.predictions,
            fmt1(self.parse_failure_rate)
        )
        .expect("write to string");
        if self.unscored > 0 {
            writeln!(out, "unscored instances: {}", self.unscored).expect("write to string");
        }
        out
    }

    /// Writes report.json, report.csv and report.txt into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::io::write_json(&dir.join("report.json"), self)?;
        crate::io::write_text(&dir.join("report.csv"), &self.to_csv())?;
        crate::io::write_text(&dir.join("report.txt"), &self.to_text())
    }
}

/// Side-by-side comparison of several reports: one row per model and
/// language, one column per task, distribution and metric. Returns
/// (text table, CSV).
pub fn merge_reports(reports: &[ScoreReport]) -> (String, String) {
    let mut columns: BTreeSet<(Task, String, Distribution)> = BTreeSet::new();
    let mut rows: BTreeMap<(String, Language), BTreeMap<(Task, String, Distribution), f64>> = BTreeMap::new();
    for r in reports {
        for (metric, value) in &r.overall {
            let col = (r.task, metric.clone(), r.distribution);
            columns.insert(col.clone());
            rows.entry((r.model_name.clone(), r.language)).or_default().insert(col, *value);
        }
    }
    let names: Vec<String> = columns
        .iter()
        .map(|(t, m, d)| format!("{t}/{m}/{d}"))
        .collect();
    let mut csv = format!("model,language,{}\n", names.join(","));
    let width = names.iter().map(String::len).max().unwrap_or(0).max(6) + 2;
    let mut text = format!("{:<24}{:<10}", "model", "language");
    for n in &names {
        text.push_str(&format!("{n:>width$}"));
    }
    text = text.trim_end().to_string();
    text.push('\n');
    for ((model, lang), values) in &rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| values.get(c).map_or_else(|| "-".to_string(), |v| fmt1(*v)))
            .collect();
        writeln!(csv, "{model},{lang},{}", cells.join(",")).expect("write to string");
        let mut line = format!("{model:<24}{:<10}", lang.to_string());
        for c in &cells {
            line.push_str(&format!("{c:>width$}"));
        }
        writeln!(text, "{}", line.trim_end()).expect("write to string");
    }
    (text, csv)
}
