//! Confusion matrices, per-class precision/recall/F1, top-k accuracy and
//! report rendering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{preds} predictions for {labels} labels")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("ranking {record} has {len} entries, fewer than k = {k}")]
    RankingTooShort { record: usize, len: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// K x K counts; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        for class in [truth, predicted] {
            if class >= self.classes {
                return Err(MetricsError::ClassOutOfRange {
                    class,
                    classes: self.classes,
                });
            }
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    /// Adds another matrix of the same size (for sharded accumulation).
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(
            self.classes, other.classes,
            "merging confusion matrices of different sizes"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.get(class, class)
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, class)).sum::<u64>() - self.true_positives(class)
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        (0..self.classes).map(|p| self.get(class, p)).sum::<u64>() - self.true_positives(class)
    }

    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.classes).map(|c| self.true_positives(c)).sum();
        ratio(correct, self.total())
    }
}

pub fn confusion(preds: &[usize], labels: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (&p, &t) in preds.iter().zip(labels) {
        cm.record(t, p)?;
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroAverages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub classes: Vec<ClassMetrics>,
    pub macro_avg: MacroAverages,
    pub accuracy: f64,
    /// `(k, accuracy)` pairs, ascending by k.
    pub topk: Vec<(usize, f64)>,
}

impl ClassReport {
    pub fn with_topk(mut self, k: usize, accuracy: f64) -> Self {
        self.topk.retain(|&(existing, _)| existing != k);
        self.topk.push((k, accuracy));
        self.topk.sort_by_key(|&(k, _)| k);
        self
    }

    pub fn topk_accuracy(&self, k: usize) -> Option<f64> {
        self.topk.iter().find(|&&(kk, _)| kk == k).map(|&(_, a)| a)
    }
}

pub fn precision_recall_f1(cm: &ConfusionMatrix) -> ClassReport {
    let classes: Vec<ClassMetrics> = (0..cm.classes())
        .map(|c| {
            let tp = cm.true_positives(c);
            let precision = ratio(tp, tp + cm.false_positives(c));
            let recall = ratio(tp, tp + cm.false_negatives(c));
            ClassMetrics {
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: tp + cm.false_negatives(c),
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if classes.is_empty() {
            0.0
        } else {
            classes.iter().map(f).sum::<f64>() / classes.len() as f64
        }
    };
    ClassReport {
        macro_avg: MacroAverages {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        },
        accuracy: cm.accuracy(),
        topk: Vec::new(),
        classes,
    }
}

/// Fraction of records whose label is among the first `k` entries of its
/// ranking.
pub fn topk_accuracy(rankings: &[Vec<usize>], labels: &[usize], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    if rankings.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            preds: rankings.len(),
            labels: labels.len(),
        });
    }
    let mut hits = 0u64;
    for (record, (ranking, label)) in rankings.iter().zip(labels).enumerate() {
        if ranking.len() < k {
            return Err(MetricsError::RankingTooShort {
                record,
                len: ranking.len(),
                k,
            });
        }
        if ranking[..k].contains(label) {
            hits += 1;
        }
    }
    Ok(ratio(hits, labels.len() as u64))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct NamedClassMetrics {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TopKEntry {
    pub k: usize,
    pub accuracy: f64,
}

/// The machine-readable report.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportJson {
    pub classes: Vec<NamedClassMetrics>,
    pub accuracy: f64,
    pub top3_accuracy: Option<f64>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroAverages,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub topk: Vec<TopKEntry>,
}

pub struct RenderedReport {
    pub text: String,
    pub json: String,
}

/// Renders an aligned two-decimal text table (one row per class, then the
/// macro row and accuracy lines) and a full-precision JSON document.
///
/// Missing names are filled with `class N`; extra names are ignored.
pub fn format_report(report: &ClassReport, names: &[String]) -> RenderedReport {
    let name_of = |i: usize| {
        names
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("class {i}"))
    };
    let width = (0..report.classes.len())
        .map(|i| name_of(i).chars().count())
        .chain(["Class Name".len(), "Macro average".len()])
        .max()
        .unwrap_or(0);

    let mut text = format!(
        "{:<width$}  {:>9}  {:>6}  {:>8}  {:>7}\n",
        "Class Name", "Precision", "Recall", "F1-Score", "Support"
    );
    for (i, m) in report.classes.iter().enumerate() {
        text += &format!(
            "{:<width$}  {:>9.2}  {:>6.2}  {:>8.2}  {:>7}\n",
            name_of(i),
            m.precision,
            m.recall,
            m.f1,
            m.support
        );
    }
    let total: u64 = report.classes.iter().map(|m| m.support).sum();
    text += &format!(
        "{:<width$}  {:>9.2}  {:>6.2}  {:>8.2}  {:>7}\n",
        "Macro average",
        report.macro_avg.precision,
        report.macro_avg.recall,
        report.macro_avg.f1,
        total
    );
    text += &format!("\nAccuracy: {:.2}\n", report.accuracy);
    for &(k, acc) in &report.topk {
        text += &format!("Top-{k} accuracy: {acc:.2}\n");
    }

    let doc = ReportJson {
        classes: report
            .classes
            .iter()
            .enumerate()
            .map(|(i, m)| NamedClassMetrics {
                name: name_of(i),
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                support: m.support,
            })
            .collect(),
        accuracy: report.accuracy,
        top3_accuracy: report.topk_accuracy(3),
        macro_avg: report.macro_avg,
        topk: report
            .topk
            .iter()
            .map(|&(k, accuracy)| TopKEntry { k, accuracy })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&doc).expect("report serializes");
    RenderedReport { text, json }
}
