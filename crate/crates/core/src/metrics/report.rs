use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::{miou, ocr_accuracy, MetricError};
use crate::raster::{mse, Raster};
use crate::svg::SlideDoc;

/// Scores for one predicted slide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub sample_id: String,
    pub method: String,
    pub miou: f64,
    pub ocr_accuracy: f64,
    pub mse: f64,
    /// Scores merged in from an external scorer.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external: BTreeMap<String, f64>,
}

/// Scores a prediction against ground truth. `sample_id` and `method` are
/// left empty for the caller to fill.
pub fn evaluate_sample(
    gt_doc: &SlideDoc,
    gt_raster: &Raster,
    pred_doc: &SlideDoc,
    pred_raster: &Raster,
) -> Result<MetricRecord, MetricError> {
    Ok(MetricRecord {
        sample_id: String::new(),
        method: String::new(),
        miou: miou(gt_doc, pred_doc),
        ocr_accuracy: ocr_accuracy(gt_doc, pred_doc),
        mse: mse(gt_raster, pred_raster)?,
        external: BTreeMap::new(),
    })
}

/// Per-method means, with mIoU and OCR accuracy in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub samples: usize,
    pub miou_pct: f64,
    pub ocr_pct: f64,
    pub mse: f64,
    pub external: BTreeMap<String, f64>,
}

/// Groups records by method in first-appearance order and averages each metric.
pub fn summarize(records: &[MetricRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&MetricRecord>> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.method.as_str()).or_default();
        if g.is_empty() {
            order.push(&r.method);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|method| {
            let group = &groups[method];
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&MetricRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let mut external: BTreeMap<String, (f64, usize)> = BTreeMap::new();
            for r in group {
                for (k, v) in &r.external {
                    let e = external.entry(k.clone()).or_default();
                    e.0 += v;
                    e.1 += 1;
                }
            }
            SummaryRow {
                method: method.to_string(),
                samples: group.len(),
                miou_pct: 100.0 * mean(&|r| r.miou),
                ocr_pct: 100.0 * mean(&|r| r.ocr_accuracy),
                mse: mean(&|r| r.mse),
                external: external.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
            }
        })
        .collect()
}

/// CSV with methods as rows and metrics as columns; external score columns
/// follow in name order.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut extra: Vec<&str> = rows.iter().flat_map(|r| r.external.keys().map(String::as_str)).collect();
    extra.sort_unstable();
    extra.dedup();
    let mut out = String::from("method,mIoU (%),OCR Accuracy (%),MSE");
    for k in &extra {
        out.push(',');
        out.push_str(&csv_field(k));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{:.2},{:.2},{:.2}", csv_field(&r.method), r.miou_pct, r.ocr_pct, r.mse));
        for k in &extra {
            match r.external.get(*k) {
                Some(v) => out.push_str(&format!(",{v:.4}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One JSON object per line.
pub fn records_jsonl(records: &[MetricRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

/// A command run as `<cmd> <gt.png> <pred.png>` that prints a JSON object
/// of numeric scores on stdout.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    pub command: String,
}

impl ExternalScorer {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalScorer { command: command.into() }
    }

    pub fn score(&self, gt_png: &Path, pred_png: &Path) -> Result<BTreeMap<String, f64>, MetricError> {
        let mut parts = self.command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| MetricError::Scorer("empty scorer command".into()))?;
        let output = Command::new(program)
            .args(parts)
            .arg(gt_png)
            .arg(pred_png)
            .output()
            .map_err(|e| MetricError::Scorer(format!("{program}: {e}")))?;
        if !output.status.success() {
            return Err(MetricError::Scorer(format!("{program} exited with {}", output.status)));
        }
        serde_json::from_slice(&output.stdout).map_err(|e| MetricError::Scorer(format!("bad scorer output: {e}")))
    }

    /// Scores and merges the result into `record.external`.
    pub fn merge_into(&self, record: &mut MetricRecord, gt_png: &Path, pred_png: &Path) -> Result<(), MetricError> {
        record.external.extend(self.score(gt_png, pred_png)?);
        Ok(())
    }
}
