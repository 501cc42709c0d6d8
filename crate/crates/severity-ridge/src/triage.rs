//! Quantile-based triage: map severity values to a small set of priority
//! groups with thresholds taken from a reference sample.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Bucket count used when no explicit `--k` is given.
pub const DEFAULT_BUCKET_COUNT: usize = 3;

const PLAN_HEADER: &str = "threshold,label_below";

/// An immutable bucketing of the real line: `k - 1` ascending thresholds
/// with `k` labels. A severity equal to a threshold falls in the bucket
/// *below* it, so bucket `j` covers `(t_{j-1}, t_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriagePlan {
    thresholds: Vec<f64>,
    labels: Vec<String>,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::invalid("bucket labels must be non-empty"));
    }
    if label.contains([',', '\n', '\r']) {
        return Err(Error::invalid(format!(
            "bucket label {label:?} may not contain commas or line breaks"
        )));
    }
    Ok(())
}

/// Built-in label sets; beyond three buckets the names are numbered by
/// ascending severity.
pub fn default_labels(k: usize) -> Vec<String> {
    match k {
        0 => Vec::new(),
        1 => vec!["all".to_string()],
        2 => vec!["low".to_string(), "high".to_string()],
        3 => vec![
            "low".to_string(),
            "medium".to_string(),
            "high".to_string(),
        ],
        _ => (1..=k).map(|i| format!("priority_{i}")).collect(),
    }
}

impl TriagePlan {
    pub fn new(thresholds: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != thresholds.len() + 1 {
            return Err(Error::invalid(format!(
                "{} thresholds need {} labels, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                labels.len()
            )));
        }
        for t in &thresholds {
            if !t.is_finite() {
                return Err(Error::invalid(format!("threshold {t} is not finite")));
            }
        }
        for pair in thresholds.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::invalid(format!(
                    "thresholds must be strictly ascending, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for label in &labels {
            check_label(label)?;
        }
        Ok(Self { thresholds, labels })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bucket_count(&self) -> usize {
        self.labels.len()
    }

    /// Index of the bucket containing `severity`. The last bucket catches
    /// everything above the top threshold.
    pub fn bucket_of(&self, severity: f64) -> Result<usize> {
        if !severity.is_finite() {
            return Err(Error::OutOfRange {
                what: "severity",
                got: severity.to_string(),
                expected: "a finite number",
            });
        }
        Ok(self
            .thresholds
            .iter()
            .position(|t| severity <= *t)
            .unwrap_or(self.labels.len() - 1))
    }

    pub fn assign(&self, severity: f64) -> Result<&str> {
        Ok(&self.labels[self.bucket_of(severity)?])
    }
}

/// Builds a plan with thresholds at the j/k nearest-rank quantiles
/// (j = 1..k-1) of `severities`. Tied quantile values collapse to a single
/// threshold, shrinking the bucket count; callers can detect this by
/// comparing `bucket_count()` against the requested `k`.
pub fn build_plan(severities: &[f64], k: usize) -> Result<TriagePlan> {
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "bucket count k",
            got: "0".to_string(),
            expected: ">= 1",
        });
    }
    if severities.is_empty() {
        return Err(Error::invalid("cannot build a plan from zero severities"));
    }
    for s in severities {
        if !s.is_finite() {
            return Err(Error::invalid(format!(
                "severities must be finite, got {s}"
            )));
        }
    }
    let mut sorted = severities.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let n = sorted.len();
    let mut thresholds: Vec<f64> = Vec::with_capacity(k - 1);
    for j in 1..k {
        // nearest-rank: the ceil(j*n/k)-th smallest value, in integer math.
        let rank = (j * n + k - 1) / k;
        let t = sorted[rank - 1];
        if thresholds.last() != Some(&t) {
            thresholds.push(t);
        }
    }
    let labels = default_labels(thresholds.len() + 1);
    TriagePlan::new(thresholds, labels)
}

/// Serializes a plan: a header, one `threshold,label` row per bucket below a
/// threshold, then the final label on its own line.
pub fn write_plan(plan: &TriagePlan, path: &Path) -> Result<()> {
    let mut out = String::from(PLAN_HEADER);
    out.push('\n');
    for (t, label) in plan.thresholds.iter().zip(&plan.labels) {
        out.push_str(&format!("{t:.16e},{label}\n"));
    }
    out.push_str(plan.labels.last().expect("plans have at least one label"));
    out.push('\n');
    write_atomic(path, out.as_bytes())
}

pub fn read_plan(path: &Path) -> Result<TriagePlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().copied() != Some(PLAN_HEADER) {
        return Err(Error::parse(
            path,
            1,
            "header",
            format!("expected {PLAN_HEADER:?}"),
        ));
    }
    if lines.len() < 2 {
        return Err(Error::parse(path, 0, "file", "missing final label line"));
    }
    let mut thresholds = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines[1..lines.len() - 1].iter().enumerate() {
        let line_no = i + 2;
        let (raw, label) = line.split_once(',').ok_or_else(|| {
            Error::parse(path, line_no, "row", "expected threshold,label")
        })?;
        let t: f64 = raw.parse().map_err(|e| {
            Error::parse(path, line_no, "threshold", format!("{e}: {raw:?}"))
        })?;
        thresholds.push(t);
        labels.push(label.to_string());
    }
    let last = lines[lines.len() - 1];
    if last.contains(',') {
        return Err(Error::parse(
            path,
            lines.len(),
            "final label",
            "expected a bare label with no threshold",
        ));
    }
    labels.push(last.to_string());
    TriagePlan::new(thresholds, labels)
}
