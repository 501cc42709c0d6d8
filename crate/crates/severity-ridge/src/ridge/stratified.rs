//! Age-stratified fitting: one independent ridge model per age bucket,
//! with per-row routing at prediction time.

use rayon::prelude::*;

use super::{fit, predict_one, RidgeConfig, RidgeModel};
use crate::cohort::AGE_MONTHS_MAX;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default bucket boundaries: ages {0-5, 6-11, 12-17, 18-24}. Each cutoff
/// starts a new bucket.
pub const DEFAULT_AGE_CUTOFFS: [u8; 3] = [6, 12, 18];

#[derive(Clone, Debug)]
pub struct StratifiedModel {
    cutoffs: Vec<u8>,
    models: Vec<RidgeModel>,
}

impl StratifiedModel {
    pub fn cutoffs(&self) -> &[u8] {
        &self.cutoffs
    }

    pub fn models(&self) -> &[RidgeModel] {
        &self.models
    }

    pub fn bucket_count(&self) -> usize {
        self.models.len()
    }

    /// Bucket owning an age: the number of cutoffs at or below it.
    pub fn bucket_index(&self, age_months: u8) -> usize {
        self.cutoffs.iter().filter(|&&c| age_months >= c).count()
    }

    /// Inclusive age range of a bucket, for messages and reports.
    pub fn bucket_range(&self, index: usize) -> (u8, u8) {
        bucket_range(&self.cutoffs, index)
    }

    /// Routes each row to its age bucket's model. `ages` must align with
    /// the rows of `x`.
    pub fn predict(&self, x: &Matrix, ages: &[u8]) -> Result<Vec<f64>> {
        if ages.len() != x.nrows() {
            return Err(Error::invalid(format!(
                "ages length {} does not match row count {}",
                ages.len(),
                x.nrows()
            )));
        }
        check_ages(ages)?;
        let mut out = Vec::with_capacity(x.nrows());
        for (i, &age) in ages.iter().enumerate() {
            let model = &self.models[self.bucket_index(age)];
            out.push(predict_one(model, x.row(i))?);
        }
        Ok(out)
    }
}

fn bucket_range(cutoffs: &[u8], index: usize) -> (u8, u8) {
    let start = if index == 0 { 0 } else { cutoffs[index - 1] };
    let end = if index == cutoffs.len() {
        AGE_MONTHS_MAX
    } else {
        cutoffs[index] - 1
    };
    (start, end)
}

fn check_ages(ages: &[u8]) -> Result<()> {
    for &a in ages {
        if a > AGE_MONTHS_MAX {
            return Err(Error::OutOfRange {
                what: "age_months",
                got: a.to_string(),
                expected: "0..=24",
            });
        }
    }
    Ok(())
}

fn check_cutoffs(cutoffs: &[u8]) -> Result<()> {
    for &c in cutoffs {
        if c == 0 || c > AGE_MONTHS_MAX {
            return Err(Error::OutOfRange {
                what: "age cutoff",
                got: c.to_string(),
                expected: "1..=24",
            });
        }
    }
    for w in cutoffs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid(format!(
                "age cutoffs must be strictly ascending, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Fits one model per age bucket. Buckets are defined by `cutoffs` (each
/// cutoff starts a new bucket; empty `cutoffs` means a single bucket over
/// all ages). Every bucket must receive at least one row. Bucket fits run
/// in parallel.
pub fn fit_stratified(
    x: &Matrix,
    y: &[f64],
    ages: &[u8],
    config: &RidgeConfig,
    cutoffs: &[u8],
) -> Result<StratifiedModel> {
    check_cutoffs(cutoffs)?;
    if ages.len() != x.nrows() {
        return Err(Error::invalid(format!(
            "ages length {} does not match row count {}",
            ages.len(),
            x.nrows()
        )));
    }
    if y.len() != x.nrows() {
        return Err(Error::invalid(format!(
            "target length {} does not match row count {}",
            y.len(),
            x.nrows()
        )));
    }
    check_ages(ages)?;
    let n_buckets = cutoffs.len() + 1;
    let mut rows_per_bucket: Vec<Vec<usize>> = vec![Vec::new(); n_buckets];
    for (i, &age) in ages.iter().enumerate() {
        let b = cutoffs.iter().filter(|&&c| age >= c).count();
        rows_per_bucket[b].push(i);
    }
    for (b, rows) in rows_per_bucket.iter().enumerate() {
        if rows.is_empty() {
            let (lo, hi) = bucket_range(cutoffs, b);
            return Err(Error::invalid(format!(
                "age bucket {lo}..={hi} has no rows"
            )));
        }
    }
    let models: Result<Vec<RidgeModel>> = rows_per_bucket
        .par_iter()
        .map(|rows| {
            let xb = x.select_rows(rows);
            let yb: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
            fit(&xb, &yb, config)
        })
        .collect();
    Ok(StratifiedModel {
        cutoffs: cutoffs.to_vec(),
        models: models?,
    })
}
