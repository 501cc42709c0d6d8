//! Versioned plain-text model persistence.
//!
//! Format: a magic header line `severity-ridge-model v1`, then one
//! `key value...` line per field. Reals are written with 17 significant
//! digits (`{:.16e}`), which round-trips every finite f64 bit for bit, so a
//! saved model predicts identically after loading.

use std::path::Path;

use super::{RidgeConfig, RidgeModel};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::linalg::Matrix;

const MAGIC: &str = "severity-ridge-model";
const VERSION: &str = "v1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn reals(vs: &[f64]) -> String {
    vs.iter()
        .map(|v| real(*v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn opt_real(v: Option<f64>) -> String {
    match v {
        Some(v) => real(v),
        None => "none".to_string(),
    }
}

fn render(model: &RidgeModel) -> String {
    let c = model.config();
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    out.push_str(&format!("p {}\n", model.p()));
    out.push_str(&format!("coefficients {}\n", reals(model.coefficients())));
    out.push_str(&format!("intercept {}\n", real(model.intercept())));
    out.push_str(&format!("alpha {}\n", real(model.alpha())));
    out.push_str(&format!("lambda {}\n", real(model.lambda())));
    out.push_str(&format!(
        "sigma {}\n",
        reals(model.posterior_covariance().data())
    ));
    out.push_str(&format!("feature_means {}\n", reals(model.feature_means())));
    out.push_str(&format!("effective_dof {}\n", real(model.effective_dof())));
    out.push_str(&format!("n_iter {}\n", model.n_iter()));
    out.push_str(&format!("converged {}\n", model.converged()));
    out.push_str(&format!(
        "log_evidence_trace {} {}\n",
        model.log_evidence_trace().len(),
        reals(model.log_evidence_trace())
    ));
    out.push_str(&format!("alpha_1 {}\n", real(c.alpha_1)));
    out.push_str(&format!("alpha_2 {}\n", real(c.alpha_2)));
    out.push_str(&format!("lambda_1 {}\n", real(c.lambda_1)));
    out.push_str(&format!("lambda_2 {}\n", real(c.lambda_2)));
    out.push_str(&format!("alpha_init {}\n", opt_real(c.alpha_init)));
    out.push_str(&format!("lambda_init {}\n", opt_real(c.lambda_init)));
    out.push_str(&format!("tol {}\n", real(c.tol)));
    out.push_str(&format!("max_iter {}\n", c.max_iter));
    out.push_str(&format!("fit_intercept {}\n", c.fit_intercept));
    out.push_str(&format!("update_hyperparams {}\n", c.update_hyperparams));
    out
}

/// Saves a model to `path` (atomic write).
pub fn save_model(model: &RidgeModel, path: &Path) -> Result<()> {
    write_atomic(path, render(model).as_bytes())
}

struct FieldMap<'a> {
    path: &'a Path,
    // (line number, raw value text) per key, in file order
    entries: Vec<(&'a str, usize, &'a str)>,
}

impl<'a> FieldMap<'a> {
    fn take(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let pos = self
            .entries
            .iter()
            .position(|(k, _, _)| *k == key)
            .ok_or_else(|| Error::parse(self.path, 0, key, "missing key"))?;
        let (_, line, value) = self.entries.remove(pos);
        Ok((line, value))
    }

    fn parse_real(&mut self, key: &str) -> Result<f64> {
        let (line, value) = self.take(key)?;
        value
            .parse()
            .map_err(|_| Error::parse(self.path, line, key, format!("bad real {value:?}")))
    }

    fn parse_reals(&mut self, key: &str, expect: usize) -> Result<Vec<f64>> {
        let (line, value) = self.take(key)?;
        let vs: std::result::Result<Vec<f64>, _> =
            value.split_whitespace().map(str::parse).collect();
        let vs = vs
            .map_err(|_| Error::parse(self.path, line, key, "bad real in list"))?;
        if vs.len() != expect {
            return Err(Error::parse(
                self.path,
                line,
                key,
                format!("expected {expect} values, got {}", vs.len()),
            ));
        }
        Ok(vs)
    }

    fn parse_usize(&mut self, key: &str) -> Result<usize> {
        let (line, value) = self.take(key)?;
        value
            .parse()
            .map_err(|_| Error::parse(self.path, line, key, format!("bad integer {value:?}")))
    }

    fn parse_bool(&mut self, key: &str) -> Result<bool> {
        let (line, value) = self.take(key)?;
        match value {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::parse(
                self.path,
                line,
                key,
                format!("expected true or false, got {other:?}"),
            )),
        }
    }

    fn parse_opt_real(&mut self, key: &str) -> Result<Option<f64>> {
        let (line, value) = self.take(key)?;
        if value == "none" {
            return Ok(None);
        }
        value
            .parse()
            .map(Some)
            .map_err(|_| Error::parse(self.path, line, key, format!("bad real {value:?}")))
    }
}

/// Loads a model saved by [`save_model`], validating the header, version,
/// and every type invariant.
pub fn load_model(path: &Path) -> Result<RidgeModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h,
        None => return Err(Error::parse(path, 1, "header", "empty file")),
    };
    match header.split_once(' ') {
        Some((magic, version)) if magic == MAGIC => {
            if version != VERSION {
                return Err(Error::parse(
                    path,
                    1,
                    "header",
                    format!("unsupported version {version:?}, expected {VERSION:?}"),
                ));
            }
        }
        _ => {
            return Err(Error::parse(
                path,
                1,
                "header",
                format!("not a {MAGIC} file"),
            ))
        }
    }

    let mut entries = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        if entries.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::parse(path, line_no, key, "duplicate key"));
        }
        entries.push((key, line_no, value));
    }
    let mut map = FieldMap { path, entries };

    let p = map.parse_usize("p")?;
    if p == 0 {
        return Err(Error::parse(path, 0, "p", "p must be >= 1"));
    }
    let coefficients = map.parse_reals("coefficients", p)?;
    let intercept = map.parse_real("intercept")?;
    let alpha = map.parse_real("alpha")?;
    let lambda = map.parse_real("lambda")?;
    let sigma = Matrix::from_vec(map.parse_reals("sigma", p * p)?, p, p)
        .expect("length checked above");
    let feature_means = map.parse_reals("feature_means", p)?;
    let effective_dof = map.parse_real("effective_dof")?;
    let n_iter = map.parse_usize("n_iter")?;
    let converged = map.parse_bool("converged")?;
    let (trace_line, trace_value) = map.take("log_evidence_trace")?;
    let mut tokens = trace_value.split_whitespace();
    let count: usize = tokens
        .next()
        .ok_or_else(|| Error::parse(path, trace_line, "log_evidence_trace", "missing count"))?
        .parse()
        .map_err(|_| Error::parse(path, trace_line, "log_evidence_trace", "bad count"))?;
    let trace: std::result::Result<Vec<f64>, _> = tokens.map(str::parse).collect();
    let trace = trace
        .map_err(|_| Error::parse(path, trace_line, "log_evidence_trace", "bad real in list"))?;
    if trace.len() != count {
        return Err(Error::parse(
            path,
            trace_line,
            "log_evidence_trace",
            format!("expected {count} values, got {}", trace.len()),
        ));
    }
    let config = RidgeConfig {
        alpha_1: map.parse_real("alpha_1")?,
        alpha_2: map.parse_real("alpha_2")?,
        lambda_1: map.parse_real("lambda_1")?,
        lambda_2: map.parse_real("lambda_2")?,
        alpha_init: map.parse_opt_real("alpha_init")?,
        lambda_init: map.parse_opt_real("lambda_init")?,
        tol: map.parse_real("tol")?,
        max_iter: map.parse_usize("max_iter")?,
        fit_intercept: map.parse_bool("fit_intercept")?,
        update_hyperparams: map.parse_bool("update_hyperparams")?,
    };
    if let Some((key, line, _)) = map.entries.first() {
        return Err(Error::parse(path, *line, *key, "unknown key"));
    }
    RidgeModel::from_parts(
        coefficients,
        intercept,
        alpha,
        lambda,
        sigma,
        feature_means,
        effective_dof,
        n_iter,
        converged,
        trace,
        config,
    )
}
