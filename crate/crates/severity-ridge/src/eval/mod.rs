//! Deterministic train/test splitting and regression metrics.

mod experiment;
mod report;
mod svg;

pub use experiment::{run_experiment, ExperimentReport, IterationOutcome, MetricMeans};
pub use report::{
    emit_report, MSE_CHART_FILE, R2_CHART_FILE, REPORT_CSV_HEADER, REPORT_FILE,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ridge::{predict, RidgeModel};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    /// Fraction of rows assigned to the test set, in (0, 1).
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.test_fraction.is_finite()
            || self.test_fraction <= 0.0
            || self.test_fraction >= 1.0
        {
            return Err(Error::OutOfRange {
                what: "test_fraction",
                got: self.test_fraction.to_string(),
                expected: "(0, 1)",
            });
        }
        Ok(())
    }
}

/// Splits row indices into (train, test) via a seeded Fisher-Yates shuffle.
/// The first `ceil(test_fraction * n_rows)` shuffled indices form the test
/// set. Deterministic in (n_rows, spec).
pub fn train_test_split(n_rows: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n_rows < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 rows to split, got {n_rows}"
        )));
    }
    let mut perm: Vec<usize> = (0..n_rows).collect();
    let mut rng = SplitMix64::new(spec.seed);
    for i in (1..n_rows).rev() {
        let j = rng.randint(0, i as u64) as usize;
        perm.swap(i, j);
    }
    let n_test = ((spec.test_fraction * n_rows as f64).ceil() as usize).min(n_rows);
    let test = perm[..n_test].to_vec();
    let train = perm[n_test..].to_vec();
    Ok((train, test))
}

fn check_lengths(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} true values vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one value"));
    }
    Ok(())
}

fn mean_and_sstot(y: &[f64]) -> (f64, f64) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss_tot)
}

/// Mean squared error.
pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let ss: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(ss / y_true.len() as f64)
}

/// Coefficient of determination: 1 - SS_res/SS_tot, SS_tot about the mean
/// of `y_true`. Needs at least two values and a non-constant target.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    if y_true.len() < 2 {
        return Err(Error::invalid("r2 needs at least 2 values"));
    }
    let (_, ss_tot) = mean_and_sstot(y_true);
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateTarget(
            "r2 is undefined for a constant target".to_string(),
        ));
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Normalized MSE: mse divided by the population variance of `y_true`.
/// Satisfies `nmse + r2 = 1` (up to roundoff) on a shared target.
pub fn nmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    let m = mse(y_true, y_pred)?;
    if y_true.len() < 2 {
        return Err(Error::invalid("nmse needs at least 2 values"));
    }
    let (_, ss_tot) = mean_and_sstot(y_true);
    let var = ss_tot / y_true.len() as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateTarget(
            "nmse is undefined for a constant target".to_string(),
        ));
    }
    Ok(m / var)
}

/// Which severity target a report was computed against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    Precise,
    Noisy,
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetKind::Precise => write!(f, "precise"),
            TargetKind::Noisy => write!(f, "noisy"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub target_kind: TargetKind,
    pub n_test: usize,
    pub mse: f64,
    pub nmse: f64,
    pub r2: f64,
}

/// Evaluates a model once against both target kinds on the same rows.
pub fn evaluate(
    model: &RidgeModel,
    x_test: &Matrix,
    y_precise: &[f64],
    y_noisy: &[f64],
) -> Result<(EvalReport, EvalReport)> {
    if y_precise.len() != x_test.nrows() || y_noisy.len() != x_test.nrows() {
        return Err(Error::invalid(format!(
            "test rows {} vs precise targets {} vs noisy targets {}",
            x_test.nrows(),
            y_precise.len(),
            y_noisy.len()
        )));
    }
    let pred = predict(model, x_test)?;
    let make = |kind, y_true: &[f64]| -> Result<EvalReport> {
        Ok(EvalReport {
            target_kind: kind,
            n_test: y_true.len(),
            mse: mse(y_true, &pred)?,
            nmse: nmse(y_true, &pred)?,
            r2: r2(y_true, &pred)?,
        })
    };
    Ok((
        make(TargetKind::Precise, y_precise)?,
        make(TargetKind::Noisy, y_noisy)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ridge::{fit, RidgeConfig};

    #[test]
    fn split_golden_n10_seed42() {
        let (train, test) = train_test_split(10, &SplitSpec::default()).unwrap();
        assert_eq!(test, vec![8, 3]);
        assert_eq!(train, vec![6, 5, 4, 0, 9, 2, 1, 7]);
    }

    #[test]
    fn split_golden_half_n7_seed7() {
        let spec = SplitSpec {
            test_fraction: 0.5,
            seed: 7,
        };
        let (train, test) = train_test_split(7, &spec).unwrap();
        assert_eq!(test, vec![3, 5, 1, 6]); // ceil(3.5) = 4 test rows
        assert_eq!(train.len(), 3);
    }

    #[test]
    fn split_is_a_partition() {
        let (train, test) = train_test_split(101, &SplitSpec::default()).unwrap();
        assert_eq!(train.len() + test.len(), 101);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        let spec = SplitSpec {
            test_fraction: 0.3,
            seed: 99,
        };
        assert_eq!(
            train_test_split(50, &spec).unwrap(),
            train_test_split(50, &spec).unwrap()
        );
    }

    #[test]
    fn split_rejects_degenerate_inputs() {
        assert!(train_test_split(1, &SplitSpec::default()).is_err());
        assert!(train_test_split(
            10,
            &SplitSpec {
                test_fraction: 0.0,
                seed: 1
            }
        )
        .is_err());
        assert!(train_test_split(
            10,
            &SplitSpec {
                test_fraction: 1.0,
                seed: 1
            }
        )
        .is_err());
    }

    #[test]
    fn mse_and_r2_hand_cases() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        // constant predictor at the mean scores r2 = 0
        let at_mean = [2.0, 2.0, 2.0];
        assert_eq!(r2(&y, &at_mean).unwrap(), 0.0);
        // SS_res = 1, SS_tot = 2
        let off = [1.0, 2.0, 4.0];
        assert!((mse(&y, &off).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((r2(&y, &off).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metrics_reject_bad_inputs() {
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
        assert!(r2(&[1.0], &[1.0]).is_err());
        assert!(matches!(
            r2(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            Error::DegenerateTarget(_)
        ));
        assert!(matches!(
            nmse(&[5.0, 5.0], &[1.0, 2.0]).unwrap_err(),
            Error::DegenerateTarget(_)
        ));
    }

    #[test]
    fn nmse_plus_r2_is_one() {
        let mut rng = crate::rng::SplitMix64::new(17);
        for _ in 0..50 {
            let n = 2 + rng.randint(0, 60) as usize;
            let y_true: Vec<f64> = (0..n).map(|_| rng.uniform(-100.0, 100.0)).collect();
            let y_pred: Vec<f64> = (0..n).map(|_| rng.uniform(-100.0, 100.0)).collect();
            let (_, ss_tot) = mean_and_sstot(&y_true);
            if ss_tot <= 0.0 {
                continue;
            }
            let total = nmse(&y_true, &y_pred).unwrap() + r2(&y_true, &y_pred).unwrap();
            assert!((total - 1.0).abs() < 1e-12, "nmse + r2 = {total}");
        }
    }

    #[test]
    fn metrics_match_brute_force_loops() {
        // Independent re-derivation with plain indexed loops.
        let mut rng = crate::rng::SplitMix64::new(23);
        for _ in 0..1000 {
            let n = 2 + rng.randint(0, 30) as usize;
            let y_true: Vec<f64> = (0..n).map(|_| rng.uniform(-50.0, 50.0)).collect();
            let y_pred: Vec<f64> = (0..n).map(|_| rng.uniform(-50.0, 50.0)).collect();
            let mut acc = 0.0;
            for i in 0..n {
                acc += (y_true[i] - y_pred[i]).powi(2);
            }
            let want_mse = acc / n as f64;
            let mut m = 0.0;
            for i in 0..n {
                m += y_true[i];
            }
            m /= n as f64;
            let mut tot = 0.0;
            for i in 0..n {
                tot += (y_true[i] - m).powi(2);
            }
            if tot <= 0.0 {
                continue;
            }
            let want_r2 = 1.0 - acc / tot;
            let got_mse = mse(&y_true, &y_pred).unwrap();
            let got_r2 = r2(&y_true, &y_pred).unwrap();
            assert!((got_mse - want_mse).abs() <= 1e-12 * want_mse.max(1.0));
            assert!((got_r2 - want_r2).abs() <= 1e-12 * want_r2.abs().max(1.0));
        }
    }

    #[test]
    fn evaluate_perfect_model_on_noiseless_targets() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] + 1.0).collect();
        let model = fit(&x, &y, &RidgeConfig::default()).unwrap();
        let (precise, noisy) = evaluate(&model, &x, &y, &y).unwrap();
        assert!(precise.r2 > 1.0 - 1e-9);
        assert!(noisy.r2 > 1.0 - 1e-9);
        assert_eq!(precise.n_test, 30);
        assert_eq!(precise.target_kind, TargetKind::Precise);
        assert_eq!(noisy.target_kind, TargetKind::Noisy);
    }

    #[test]
    fn evaluate_rejects_misaligned_targets() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let model = fit(&x, &y, &RidgeConfig::default()).unwrap();
        assert!(evaluate(&model, &x, &y[..9], &y).is_err());
    }
}
