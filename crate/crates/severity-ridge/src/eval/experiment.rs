//! Repeated generate/split/fit/evaluate runs with per-iteration seeds.

use rayon::prelude::*;

use crate::cohort::{feature_matrix, generate, GenerationConfig};
use crate::error::Result;
use crate::eval::{evaluate, train_test_split, EvalReport, SplitSpec};
use crate::ridge::{fit, RidgeConfig};

/// Metrics from a single seeded iteration against both target kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOutcome {
    pub seed: u64,
    pub precise: EvalReport,
    pub noisy: EvalReport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricMeans {
    pub mse: f64,
    pub nmse: f64,
    pub r2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub iterations: Vec<IterationOutcome>,
    pub means_precise: MetricMeans,
    pub means_noisy: MetricMeans,
}

fn means_over<F: Fn(&IterationOutcome) -> &EvalReport>(
    iterations: &[IterationOutcome],
    pick: F,
) -> MetricMeans {
    let n = iterations.len() as f64;
    MetricMeans {
        mse: iterations.iter().map(|it| pick(it).mse).sum::<f64>() / n,
        nmse: iterations.iter().map(|it| pick(it).nmse).sum::<f64>() / n,
        r2: iterations.iter().map(|it| pick(it).r2).sum::<f64>() / n,
    }
}

fn run_iteration(n_samples: usize, seed: u64, config: &RidgeConfig) -> Result<IterationOutcome> {
    let cohort = generate(&GenerationConfig::new(n_samples, seed)?);
    let records: Vec<_> = cohort.iter().map(|s| *s.record()).collect();
    let x = feature_matrix(&records);
    let y_precise: Vec<f64> = cohort.iter().map(|s| s.severity_precise()).collect();
    let y_noisy: Vec<f64> = cohort.iter().map(|s| s.severity_noisy()).collect();

    let split = SplitSpec {
        test_fraction: 0.2,
        seed,
    };
    let (train, test) = train_test_split(x.nrows(), &split)?;
    let x_train = x.select_rows(&train);
    let x_test = x.select_rows(&test);
    let y_train: Vec<f64> = train.iter().map(|&i| y_noisy[i]).collect();
    let yp_test: Vec<f64> = test.iter().map(|&i| y_precise[i]).collect();
    let yn_test: Vec<f64> = test.iter().map(|&i| y_noisy[i]).collect();

    // Training always uses the noisy labels; the precise ones exist only to
    // score how well the fit recovers the noise-free signal.
    let model = fit(&x_train, &y_train, config)?;
    let (precise, noisy) = evaluate(&model, &x_test, &yp_test, &yn_test)?;
    Ok(IterationOutcome {
        seed,
        precise,
        noisy,
    })
}

/// Runs `iterations` independent rounds; round k uses seed
/// `base_seed.wrapping_add(k)` for both cohort generation and splitting.
/// Rounds run in parallel but the report order is by round index.
pub fn run_experiment(
    n_samples: usize,
    iterations: usize,
    base_seed: u64,
    config: &RidgeConfig,
) -> Result<ExperimentReport> {
    if iterations == 0 {
        return Err(crate::error::Error::invalid(
            "experiment needs at least 1 iteration",
        ));
    }
    config.validate()?;
    let outcomes: Vec<IterationOutcome> = (0..iterations as u64)
        .into_par_iter()
        .map(|k| run_iteration(n_samples, base_seed.wrapping_add(k), config))
        .collect::<Result<Vec<_>>>()?;
    let means_precise = means_over(&outcomes, |it| &it.precise);
    let means_noisy = means_over(&outcomes, |it| &it.noisy);
    Ok(ExperimentReport {
        iterations: outcomes,
        means_precise,
        means_noisy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_has_one_outcome_per_iteration_with_sequential_seeds() {
        let report = run_experiment(500, 3, 42, &RidgeConfig::default()).unwrap();
        assert_eq!(report.iterations.len(), 3);
        let seeds: Vec<u64> = report.iterations.iter().map(|it| it.seed).collect();
        assert_eq!(seeds, vec![42, 43, 44]);
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = run_experiment(400, 2, 7, &RidgeConfig::default()).unwrap();
        let b = run_experiment(400, 2, 7, &RidgeConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn means_average_the_iterations() {
        let report = run_experiment(300, 4, 11, &RidgeConfig::default()).unwrap();
        let want: f64 = report
            .iterations
            .iter()
            .map(|it| it.precise.r2)
            .sum::<f64>()
            / 4.0;
        assert_eq!(report.means_precise.r2, want);
        let want_noisy: f64 = report.iterations.iter().map(|it| it.noisy.mse).sum::<f64>() / 4.0;
        assert_eq!(report.means_noisy.mse, want_noisy);
    }

    #[test]
    fn cohort_scale_targets_defeat_the_shrinkage_fit() {
        // The virion-squared term puts the target near 1e19 while the
        // default priors keep coefficients near zero, so the fit predicts
        // an almost-constant value and r2 lands near 0 (from below).
        // Regression pin of measured behavior, not a quality target.
        let report = run_experiment(2000, 2, 42, &RidgeConfig::default()).unwrap();
        for it in &report.iterations {
            assert!(
                it.precise.r2.abs() < 0.05,
                "expected near-zero r2, got {}",
                it.precise.r2
            );
            assert!(it.precise.r2 <= 0.0);
        }
    }

    #[test]
    fn rejects_zero_iterations() {
        assert!(run_experiment(100, 0, 1, &RidgeConfig::default()).is_err());
    }
}
