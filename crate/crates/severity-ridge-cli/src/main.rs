//! `severity-ridge`: generate synthetic infant severity cohorts, fit and
//! evaluate Bayesian ridge models, run repeated experiments, and triage
//! predicted severities into priority groups.
//!
//! Option precedence, highest first: command-line flag, config-file key
//! (`--config`, TOML, keys named like the long flags), the
//! `SEVERITY_RIDGE_SEED` environment variable (seed only), built-in default.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 I/O error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use severity_ridge::cohort::{
    feature_matrix, generate, read_features, read_targets, write_dataset, GenerationConfig,
    X_FILE, Y_NOISY_FILE, Y_PRECISE_FILE,
};
use severity_ridge::eval::{
    emit_report, evaluate, run_experiment, EvalReport, MSE_CHART_FILE, R2_CHART_FILE, REPORT_FILE,
};
use severity_ridge::ridge::{
    fit, load_model, predict, predict_with_std, save_model, RidgeConfig,
};
use severity_ridge::triage::{build_plan, read_plan, write_plan, DEFAULT_BUCKET_COUNT};
use severity_ridge::Error;

const SEED_ENV: &str = "SEVERITY_RIDGE_SEED";
const DEFAULT_SEED: u64 = 42;
const DEFAULT_GENERATE_OUT: &str = "data";
const DEFAULT_EXPERIMENT_OUT: &str = "report";
const DEFAULT_EXPERIMENT_N: usize = 100_000;
const DEFAULT_ITERATIONS: usize = 10;

#[derive(Parser)]
#[command(
    name = "severity-ridge",
    version,
    about = "Synthetic infant severity cohorts, Bayesian ridge fits, and triage",
    propagate_version = true
)]
struct Cli {
    /// TOML config file whose keys mirror the long flag names; flags win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for generation and experiments [default: 0 = all cores]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RidgeFlags {
    /// Shape of the Gamma hyperprior over the noise precision alpha [default: 2.0]
    #[arg(long, value_name = "REAL")]
    alpha1: Option<f64>,

    /// Rate of the Gamma hyperprior over alpha [default: 0.01]
    #[arg(long, value_name = "REAL")]
    alpha2: Option<f64>,

    /// Shape of the Gamma hyperprior over the coefficient precision lambda [default: 0.001]
    #[arg(long, value_name = "REAL")]
    lambda1: Option<f64>,

    /// Rate of the Gamma hyperprior over lambda [default: 0.01]
    #[arg(long, value_name = "REAL")]
    lambda2: Option<f64>,

    /// Starting alpha [default: 1/Var(y), or 1 for a constant target]
    #[arg(long, value_name = "REAL")]
    alpha_init: Option<f64>,

    /// Starting lambda [default: 1]
    #[arg(long, value_name = "REAL")]
    lambda_init: Option<f64>,

    /// Stop once the L1 change in coefficients drops below this [default: 0.001]
    #[arg(long, value_name = "REAL")]
    tol: Option<f64>,

    /// Cap on hyperparameter update iterations [default: 300]
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,

    /// Fit without an intercept [default: intercept on]
    #[arg(long)]
    no_intercept: bool,

    /// Keep alpha and lambda fixed at their starting values [default: update them]
    #[arg(long)]
    fixed_hyperparams: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a cohort: x_data.csv, y_data_precise.csv, y_data_variance.csv
    Generate {
        /// Number of records to generate [default: 1000000]
        #[arg(long, value_name = "N")]
        n: Option<usize>,

        /// Master seed [default: 42, or SEVERITY_RIDGE_SEED if set]
        #[arg(long, value_name = "SEED")]
        seed: Option<u64>,

        /// Directory for the three CSV files [default: data]
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },

    /// Fit a Bayesian ridge model on a feature CSV and a target CSV
    Fit {
        /// Feature CSV (header: Weight,Age,Virion Count,Gender) [required]
        #[arg(long, value_name = "FILE")]
        x: Option<PathBuf>,

        /// Target CSV (header: Severity) [required]
        #[arg(long, value_name = "FILE")]
        y: Option<PathBuf>,

        /// Where to write the fitted model [required]
        #[arg(long, value_name = "FILE")]
        model_out: Option<PathBuf>,

        #[command(flatten)]
        ridge: RidgeFlags,
    },

    /// Score a saved model against precise and noisy targets
    Evaluate {
        /// Saved model file [required]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,

        /// Feature CSV [required]
        #[arg(long, value_name = "FILE")]
        x: Option<PathBuf>,

        /// Precise target CSV [required]
        #[arg(long, value_name = "FILE")]
        y_precise: Option<PathBuf>,

        /// Noisy target CSV [required]
        #[arg(long, value_name = "FILE")]
        y_noisy: Option<PathBuf>,
    },

    /// Repeat generate/split/fit/evaluate and write report.csv plus charts
    Experiment {
        /// Records per iteration [default: 100000]
        #[arg(long, value_name = "N")]
        n: Option<usize>,

        /// Number of iterations; iteration k uses seed base+k [default: 10]
        #[arg(long, value_name = "N")]
        iterations: Option<usize>,

        /// Base seed [default: 42, or SEVERITY_RIDGE_SEED if set]
        #[arg(long, value_name = "SEED")]
        seed: Option<u64>,

        /// Directory for report.csv, mse.svg, r2.svg [default: report]
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,

        #[command(flatten)]
        ridge: RidgeFlags,
    },

    /// Print predicted severities for a feature CSV, one per line
    Predict {
        /// Saved model file [required]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,

        /// Feature CSV [required]
        #[arg(long, value_name = "FILE")]
        x: Option<PathBuf>,

        /// Also print the predictive standard deviation as value,std
        #[arg(long)]
        with_std: bool,
    },

    /// Predict severities and print a priority label per row
    Triage {
        /// Saved model file [required]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,

        /// Feature CSV [required]
        #[arg(long, value_name = "FILE")]
        x: Option<PathBuf>,

        /// Number of quantile buckets to build [default: 3]
        #[arg(long, value_name = "N", conflicts_with = "plan")]
        k: Option<usize>,

        /// Use thresholds from this plan file instead of building them
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,

        /// Write the plan that was used to this file
        #[arg(long, value_name = "FILE")]
        plan_out: Option<PathBuf>,
    },
}

/// Config-file counterpart of the flags. Every key is optional; unknown keys
/// are rejected so typos fail loudly.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    threads: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    out_dir: Option<String>,
    iterations: Option<usize>,
    x: Option<String>,
    y: Option<String>,
    y_precise: Option<String>,
    y_noisy: Option<String>,
    model: Option<String>,
    model_out: Option<String>,
    plan: Option<String>,
    plan_out: Option<String>,
    k: Option<usize>,
    with_std: Option<bool>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    alpha_init: Option<f64>,
    lambda_init: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    no_intercept: Option<bool>,
    fixed_hyperparams: Option<bool>,
}

fn load_file_config(path: &Path) -> Result<FileConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        column: "config".to_string(),
        reason: e.to_string(),
    })
}

fn resolve_seed(flag: Option<u64>, cfg: Option<u64>) -> Result<u64, Error> {
    if let Some(seed) = flag.or(cfg) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw.trim().parse::<u64>().map_err(|e| {
            Error::Invalid(format!("{SEED_ENV}={raw:?} is not a valid seed: {e}"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Error::Invalid(format!("{SEED_ENV} is not valid unicode")))
        }
    }
}

/// Required path: flag first, then config key; an error naming the flag if
/// neither is set.
fn require_path(flag: Option<PathBuf>, cfg: Option<&String>, flag_name: &str) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.map(PathBuf::from)).ok_or_else(|| {
        Error::Invalid(format!(
            "missing --{flag_name} (or a {} key in the config file)",
            flag_name.replace("--", "")
        ))
    })
}

fn out_dir_or(flag: Option<PathBuf>, cfg: Option<&String>, default: &str) -> PathBuf {
    flag.or_else(|| cfg.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default))
}

fn ridge_config(flags: &RidgeFlags, cfg: &FileConfig) -> RidgeConfig {
    let d = RidgeConfig::default();
    RidgeConfig {
        alpha_1: flags.alpha1.or(cfg.alpha1).unwrap_or(d.alpha_1),
        alpha_2: flags.alpha2.or(cfg.alpha2).unwrap_or(d.alpha_2),
        lambda_1: flags.lambda1.or(cfg.lambda1).unwrap_or(d.lambda_1),
        lambda_2: flags.lambda2.or(cfg.lambda2).unwrap_or(d.lambda_2),
        alpha_init: flags.alpha_init.or(cfg.alpha_init),
        lambda_init: flags.lambda_init.or(cfg.lambda_init),
        tol: flags.tol.or(cfg.tol).unwrap_or(d.tol),
        max_iter: flags.max_iter.or(cfg.max_iter).unwrap_or(d.max_iter),
        fit_intercept: !(flags.no_intercept || cfg.no_intercept.unwrap_or(false)),
        update_hyperparams: !(flags.fixed_hyperparams
            || cfg.fixed_hyperparams.unwrap_or(false)),
    }
}

fn create_dir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Streams bulk output to stdout. A closed pipe (e.g. `| head`) ends the
/// stream quietly instead of failing the run.
fn print_lines(lines: impl Iterator<Item = String>) -> Result<(), Error> {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in lines {
        if let Err(e) = writeln!(out, "{line}") {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                return Ok(());
            }
            return Err(Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            });
        }
    }
    Ok(())
}

fn cmd_generate(n: usize, seed: u64, out_dir: &Path) -> Result<(), Error> {
    create_dir(out_dir)?;
    let samples = generate(&GenerationConfig::new(n, seed)?);
    let x = out_dir.join(X_FILE);
    let yp = out_dir.join(Y_PRECISE_FILE);
    let yn = out_dir.join(Y_NOISY_FILE);
    write_dataset(&samples, &x, &yp, &yn)?;
    println!("generated {n} records with seed {seed}");
    println!("wrote {}, {}, {}", x.display(), yp.display(), yn.display());
    Ok(())
}

fn cmd_fit(
    x_path: &Path,
    y_path: &Path,
    model_out: &Path,
    config: &RidgeConfig,
) -> Result<(), Error> {
    let records = read_features(x_path)?;
    let x = feature_matrix(&records);
    let y = read_targets(y_path)?;
    let model = fit(&x, &y, config)?;
    save_model(&model, model_out)?;
    println!("fitted {} coefficients on {} rows", model.p(), x.nrows());
    println!("coefficients: {:?}", model.coefficients());
    println!("intercept: {}", model.intercept());
    println!(
        "alpha: {:e}  lambda: {:e}  effective dof: {:.3}",
        model.alpha(),
        model.lambda(),
        model.effective_dof()
    );
    println!(
        "iterations: {} (converged: {})",
        model.n_iter(),
        model.converged()
    );
    println!("model written to {}", model_out.display());
    Ok(())
}

fn print_eval_line(report: &EvalReport) {
    println!(
        "{}: n_test={} mse={:.6e} nmse={:.6e} r2={:.6e}",
        report.target_kind, report.n_test, report.mse, report.nmse, report.r2
    );
}

fn cmd_evaluate(
    model_path: &Path,
    x_path: &Path,
    y_precise_path: &Path,
    y_noisy_path: &Path,
) -> Result<(), Error> {
    let model = load_model(model_path)?;
    let records = read_features(x_path)?;
    let x = feature_matrix(&records);
    let y_precise = read_targets(y_precise_path)?;
    let y_noisy = read_targets(y_noisy_path)?;
    let (precise, noisy) = evaluate(&model, &x, &y_precise, &y_noisy)?;
    print_eval_line(&precise);
    print_eval_line(&noisy);
    Ok(())
}

fn cmd_experiment(
    n: usize,
    iterations: usize,
    seed: u64,
    out_dir: &Path,
    config: &RidgeConfig,
) -> Result<(), Error> {
    create_dir(out_dir)?;
    let report = run_experiment(n, iterations, seed, config)?;
    emit_report(&report, out_dir)?;
    println!("{iterations} iterations of n={n} starting at seed {seed}");
    let mp = &report.means_precise;
    println!(
        "mean precise: mse={:.6e} nmse={:.6e} r2={:.6e}",
        mp.mse, mp.nmse, mp.r2
    );
    let mn = &report.means_noisy;
    println!(
        "mean noisy:   mse={:.6e} nmse={:.6e} r2={:.6e}",
        mn.mse, mn.nmse, mn.r2
    );
    println!(
        "wrote {}, {}, {}",
        out_dir.join(REPORT_FILE).display(),
        out_dir.join(MSE_CHART_FILE).display(),
        out_dir.join(R2_CHART_FILE).display()
    );
    Ok(())
}

fn cmd_predict(model_path: &Path, x_path: &Path, with_std: bool) -> Result<(), Error> {
    let model = load_model(model_path)?;
    let records = read_features(x_path)?;
    let x = feature_matrix(&records);
    if with_std {
        let (means, stds) = predict_with_std(&model, &x)?;
        print_lines(
            means
                .iter()
                .zip(&stds)
                .map(|(m, s)| format!("{m},{s}")),
        )
    } else {
        let values = predict(&model, &x)?;
        print_lines(values.iter().map(|v| v.to_string()))
    }
}

fn cmd_triage(
    model_path: &Path,
    x_path: &Path,
    k: usize,
    plan_path: Option<&Path>,
    plan_out: Option<&Path>,
) -> Result<(), Error> {
    let model = load_model(model_path)?;
    let records = read_features(x_path)?;
    let x = feature_matrix(&records);
    let severities = predict(&model, &x)?;
    let plan = match plan_path {
        Some(path) => read_plan(path)?,
        None => {
            let plan = build_plan(&severities, k)?;
            if plan.bucket_count() < k {
                eprintln!(
                    "warning: tied quantiles reduced the bucket count from {k} to {}",
                    plan.bucket_count()
                );
            }
            plan
        }
    };
    if let Some(out) = plan_out {
        write_plan(&plan, out)?;
        eprintln!("plan written to {}", out.display());
    }
    let labels = severities
        .iter()
        .map(|s| plan.assign(*s).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    print_lines(labels.into_iter())
}

fn run_command(command: Command, cfg: &FileConfig) -> Result<(), Error> {
    match command {
        Command::Generate { n, seed, out_dir } => {
            let n = n.or(cfg.n).unwrap_or(GenerationConfig::DEFAULT_N_SAMPLES);
            let seed = resolve_seed(seed, cfg.seed)?;
            let out = out_dir_or(out_dir, cfg.out_dir.as_ref(), DEFAULT_GENERATE_OUT);
            cmd_generate(n, seed, &out)
        }
        Command::Fit {
            x,
            y,
            model_out,
            ridge,
        } => {
            let x = require_path(x, cfg.x.as_ref(), "x")?;
            let y = require_path(y, cfg.y.as_ref(), "y")?;
            let model_out = require_path(model_out, cfg.model_out.as_ref(), "model-out")?;
            cmd_fit(&x, &y, &model_out, &ridge_config(&ridge, cfg))
        }
        Command::Evaluate {
            model,
            x,
            y_precise,
            y_noisy,
        } => {
            let model = require_path(model, cfg.model.as_ref(), "model")?;
            let x = require_path(x, cfg.x.as_ref(), "x")?;
            let y_precise = require_path(y_precise, cfg.y_precise.as_ref(), "y-precise")?;
            let y_noisy = require_path(y_noisy, cfg.y_noisy.as_ref(), "y-noisy")?;
            cmd_evaluate(&model, &x, &y_precise, &y_noisy)
        }
        Command::Experiment {
            n,
            iterations,
            seed,
            out_dir,
            ridge,
        } => {
            let n = n.or(cfg.n).unwrap_or(DEFAULT_EXPERIMENT_N);
            let iterations = iterations.or(cfg.iterations).unwrap_or(DEFAULT_ITERATIONS);
            let seed = resolve_seed(seed, cfg.seed)?;
            let out = out_dir_or(out_dir, cfg.out_dir.as_ref(), DEFAULT_EXPERIMENT_OUT);
            cmd_experiment(n, iterations, seed, &out, &ridge_config(&ridge, cfg))
        }
        Command::Predict { model, x, with_std } => {
            let model = require_path(model, cfg.model.as_ref(), "model")?;
            let x = require_path(x, cfg.x.as_ref(), "x")?;
            let with_std = with_std || cfg.with_std.unwrap_or(false);
            cmd_predict(&model, &x, with_std)
        }
        Command::Triage {
            model,
            x,
            k,
            plan,
            plan_out,
        } => {
            let model = require_path(model, cfg.model.as_ref(), "model")?;
            let x = require_path(x, cfg.x.as_ref(), "x")?;
            let k = k.or(cfg.k).unwrap_or(DEFAULT_BUCKET_COUNT);
            let plan = plan.or_else(|| cfg.plan.as_ref().map(PathBuf::from));
            let plan_out = plan_out.or_else(|| cfg.plan_out.as_ref().map(PathBuf::from));
            cmd_triage(&model, &x, k, plan.as_deref(), plan_out.as_deref())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    let cfg = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot build a {threads}-thread pool: {e}")))?;
    pool.install(|| run_command(cli.command, &cfg))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if benign { 0 } else { 1 });
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_io() { 2 } else { 1 });
        }
    }
}
