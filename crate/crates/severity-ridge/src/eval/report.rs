//! Report emission: a per-iteration metrics CSV plus two SVG bar charts.

use std::path::Path;

use crate::error::Result;
use crate::eval::experiment::ExperimentReport;
use crate::eval::svg::BarChart;
use crate::fsutil::write_atomic;

pub const REPORT_FILE: &str = "report.csv";
pub const MSE_CHART_FILE: &str = "mse.svg";
pub const R2_CHART_FILE: &str = "r2.svg";
pub const REPORT_CSV_HEADER: &str =
    "seed,mse_precise,nmse_precise,r2_precise,mse_noisy,nmse_noisy,r2_noisy";

fn csv_metrics(precise: (f64, f64, f64), noisy: (f64, f64, f64)) -> String {
    format!(
        "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
        precise.0, precise.1, precise.2, noisy.0, noisy.1, noisy.2
    )
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_CSV_HEADER);
    out.push('\n');
    for it in &report.iterations {
        out.push_str(&format!(
            "{},{}\n",
            it.seed,
            csv_metrics(
                (it.precise.mse, it.precise.nmse, it.precise.r2),
                (it.noisy.mse, it.noisy.nmse, it.noisy.r2),
            )
        ));
    }
    let mp = &report.means_precise;
    let mn = &report.means_noisy;
    out.push_str(&format!(
        "mean,{}\n",
        csv_metrics((mp.mse, mp.nmse, mp.r2), (mn.mse, mn.nmse, mn.r2))
    ));
    out
}

fn chart(report: &ExperimentReport, title: &str, y_label: &str, pick: fn(&super::EvalReport) -> f64) -> BarChart {
    BarChart {
        title: title.to_string(),
        x_label: "iteration seed".to_string(),
        y_label: y_label.to_string(),
        bars: report
            .iterations
            .iter()
            .map(|it| (it.seed.to_string(), pick(&it.precise)))
            .collect(),
    }
}

/// Writes `report.csv`, `mse.svg`, and `r2.svg` into `out_dir`. The charts
/// show the precise-target metrics, one bar per iteration; the CSV carries
/// both target kinds plus a final row of means.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    write_atomic(&out_dir.join(REPORT_FILE), render_csv(report).as_bytes())?;
    let mse_chart = chart(
        report,
        "Mean squared error on test data (precise targets)",
        "MSE",
        |r| r.mse,
    );
    write_atomic(&out_dir.join(MSE_CHART_FILE), mse_chart.render().as_bytes())?;
    let r2_chart = chart(
        report,
        "Coefficient of determination on test data (precise targets)",
        "R2",
        |r| r.r2,
    );
    write_atomic(&out_dir.join(R2_CHART_FILE), r2_chart.render().as_bytes())?;
    Ok(())
}
