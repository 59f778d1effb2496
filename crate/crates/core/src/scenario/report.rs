//! Artifact emission: the bit-stable time-series CSV and the JSON report.

use std::io::Write;
use std::path::Path;

use crate::bounds::EvolutionRecord;
use crate::error::Result;

use super::run::RunOutcome;

/// Column label for an L^p norm, e.g. `lp_4` or `lp_2.5`.
pub fn p_label(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e15 {
        format!("lp_{}", p as i64)
    } else {
        format!("lp_{p}")
    }
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render the time series with header `t,F,G,E,l2,residual,lp_<p>...`,
/// 17 significant digits, fixed column order.
pub fn render_series_csv(record: &EvolutionRecord, residuals: Option<&[f64]>) -> String {
    let mut out = String::new();
    out.push_str("t,F,G,E,l2,residual");
    for &p in &record.p_list {
        out.push(',');
        out.push_str(&p_label(p));
    }
    out.push('\n');
    for j in 0..record.len() {
        let residual = residuals.map_or(f64::NAN, |r| r[j]);
        out.push_str(&sig17(record.times[j]));
        for v in [
            record.f_kinetic[j],
            record.g_hardy[j],
            record.energy[j],
            record.l2[j],
            residual,
        ] {
            out.push(',');
            out.push_str(&sig17(v));
        }
        for col in &record.lp {
            out.push(',');
            out.push_str(&sig17(col[j]));
        }
        out.push('\n');
    }
    out
}

/// Write both artifacts under `dir`; returns (csv_path, report_path).
pub fn write_artifacts(outcome: &RunOutcome, dir: &Path) -> Result<(String, String)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(&outcome.report.config.output.csv);
    let report_path = dir.join(&outcome.report.config.output.report);

    let csv = render_series_csv(&outcome.record, outcome.residuals.as_deref());
    let mut f = std::fs::File::create(&csv_path)?;
    f.write_all(csv.as_bytes())?;

    let json = render_report_json(outcome)?;
    let mut f = std::fs::File::create(&report_path)?;
    f.write_all(json.as_bytes())?;

    Ok(
        (
            csv_path.to_string_lossy().into_owned(),
            report_path.to_string_lossy().into_owned(),
        ),
    )
}

pub fn render_report_json(outcome: &RunOutcome) -> Result<String> {
    let mut json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| crate::error::Error::ConfigParse(e.to_string()))?;
    json.push('\n');
    Ok(json)
}
