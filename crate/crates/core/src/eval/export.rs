use std::io::Write;

use super::metrics::{MetricSummary, PrCurve};
use crate::models::{IndexedCommit, ModelError, PathAttentionModel};
use crate::scalar::Scalar;

/// One commit to export with its label.
pub struct ExportRow<'a> {
    pub commit: &'a IndexedCommit,
    pub label: &'a str,
}

/// CSV `commit_id,label,project,v0..`; the project is the part of the commit
/// id before the first `:`.
pub fn export_code_vectors<S: Scalar, W: Write>(
    model: &PathAttentionModel<S>,
    rows: &[ExportRow<'_>],
    mut out: W,
) -> Result<usize, ModelError> {
    let io = |e: std::io::Error| ModelError::Config(format!("writing vectors: {e}"));
    let mut header = String::from("commit_id,label,project");
    for i in 0..model.dims.code {
        header.push_str(&format!(",v{i}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    for row in rows {
        let v = model.commit_forward(row.commit)?.code_vector;
        let project = row.commit.commit_id.split(':').next().unwrap_or("");
        let mut line = format!("{},{},{}", row.commit.commit_id, row.label, project);
        for x in v {
            line.push(',');
            line.push_str(&x.f64().to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(rows.len())
}

/// `model,precision,recall,f1,accuracy,pr_auc` with `mean±std` cells.
pub fn write_metrics_csv<W: Write>(mut out: W, rows: &[(&str, &MetricSummary)]) -> std::io::Result<()> {
    writeln!(out, "model,precision,recall,f1,accuracy,pr_auc")?;
    for (name, s) in rows {
        let cells: Vec<String> = s.columns().iter().map(|(_, c)| format!("{:.2}±{:.2}", c.mean, c.std)).collect();
        writeln!(out, "{name},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_metrics_table<W: Write>(mut out: W, rows: &[(&str, &MetricSummary)]) -> std::io::Result<()> {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(5).max(5);
    writeln!(
        out,
        "{:width$}  {:>15}  {:>15}  {:>15}  {:>15}  {:>15}",
        "model", "precision", "recall", "f1", "accuracy", "pr_auc"
    )?;
    for (name, s) in rows {
        write!(out, "{name:width$}")?;
        for (_, c) in s.columns() {
            write!(out, "  {:>15}", format!("{:.2} ± {:.2}", c.mean, c.std))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_pr_curve<W: Write>(mut out: W, curve: &PrCurve) -> std::io::Result<()> {
    writeln!(out, "recall,precision")?;
    for (r, p) in curve.recall.iter().zip(&curve.precision) {
        writeln!(out, "{r:.2},{p}")?;
    }
    Ok(())
}
