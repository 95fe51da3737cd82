//! Evaluation report output: a human-readable table plus a tab-separated
//! machine record per class.

use std::path::Path;

use crate::error::Result;
use crate::evaluation::EvalReport;
use crate::io::write_atomic;

fn percent(v: f64) -> String {
    format!("{:.0}%", v * 100.0)
}

fn distance(d: Option<f64>) -> String {
    match d {
        Some(d) => format!("{d:.3}"),
        None => "-".to_string(),
    }
}

/// Renders the aligned human-readable table.
pub fn render_table(report: &EvalReport) -> String {
    let mut rows: Vec<[String; 9]> = Vec::new();
    rows.push([
        "Asset".into(),
        "GT".into(),
        "TP".into(),
        "FP".into(),
        "FN".into(),
        "Precision".into(),
        "Recall".into(),
        "F1".into(),
        "Distance (m)".into(),
    ]);
    for m in &report.per_class {
        rows.push([
            m.name.clone(),
            m.ground_truth.to_string(),
            m.true_positives.to_string(),
            m.false_positives.to_string(),
            m.false_negatives.to_string(),
            percent(m.precision),
            percent(m.recall),
            percent(m.f1),
            distance(m.mean_distance),
        ]);
    }
    let a = &report.average;
    rows.push([
        "Average".into(),
        "-".into(),
        "-".into(),
        "-".into(),
        "-".into(),
        percent(a.precision),
        percent(a.recall),
        percent(a.f1),
        distance(a.mean_distance),
    ]);

    let mut widths = [0usize; 9];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

/// Renders the machine-readable record (full-precision floats).
pub fn render_tsv(report: &EvalReport) -> String {
    let mut out = String::from(
        "# panoply/report v1\n# class_id\tname\tgt\ttp\tfp\tfn\tprecision\trecall\tf1\tmean_distance\n",
    );
    for m in &report.per_class {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            m.class_id,
            m.name,
            m.ground_truth,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.precision,
            m.recall,
            m.f1,
            m.mean_distance.map(|d| d.to_string()).unwrap_or_else(|| "-".into())
        ));
    }
    let a = &report.average;
    out.push_str(&format!(
        "-\taverage\t-\t-\t-\t-\t{}\t{}\t{}\t{}\n",
        a.precision,
        a.recall,
        a.f1,
        a.mean_distance.map(|d| d.to_string()).unwrap_or_else(|| "-".into())
    ));
    out
}

pub fn write_report(table_path: &Path, tsv_path: &Path, report: &EvalReport) -> Result<()> {
    write_atomic(table_path, render_table(report).as_bytes())?;
    write_atomic(tsv_path, render_tsv(report).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::ClassMetrics;

    fn sample_report() -> EvalReport {
        EvalReport::from_class_metrics(vec![
            ClassMetrics::from_counts(1, "fire extinguisher", 3, 0, 3, Some(0.377)),
            ClassMetrics::from_counts(6, "smoke detector", 0, 4, 8, None),
        ])
    }

    #[test]
    fn table_contains_rows_and_average() {
        let text = render_table(&sample_report());
        assert!(text.contains("fire extinguisher"));
        assert!(text.contains("smoke detector"));
        assert!(text.contains("Average"));
        assert!(text.contains("67%"));
        assert!(text.contains("0.377"));
        assert!(text.contains('-'));
    }

    #[test]
    fn tsv_has_one_record_per_class_plus_average() {
        let tsv = render_tsv(&sample_report());
        let data_rows: Vec<&str> = tsv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .collect();
        assert_eq!(data_rows.len(), 3);
        assert!(data_rows[2].starts_with("-\taverage"));
    }
}
