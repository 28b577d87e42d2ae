//! Text-table rendering. Every renderer is a pure function of persisted
//! JSON data so `report` can regenerate tables byte-identically.

use serde::{Deserialize, Serialize};

/// Persisted summary of one `cv` run: rows are preprocessing configs,
/// columns classifiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvSummary {
    pub method: u8,
    pub cv_mode: String,
    pub folds: usize,
    pub seed: u64,
    pub standardize: bool,
    pub tuned: bool,
    pub classifiers: Vec<String>,
    pub rows: Vec<CvSummaryRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvSummaryRow {
    pub f_max: f64,
    pub w_l: f64,
    pub o: f64,
    /// Mean weighted F1 per classifier, parallel to `classifiers`.
    pub scores: Vec<f64>,
    /// Per-cell metrics report file names, parallel to `classifiers`.
    pub reports: Vec<String>,
}

/// Compact float formatting: integers lose the trailing `.0`.
pub fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub fn render_cv_table(summary: &CvSummary) -> String {
    let mut out = format!(
        "Cross-validation weighted F1 (method {}, {}-wise {}-fold, seed {})\n\n",
        summary.method, summary.cv_mode, summary.folds, summary.seed
    );

    let mut headers = vec!["f_max".to_string(), "W_l".to_string(), "O".to_string()];
    headers.extend(summary.classifiers.iter().cloned());
    let mut table: Vec<Vec<String>> = vec![headers];
    for row in &summary.rows {
        let mut cells = vec![fmt_num(row.f_max), fmt_num(row.w_l), fmt_num(row.o)];
        cells.extend(row.scores.iter().map(|s| format!("{s:.4}")));
        table.push(cells);
    }

    let cols = table[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    out
}
