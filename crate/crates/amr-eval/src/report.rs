//! Results files, the compact per-set aggregation, and table rendering.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::categories;
use crate::metrics::{EvaluationResult, Role};
use crate::stats::{round_half_up, wilson_interval};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown category id {0:?}")]
    UnknownCategory(String),
    #[error("results file line {line}: {message}")]
    BadResults { line: usize, message: String },
    #[error("set {0} has no main-metric scores")]
    NoMainMetrics(u8),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

/// One row of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRow {
    pub category_id: String,
    pub metric_name: String,
    pub numerator: usize,
    pub denominator: usize,
}

impl ScoredRow {
    pub fn score(&self) -> f64 {
        if self.denominator == 0 {
            0.0
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }

    pub fn is_main(&self) -> bool {
        self.metric_name != "Prerequisites" && self.metric_name != "Sanity check"
    }
}

/// The metric name under which a result is reported: prerequisite and
/// sanity rows get the fixed names the result tables use.
pub fn results_metric_name(result: &EvaluationResult) -> String {
    match result.role {
        Role::Main => result.metric_name.clone(),
        Role::Prerequisite => "Prerequisites".to_string(),
        Role::SanityCheck => "Sanity check".to_string(),
    }
}

/// Results file: tab-separated category_id, metric_name, numerator,
/// denominator, score_percent, ci_low, ci_high.
pub fn write_results(results: &[EvaluationResult]) -> Result<String, ReportError> {
    let mut out = String::new();
    for r in results {
        let (lo, hi) = if r.denominator == 0 {
            (0, 0)
        } else {
            wilson_interval(r.numerator, r.denominator, 0.95)?.percent_bounds()
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.category_id,
            results_metric_name(r),
            r.numerator,
            r.denominator,
            round_half_up(r.score() * 100.0),
            lo,
            hi
        ));
    }
    Ok(out)
}

pub fn read_results(text: &str) -> Result<Vec<ScoredRow>, ReportError> {
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(ReportError::BadResults {
                line: no + 1,
                message: format!("expected at least 4 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| ReportError::BadResults {
                line: no + 1,
                message: format!("bad count {s:?}"),
            })
        };
        rows.push(ScoredRow {
            category_id: fields[0].to_string(),
            metric_name: fields[1].to_string(),
            numerator: parse(fields[2])?,
            denominator: parse(fields[3])?,
        });
    }
    Ok(rows)
}

/// Per-set averages over main-metric scores (excluding prerequisite and
/// sanity-check rows), unrounded until display.
#[derive(Debug, Clone)]
pub struct SetSummary {
    pub set_id: u8,
    /// Raw average per parser, in table order.
    pub scores: Vec<(String, f64)>,
}

pub fn compact_summary(
    inputs: &[(String, Vec<ScoredRow>)],
) -> Result<Vec<SetSummary>, ReportError> {
    let mut sets_present: Vec<u8> = Vec::new();
    let mut per_set: BTreeMap<u8, Vec<(String, f64)>> = BTreeMap::new();
    for (parser, rows) in inputs {
        let mut by_set: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
        let mut sets_with_rows: BTreeMap<u8, usize> = BTreeMap::new();
        for row in rows {
            let info = categories::lookup(&row.category_id)
                .ok_or_else(|| ReportError::UnknownCategory(row.category_id.clone()))?;
            *sets_with_rows.entry(info.set).or_insert(0) += 1;
            if row.is_main() {
                by_set.entry(info.set).or_default().push(row.score() * 100.0);
            }
        }
        for (&set, &_count) in &sets_with_rows {
            if !by_set.contains_key(&set) {
                return Err(ReportError::NoMainMetrics(set));
            }
        }
        for (set, scores) in by_set {
            if !sets_present.contains(&set) {
                sets_present.push(set);
            }
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            per_set.entry(set).or_default().push((parser.clone(), mean));
        }
    }
    sets_present.sort_unstable();
    Ok(sets_present
        .into_iter()
        .map(|set_id| SetSummary {
            set_id,
            scores: per_set.remove(&set_id).unwrap_or_default(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Tsv,
    Markdown,
    Latex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    Full,
    Compact,
}

/// Renders results for one or more parsers. The full style mirrors the
/// per-category tables (score cells with Wilson bounds and a `#` column);
/// the compact style mirrors the per-set summary.
pub fn render_tables(
    inputs: &[(String, Vec<ScoredRow>)],
    format: TableFormat,
    style: TableStyle,
) -> Result<String, ReportError> {
    match style {
        TableStyle::Full => render_full(inputs, format),
        TableStyle::Compact => render_compact(inputs, format),
    }
}

fn score_cell(row: &ScoredRow) -> Result<String, ReportError> {
    if row.denominator == 0 {
        return Ok("-".to_string());
    }
    let (lo, hi) = wilson_interval(row.numerator, row.denominator, 0.95)?.percent_bounds();
    Ok(format!(
        "{:02} [{:02},{:02}]",
        round_half_up(row.score() * 100.0),
        lo,
        hi
    ))
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn render_full(
    inputs: &[(String, Vec<ScoredRow>)],
    format: TableFormat,
) -> Result<String, ReportError> {
    // Collect rows keyed by (set, category order, metric), with one score
    // column per parser.
    let mut keys: Vec<(u8, usize, String, String)> = Vec::new();
    let mut cells: BTreeMap<(u8, usize, String, String), Vec<String>> = BTreeMap::new();
    let mut denoms: BTreeMap<(u8, usize, String, String), usize> = BTreeMap::new();
    for (p_idx, (_, rows)) in inputs.iter().enumerate() {
        for row in rows {
            let info = categories::lookup(&row.category_id)
                .ok_or_else(|| ReportError::UnknownCategory(row.category_id.clone()))?;
            let order = categories::CATEGORIES
                .iter()
                .position(|c| c.id == info.id)
                .unwrap_or(usize::MAX);
            let key = (
                info.set,
                order,
                info.display.to_string(),
                row.metric_name.clone(),
            );
            if !cells.contains_key(&key) {
                keys.push(key.clone());
                cells.insert(key.clone(), vec!["-".to_string(); inputs.len()]);
            }
            cells.get_mut(&key).unwrap()[p_idx] = score_cell(row)?;
            denoms.insert(key, row.denominator);
        }
    }
    keys.sort_by(|a, b| {
        let rank = |k: &(u8, usize, String, String)| {
            let role_rank = match k.3.as_str() {
                "Prerequisites" => 1,
                "Sanity check" => 2,
                _ => 0,
            };
            (k.0, k.1, role_rank, k.3.clone())
        };
        rank(a).cmp(&rank(b))
    });

    let mut header = vec!["Set".to_string(), "Category".to_string(), "Metric".to_string()];
    header.extend(inputs.iter().map(|(p, _)| p.clone()));
    header.push("#".to_string());
    let mut rows = Vec::new();
    let mut last_set = 0u8;
    for key in keys {
        let set_label = if key.0 != last_set {
            last_set = key.0;
            key.0.to_string()
        } else {
            String::new()
        };
        let mut out_row = vec![set_label, key.2.clone(), key.3.clone()];
        out_row.extend(cells[&key].iter().cloned());
        out_row.push(denoms[&key].to_string());
        rows.push(out_row);
    }
    Ok(emit(&Table { header, rows }, format))
}

fn render_compact(
    inputs: &[(String, Vec<ScoredRow>)],
    format: TableFormat,
) -> Result<String, ReportError> {
    let summaries = compact_summary(inputs)?;
    let mut header = vec!["Set".to_string()];
    header.extend(inputs.iter().map(|(p, _)| p.clone()));
    let mut rows = Vec::new();
    for summary in &summaries {
        let mut row = vec![format!(
            "{}. {}",
            summary.set_id,
            categories::set_display(summary.set_id)
        )];
        for (parser, _) in inputs {
            let cell = summary
                .scores
                .iter()
                .find(|(p, _)| p == parser)
                .map(|(_, raw)| format!("{:02}", round_half_up(*raw)))
                .unwrap_or_else(|| "-".to_string());
            row.push(cell);
        }
        rows.push(row);
    }
    Ok(emit(&Table { header, rows }, format))
}

fn emit(table: &Table, format: TableFormat) -> String {
    match format {
        TableFormat::Tsv => {
            let mut out = table.header.join("\t");
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
            out
        }
        TableFormat::Markdown => {
            let mut out = format!("| {} |\n", table.header.join(" | "));
            out.push_str(&format!(
                "|{}\n",
                " --- |".repeat(table.header.len())
            ));
            for row in &table.rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
            out
        }
        TableFormat::Latex => {
            let cols = "l".repeat(table.header.len());
            let escape = |s: &str| s.replace('#', "\\#").replace('%', "\\%").replace('&', "\\&");
            let mut out = format!("\\begin{{tabular}}{{{cols}}}\n");
            out.push_str(&format!(
                "{} \\\\\n\\hline\n",
                table
                    .header
                    .iter()
                    .map(|h| escape(h))
                    .collect::<Vec<_>>()
                    .join(" & ")
            ));
            for row in &table.rows {
                out.push_str(&format!(
                    "{} \\\\\n",
                    row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(" & ")
                ));
            }
            out.push_str("\\end{tabular}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(category: &str, metric: &str, num: usize, den: usize) -> ScoredRow {
        ScoredRow {
            category_id: category.to_string(),
            metric_name: metric.to_string(),
            numerator: num,
            denominator: den,
        }
    }

    #[test]
    fn full_table_formats_paper_style_cells() {
        let inputs = vec![(
            "parser".to_string(),
            vec![
                row("pragmatic_coreference", "Edge recall", 14, 36),
                row("pragmatic_coreference", "Prerequisites", 18, 36),
            ],
        )];
        let text = render_tables(&inputs, TableFormat::Tsv, TableStyle::Full).unwrap();
        assert!(text.contains("39 [25,55]"), "{text}");
        assert!(text.contains("50 [34,66]"), "{text}");
        assert!(text.lines().nth(1).unwrap().ends_with("\t36"));
    }

    #[test]
    fn empty_results_render_header_only() {
        let inputs = vec![("p".to_string(), vec![])];
        let text = render_tables(&inputs, TableFormat::Tsv, TableStyle::Full).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn compact_summary_uses_unrounded_means() {
        // Set 1: {39, 32} -> 35.5 -> 36.
        let inputs = vec![(
            "bart".to_string(),
            vec![
                row("pragmatic_coreference", "Edge recall", 39, 100),
                row("pragmatic_coreference", "Edge recall (winograd)", 32, 100),
                row("pragmatic_coreference", "Prerequisites", 61, 100),
            ],
        )];
        let summaries = compact_summary(&inputs).unwrap();
        assert_eq!(summaries.len(), 1);
        assert_eq!(summaries[0].set_id, 1);
        let raw = summaries[0].scores[0].1;
        assert!((raw - 35.5).abs() < 1e-9);
        assert_eq!(round_half_up(raw), 36);
    }

    #[test]
    fn prereq_only_set_is_an_error() {
        let inputs = vec![(
            "p".to_string(),
            vec![row("pragmatic_coreference", "Prerequisites", 18, 36)],
        )];
        assert!(matches!(
            compact_summary(&inputs),
            Err(ReportError::NoMainMetrics(1))
        ));
    }

    #[test]
    fn latex_output_is_a_tabular() {
        let inputs = vec![(
            "p".to_string(),
            vec![row("cp_recursion", "Exact match", 58, 100)],
        )];
        let text = render_tables(&inputs, TableFormat::Latex, TableStyle::Full).unwrap();
        assert!(text.starts_with("\\begin{tabular}"));
        assert!(text.trim_end().ends_with("\\end{tabular}"));
        assert_eq!(text.matches('&').count() / text.lines().filter(|l| l.contains('&')).count(), 5);
    }

    #[test]
    fn results_file_round_trip() {
        use crate::metrics::{EvaluationResult, Role};
        let results = vec![EvaluationResult {
            category_id: "cp_recursion".into(),
            metric_name: "Exact match".into(),
            role: Role::Main,
            outcomes: vec![],
            numerator: 58,
            denominator: 100,
        }];
        let text = write_results(&results).unwrap();
        let rows = read_results(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].numerator, 58);
        assert!(text.contains("\t58\t100\t58\t48\t67"));
    }
}
