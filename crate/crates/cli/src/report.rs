use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use swarmselect::evaluation::format_percent;
use swarmselect::pipeline::{compare_results, results_json, CombinationResult};
use swarmselect::{RankMethod, RankedFeatures};

use crate::config::Format;
use crate::Failure;

pub const RESULTS_COLUMNS: [&str; 26] = [
    "ranker",
    "selector",
    "classifier",
    "accuracy",
    "recall_autism",
    "recall_typical",
    "precision_autism",
    "precision_typical",
    "f1_autism",
    "f1_typical",
    "n_selected",
    "n_features",
    "feature_reduction",
    "fitness",
    "validation_accuracy",
    "cv_mean",
    "cv_std",
    "tp",
    "fp",
    "tn",
    "fn",
    "evaluations",
    "attempts",
    "seed",
    "selected_mask",
    "error",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

fn write(out_dir: &Path, name: &str, body: &[u8], manifest: &mut Manifest) -> Result<(), Failure> {
    let path = out_dir.join(name);
    fs::write(&path, body).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))?;
    manifest.files.push(ManifestEntry { file: name.to_owned(), bytes: body.len() as u64 });
    Ok(())
}

/// Write the requested report files into `out_dir` and list them.
pub fn emit_report(results: &[CombinationResult], formats: &[Format], out_dir: &Path) -> Result<Manifest, Failure> {
    if results.is_empty() {
        return Err(Failure::Usage("no results to report".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Failure::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut manifest = Manifest::default();
    if formats.contains(&Format::Json) {
        write(out_dir, "results.json", results_json(results)?.as_bytes(), &mut manifest)?;
    }
    if formats.contains(&Format::Csv) {
        write(out_dir, "results.csv", &results_csv(results)?, &mut manifest)?;
        write(out_dir, "summary.csv", &summary_csv(results)?, &mut manifest)?;
    }
    if formats.contains(&Format::Svg) {
        write(out_dir, "accuracy.svg", accuracy_svg(results).as_bytes(), &mut manifest)?;
    }
    Ok(manifest)
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::Internal(e.to_string()))
}

/// One row per combination in grid order; columns as [`RESULTS_COLUMNS`].
pub fn results_csv(results: &[CombinationResult]) -> Result<Vec<u8>, Failure> {
    let mut rows = vec![RESULTS_COLUMNS.iter().map(|s| s.to_string()).collect()];
    for r in results {
        let mut row = vec![r.ranker.name().to_owned(), r.selector.name().to_owned(), r.classifier.name().to_owned()];
        match &r.outcome {
            Some(o) => {
                let m = &o.test_metrics;
                let c = &o.test_confusion;
                row.extend(
                    [m.accuracy, m.recall_autism, m.recall_typical, m.precision_autism, m.precision_typical, m.f1_autism, m.f1_typical]
                        .map(|v| v.to_string()),
                );
                row.extend([o.n_selected.to_string(), o.n_features.to_string()]);
                row.extend([o.feature_reduction, o.fitness, o.validation_accuracy, o.cv.mean, o.cv.std].map(|v| v.to_string()));
                row.extend([c.tp, c.fp, c.tn, c.fn_, o.evaluations].map(|v| v.to_string()));
                row.extend([r.attempts.to_string(), r.seed.to_string(), o.selected_mask.clone(), String::new()]);
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 19));
                row.extend([r.attempts.to_string(), r.seed.to_string(), String::new(), r.error.clone().unwrap_or_default()]);
            }
        }
        rows.push(row);
    }
    csv_bytes(rows)
}

/// Successful combinations, best first: label, accuracy %, selected
/// count, feature reduction %.
pub fn summary_csv(results: &[CombinationResult]) -> Result<Vec<u8>, Failure> {
    let mut ok: Vec<&CombinationResult> = results.iter().filter(|r| r.is_ok()).collect();
    ok.sort_by(|a, b| compare_results(a, b));
    let mut rows = vec![["algorithm", "accuracy_pct", "n_selected", "feature_reduction_pct"].map(String::from).to_vec()];
    for r in ok {
        let o = r.outcome.as_ref().expect("filtered");
        rows.push(vec![
            format!("{}+{}+{}", r.ranker.table_label(), r.selector.table_label(), r.classifier.table_label()),
            format_percent(o.test_accuracy(), 3),
            o.n_selected.to_string(),
            format_percent(o.feature_reduction, 2),
        ]);
    }
    csv_bytes(rows)
}

const PALETTE: [&str; 3] = ["#4e79a7", "#f28e2b", "#59a14f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bar chart of test accuracy: one group per ranker, one bar per
/// (selector, classifier), coloured by classifier.
pub fn accuracy_svg(results: &[CombinationResult]) -> String {
    let mut rankers: Vec<RankMethod> = results.iter().map(|r| r.ranker).collect();
    rankers.dedup();
    let mut classifiers: Vec<_> = results.iter().map(|r| r.classifier).collect();
    classifiers.sort();
    classifiers.dedup();

    let (bar, gap, group_gap, plot_h, left, top) = (10.0, 2.0, 24.0, 240.0, 48.0, 30.0);
    let mut x = left + group_gap / 2.0;
    let mut bars = String::new();
    let mut labels = String::new();
    for &ranker in &rankers {
        let group: Vec<&CombinationResult> = results.iter().filter(|r| r.ranker == ranker).collect();
        let start = x;
        for r in &group {
            let acc = r.outcome.as_ref().map_or(0.0, |o| o.test_accuracy());
            let h = acc * plot_h;
            let colour = PALETTE[classifiers.iter().position(|&c| c == r.classifier).unwrap_or(0) % PALETTE.len()];
            let shown = r.outcome.as_ref().map_or("failed".to_owned(), |o| format!("{:.4}", o.test_accuracy()));
            let _ = writeln!(
                bars,
                r#"<rect x="{x:.1}" y="{:.1}" width="{bar}" height="{h:.1}" fill="{colour}" data-value="{shown}"><title>{}: {shown}</title></rect>"#,
                top + plot_h - h,
                escape(&r.name()),
            );
            x += bar + gap;
        }
        let _ = writeln!(
            labels,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            (start + x - gap) / 2.0,
            top + plot_h + 18.0,
            ranker.table_label()
        );
        x += group_gap;
    }
    let width = x + 120.0;
    let height = top + plot_h + 40.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#);
    let _ = writeln!(svg, r#"<text x="{left}" y="18" font-size="14">Test accuracy by combination</text>"#);
    for tick in 0..=4 {
        let v = f64::from(tick) / 4.0;
        let y = top + plot_h - v * plot_h;
        let _ = writeln!(svg, r##"<line x1="{left}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{v:.2}</text>"##, x, left - 4.0, y + 3.0);
    }
    svg.push_str(&bars);
    svg.push_str(&labels);
    for (k, c) in classifiers.iter().enumerate() {
        let y = top + 14.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{y:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            x + 10.0,
            PALETTE[k % PALETTE.len()],
            x + 24.0,
            y + 9.0,
            c.table_label()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of ranking scores: one row per method, one cell per feature,
/// shaded by score relative to the method's largest.
pub fn ranking_heatmap(names: &[String], rankings: &[RankedFeatures]) -> String {
    let (cell, left, top) = (14.0, 70.0, 24.0);
    let width = left + cell * names.len() as f64 + 10.0;
    let height = top + cell * rankings.len() as f64 + 60.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#);
    let _ = writeln!(svg, r#"<text x="{left}" y="16" font-size="13">Feature ranking scores</text>"#);
    for (row, r) in rankings.iter().enumerate() {
        let y = top + cell * row as f64;
        let max = r.scores.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#, left - 4.0, y + cell - 3.0, r.method.table_label());
        for (col, &s) in r.scores.iter().enumerate() {
            let t = if max > 0.0 { (s.abs() / max).clamp(0.0, 1.0) } else { 0.0 };
            let shade = (255.0 - 200.0 * t).round() as u8;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" data-value="{s:.6}"><title>{} {}: {s:.6}</title></rect>"#,
                left + cell * col as f64,
                r.method.name(),
                escape(&names[col]),
            );
        }
    }
    let y = top + cell * rankings.len() as f64 + 10.0;
    for (col, name) in names.iter().enumerate() {
        let x = left + cell * col as f64 + cell / 2.0;
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{y:.1}" font-size="9" transform="rotate(60 {x:.1} {y:.1})">{}</text>"#, escape(name));
    }
    svg.push_str("</svg>\n");
    svg
}
