//! Minimal SVG charts: per-feature ICC bars and a selected-feature matrix.

use std::fmt::Write;

use voiforge_core::robust::{Category, IccReport};

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn colour(c: Category) -> &'static str {
    match c {
        Category::Shape => "#1b9e77",
        Category::Firstorder => "#d95f02",
        Category::Texture => "#7570b3",
    }
}

/// One bar per feature; undefined ICCs are drawn as grey ticks.
pub fn icc_bars(report: &IccReport, threshold: f64) -> String {
    let bar = 8.0;
    let (left, top, h) = (50.0, 30.0, 200.0);
    let n = report.entries.len() as f64;
    let w = left + n * bar + 20.0;
    let total_h = top + h + 170.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{total_h}" font-family="sans-serif" font-size="9">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="16" font-size="12">ICC per feature: {}</text>"#, escape(&report.modification));
    let ypos = |v: f64| top + h * (1.0 - v.clamp(0.0, 1.0));
    for t in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#, left - 4.0, ypos(t) + 3.0);
    }
    let _ = writeln!(s, r##"<line x1="{left}" x2="{}" y1="{y}" y2="{y}" stroke="#c00" stroke-dasharray="4 2"/>"##, left + n * bar, y = ypos(threshold));
    for (i, e) in report.entries.iter().enumerate() {
        let x = left + i as f64 * bar;
        if e.icc.is_nan() {
            let _ = writeln!(s, r##"<rect x="{x}" y="{}" width="{}" height="2" fill="#999"/>"##, top + h - 2.0, bar - 1.0);
        } else {
            let y = ypos(e.icc);
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{}" height="{}" fill="{}"><title>{} {}</title></rect>"#,
                bar - 1.0,
                top + h - y,
                colour(e.category),
                escape(&e.feature),
                e.icc
            );
        }
        let _ = writeln!(
            s,
            r#"<text transform="translate({},{}) rotate(-90)" text-anchor="end" font-size="6">{}</text>"#,
            x + bar * 0.7,
            top + h + 4.0,
            escape(&e.feature)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Rows are labelled feature sets, columns the union of their features.
pub fn common_matrix(rows: &[(String, Vec<String>)]) -> String {
    let mut cols: Vec<&String> = rows.iter().flat_map(|r| r.1.iter()).collect();
    cols.sort();
    cols.dedup();
    let cell = 14.0;
    let (left, top) = (90.0, 180.0);
    let w = left + cols.len() as f64 * cell + 20.0;
    let h = top + rows.len() as f64 * cell + 20.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="9">"#);
    for (j, c) in cols.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text transform="translate({},{}) rotate(-90)">{}</text>"#,
            left + j as f64 * cell + cell * 0.7,
            top - 4.0,
            escape(c)
        );
    }
    for (i, (label, feats)) in rows.iter().enumerate() {
        let y = top + i as f64 * cell;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 4.0, y + cell * 0.75, escape(label));
        for (j, c) in cols.iter().enumerate() {
            let fill = if feats.contains(c) { "#08519c" } else { "#eee" };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{}" height="{}" fill="{fill}"/>"#,
                left + j as f64 * cell,
                cell - 1.0,
                cell - 1.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
