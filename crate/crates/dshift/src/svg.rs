//! Minimal SVG scatter plots: linear axes, axis labels and one circle per
//! point.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi <= lo {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn scatter(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (x0, x1) = span(points.iter().map(|p| p.0));
    let (y0, y1) = span(points.iter().map(|p| p.1));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>"#);
    let tick = |v: f64| crate::render::text(v);
    let _ = writeln!(out, r#"<text x="{left}" y="{}" font-size="11">{}</text>"#, bottom + 16.0, tick(x0));
    let _ = writeln!(out, r#"<text x="{right}" y="{}" font-size="11" text-anchor="end">{}</text>"#, bottom + 16.0, tick(x1));
    let _ = writeln!(out, r#"<text x="{}" y="{bottom}" font-size="11" text-anchor="end">{}</text>"#, left - 4.0, tick(y0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, left - 4.0, top + 4.0, tick(y1));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for &(x, y) in points {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#, px(x), py(y));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_circle_per_point() {
        let svg = scatter(&[(0.0, 0.0), (1.0, -1.0), (0.5, 1.0)], "emd", "rds");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(scatter(&[], "a", "b").matches("<circle").count(), 0);
        assert!(!scatter(&[(1.0, 1.0)], "a<b", "c").contains("NaN"));
        assert!(scatter(&[], "a<b", "c").contains("a&lt;b"));
    }
}
