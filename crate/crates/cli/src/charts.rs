//! Minimal SVG bar and line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo.min(0.0), hi.max(0.0)) } else { (0.0, 1.0) };
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
        Self { y_lo: if lo < 0.0 { lo - pad } else { 0.0 }, y_hi: hi + pad }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - (v - self.y_lo) / (self.y_hi - self.y_lo))
    }

    fn open(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let plot_right = WIDTH - RIGHT;
        let bottom = HEIGHT - BOTTOM;
        write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>
<line x1="{LEFT}" y1="{bottom}" x2="{plot_right}" y2="{bottom}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text transform="translate(18,{}) rotate(-90)" text-anchor="middle">{}</text>
"#,
            (LEFT + plot_right) / 2.0,
            escape(title),
            (LEFT + plot_right) / 2.0,
            HEIGHT - 15.0,
            escape(x_label),
            (TOP + bottom) / 2.0,
            escape(y_label),
        )
        .unwrap();
        for i in 0..=5 {
            let v = self.y_lo + (self.y_hi - self.y_lo) * i as f64 / 5.0;
            let y = self.y(v);
            writeln!(
                out,
                r##"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text><line x1="{LEFT}" y1="{y:.1}" x2="{plot_right}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
            )
            .unwrap();
        }
    }

    fn legend(out: &mut String, labels: &[&str]) {
        for (i, label) in labels.iter().enumerate() {
            let y = TOP + 10.0 + 20.0 * i as f64;
            let x = WIDTH - RIGHT + 15.0;
            writeln!(
                out,
                r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                y - 10.0,
                PALETTE[i % PALETTE.len()],
                x + 18.0,
                y,
                escape(label)
            )
            .unwrap();
        }
    }
}

/// One group of bars per category, one bar per series.
pub fn bar_chart(title: &str, y_label: &str, categories: &[String], series: &[(String, Vec<f64>)]) -> String {
    let frame = Frame::new(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut out = String::new();
    frame.open(&mut out, title, "", y_label);
    let group = (WIDTH - RIGHT - LEFT) / categories.len().max(1) as f64;
    let bar = 0.8 * group / series.len().max(1) as f64;
    for (ci, cat) in categories.iter().enumerate() {
        let x0 = LEFT + group * ci as f64 + 0.1 * group;
        for (si, (_, values)) in series.iter().enumerate() {
            let Some(&v) = values.get(ci).filter(|v| v.is_finite()) else { continue };
            let (y, y0) = (frame.y(v), frame.y(0.0));
            writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                x0 + bar * si as f64,
                y.min(y0),
                bar,
                (y - y0).abs(),
                PALETTE[si % PALETTE.len()]
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + group * (ci as f64 + 0.5),
            HEIGHT - BOTTOM + 18.0,
            escape(cat)
        )
        .unwrap();
    }
    Frame::legend(&mut out, &series.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Polylines with point markers; x values are spread linearly.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let frame = Frame::new(series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1)));
    let (x_lo, x_hi) = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (x_lo, x_hi) = if x_lo < x_hi { (x_lo, x_hi) } else if x_lo.is_finite() { (x_lo - 1.0, x_lo + 1.0) } else { (0.0, 1.0) };
    let sx = |x: f64| LEFT + 20.0 + (WIDTH - RIGHT - LEFT - 40.0) * (x - x_lo) / (x_hi - x_lo);
    let mut out = String::new();
    frame.open(&mut out, title, x_label, y_label);
    let mut ticks: Vec<f64> = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0)).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            sx(x),
            HEIGHT - BOTTOM + 18.0,
            x
        )
        .unwrap();
    }
    for (si, (_, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), frame.y(y))).collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" ")).unwrap();
        for &(x, y) in pts {
            writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), frame.y(y)).unwrap();
        }
    }
    Frame::legend(&mut out, &series.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_chart_has_one_rect_per_value() {
        let svg = bar_chart(
            "ratios",
            "ratio",
            &["k=4".into(), "k=8".into()],
            &[("a".into(), vec![0.8, 0.9]), ("b".into(), vec![0.85, f64::NAN])],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        // three bars, two legend swatches, one background
        assert_eq!(svg.matches("<rect").count(), 6);
    }

    #[test]
    fn line_chart_escapes_labels() {
        let svg = line_chart("a<b", "k", "y", &[("s&t".into(), vec![(4.0, 0.1), (8.0, 0.2)])]);
        assert!(svg.contains("a&lt;b") && svg.contains("s&amp;t"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
