//! Minimal SVG line charts with a log-scaled x axis.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 64.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];
const DASHES: [&str; 3] = ["", "6,4", "2,3"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y)` pairs; x must be positive. Non-finite y values are skipped.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Fixed-precision coordinate so output bytes do not depend on float noise.
fn c(v: f64) -> String {
    format!("{v:.2}")
}

/// Roughly five round tick values covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| *x > 0.0 && x.is_finite() && y.is_finite())
            .collect();
        let (mut x_lo, mut x_hi) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
                (a.min(x.log10()), b.max(x.log10()))
            });
        let (mut y_lo, mut y_hi) = pts
            .iter()
            .fold((0.0f64, f64::NEG_INFINITY), |(a, b), (_, y)| {
                (a.min(*y), b.max(*y))
            });
        if pts.is_empty() {
            (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_hi - x_lo < 1e-9 {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if !(y_hi > y_lo) {
            y_hi = y_lo + 1.0;
        }
        let pad = 0.05 * (y_hi - y_lo);
        y_hi += pad;
        if y_lo < 0.0 {
            y_lo -= pad;
        }

        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |lx: f64| LEFT + (lx - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            c(LEFT + plot_w / 2.0),
            escape(&self.title)
        );

        // grid and ticks
        let _ = writeln!(s, r##"<g stroke="#e0e0e0" stroke-width="1">"##);
        let decades: Vec<i32> = (x_lo.ceil() as i32..=x_hi.floor() as i32).collect();
        for d in &decades {
            let x = sx(*d as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
                c(x),
                c(TOP),
                c(TOP + plot_h)
            );
        }
        let yt = linear_ticks(y_lo, y_hi);
        for y in &yt {
            let _ = writeln!(
                s,
                r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}"/>"#,
                c(sy(*y)),
                c(LEFT),
                c(LEFT + plot_w)
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            c(LEFT),
            c(TOP),
            c(plot_w),
            c(plot_h)
        );
        for d in &decades {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">1e{}</text>"#,
                c(sx(*d as f64)),
                c(TOP + plot_h + 18.0),
                d
            );
        }
        for y in &yt {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                c(LEFT - 6.0),
                c(sy(*y) + 4.0),
                escape(&tick_label(*y))
            );
        }
        if y_lo < 0.0 {
            let _ = writeln!(
                s,
                r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}" stroke="black" stroke-dasharray="3,3"/>"#,
                c(sy(0.0)),
                c(LEFT),
                c(LEFT + plot_w)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            c(LEFT + plot_w / 2.0),
            c(HEIGHT - 20.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            c(TOP + plot_h / 2.0),
            escape(&self.y_label)
        );

        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let dash = DASHES[(k / COLORS.len()) % DASHES.len()];
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            let coords: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| *x > 0.0 && y.is_finite())
                .map(|(x, y)| format!("{},{}", c(sx(x.log10())), c(sy(*y))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} points="{}"/>"#,
                coords.join(" ")
            );
            for p in &coords {
                let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
            }
            let ly = TOP + 10.0 + 20.0 * k as f64;
            let lx = LEFT + plot_w + 16.0;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
                c(lx),
                c(ly),
                c(lx + 24.0),
                c(ly)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                c(lx + 30.0),
                c(ly + 4.0),
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> LineChart {
        LineChart {
            title: "excess <0-1> & risk".into(),
            x_label: "n".into(),
            y_label: "risk".into(),
            series: vec![
                Series {
                    label: "a".into(),
                    points: vec![(100.0, 0.1), (1000.0, 0.05), (10000.0, 0.01)],
                },
                Series {
                    label: "b \"q\"".into(),
                    points: vec![(100.0, -0.01), (10000.0, f64::NAN)],
                },
            ],
        }
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape(r#"<a & "b">"#), "&lt;a &amp; &quot;b&quot;&gt;");
        let svg = chart().render();
        assert!(svg.contains("excess &lt;0-1&gt; &amp; risk"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn deterministic_and_one_polyline_per_series() {
        let a = chart().render();
        assert_eq!(a, chart().render());
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains(">1e2<") && a.contains(">1e4<"));
    }

    #[test]
    fn empty_chart_renders() {
        let svg = LineChart {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            series: vec![],
        }
        .render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn ticks_cover_range() {
        let t = linear_ticks(0.0, 0.23);
        assert!(t.len() >= 3 && t.len() <= 7);
        assert_eq!(t[0], 0.0);
        assert_eq!(tick_label(0.05), "0.05");
        assert_eq!(tick_label(2.5e-5), "2.5e-5");
    }
}
