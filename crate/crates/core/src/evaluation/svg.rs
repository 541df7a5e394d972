//! Bare-bones SVG charts: axes, polylines, bars and text.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 44.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub(crate) fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    out: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Canvas {
    fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut out = String::new();
        let _ = write!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            W / 2.0,
            escape(title)
        );
        let mut c = Canvas {
            out,
            x_range,
            y_range,
        };
        c.axes(x_label, y_label);
        c
    }

    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        LEFT + (x - lo) / span * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        H - BOTTOM - (y - lo) / span * (H - TOP - BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1) = (self.px(self.x_range.0), self.px(self.x_range.1));
        let (y0, y1) = (self.py(self.y_range.0), self.py(self.y_range.1));
        let _ = writeln!(
            self.out,
            "<polyline points=\"{x0:.1},{y1:.1} {x0:.1},{y0:.1} {x1:.1},{y0:.1}\" fill=\"none\" stroke=\"black\"/>"
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                self.out,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
                self.px(xv),
                y0 + 14.0,
                tick(xv),
                x0 - 4.0,
                self.py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            self.out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
            (x0 + x1) / 2.0,
            H - 8.0,
            escape(x_label),
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, dashed: bool) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed { " stroke-dasharray=\"4 3\"" } else { "" };
        let _ = writeln!(
            self.out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>",
            coords.join(" ")
        );
    }

    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (c, d) = (self.py(y1), self.py(y0));
        let _ = writeln!(
            self.out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\"/>",
            a.min(b),
            c.min(d),
            (b - a).abs(),
            (d - c).abs()
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        );
    }

    fn legend(&mut self, names: &[String]) {
        for (i, name) in names.iter().enumerate() {
            let y = TOP + 14.0 * i as f64 + 6.0;
            let x = W - RIGHT + 10.0;
            let _ = writeln!(
                self.out,
                "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
                y - 9.0,
                color(i)
            );
            self.text(x + 14.0, y, "start", name);
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Named series of `(x, y)` points; a `true` flag draws the series dashed.
pub(crate) type Series = (String, Vec<(f64, f64)>, bool);

pub(crate) fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> String {
    let mut c = Canvas::new(title, x_label, y_label, x_range, y_range);
    for (i, (_, pts, dashed)) in series.iter().enumerate() {
        c.polyline(pts, color(i), *dashed);
    }
    let names: Vec<String> = series.iter().map(|s| s.0.clone()).collect();
    c.legend(&names);
    c.finish()
}

/// Grouped bars: one group per category, one bar per series.
pub(crate) fn grouped_bars(
    title: &str,
    y_label: &str,
    categories: &[String],
    series_names: &[String],
    values: &[Vec<f64>],
    y_max: f64,
) -> String {
    let n = categories.len().max(1) as f64;
    let mut c = Canvas::new(title, "", y_label, (0.0, n), (0.0, y_max));
    let width = 0.8 / series_names.len().max(1) as f64;
    for (g, row) in values.iter().enumerate() {
        for (s, &v) in row.iter().enumerate() {
            let x0 = g as f64 + 0.1 + s as f64 * width;
            c.rect(x0, 0.0, x0 + width, v, color(s));
        }
    }
    for (g, name) in categories.iter().enumerate() {
        let x = c.px(g as f64 + 0.5);
        c.text(x, H - BOTTOM + 26.0, "middle", name);
    }
    c.legend(series_names);
    c.finish()
}

/// Stacked bars: one bar per category, segments per series.
pub(crate) fn stacked_bars(
    title: &str,
    y_label: &str,
    categories: &[String],
    series_names: &[String],
    values: &[Vec<f64>],
) -> String {
    let n = categories.len().max(1) as f64;
    let y_max = values
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(1.0, f64::max);
    let mut c = Canvas::new(title, "true class", y_label, (0.0, n), (0.0, y_max));
    for (g, row) in values.iter().enumerate() {
        let mut base = 0.0;
        for (s, &v) in row.iter().enumerate() {
            if v > 0.0 {
                c.rect(g as f64 + 0.15, base, g as f64 + 0.85, base + v, color(s));
            }
            base += v;
        }
    }
    for (g, name) in categories.iter().enumerate() {
        let x = c.px(g as f64 + 0.5);
        c.text(x, H - BOTTOM + 26.0, "middle", name);
    }
    c.legend(series_names);
    c.finish()
}

/// Count matrix as a shaded grid with the counts written in each cell.
pub(crate) fn heatmap(title: &str, labels: &[String], counts: &[Vec<u64>]) -> String {
    let n = labels.len().max(1) as f64;
    let mut c = Canvas::new(title, "predicted", "true", (0.0, n), (0.0, n));
    let max = counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    for (i, row) in counts.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = 255 - (v as f64 / max * 200.0).round() as u8;
            let fill = format!("rgb({shade},{shade},255)");
            let top = n - i as f64;
            c.rect(j as f64, top - 1.0, j as f64 + 1.0, top, &fill);
            let (x, y) = (c.px(j as f64 + 0.5), c.py(top - 0.5) + 4.0);
            c.text(x, y, "middle", &v.to_string());
        }
    }
    for (g, name) in labels.iter().enumerate() {
        let x = c.px(g as f64 + 0.5);
        c.text(x, H - BOTTOM + 26.0, "middle", name);
        let y = c.py(n - g as f64 - 0.5) + 4.0;
        c.text(W - RIGHT + 6.0, y, "start", name);
    }
    c.finish()
}
