//! Static figures written as plain SVG elements.

use std::fmt::Write as _;

use causal_averaging_core::discovery::Method;

use crate::harness::{CellSummary, Factor, RunRecord, Trend};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Canvas {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut c = Canvas {
            body: String::new(),
            x,
            y,
        };
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = write!(
            c.body,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-size="16">{}</text><line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/><text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text><text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
            WIDTH / 2.0,
            escape(title),
            (l + r) / 2.0,
            HEIGHT - 15.0,
            escape(xlabel),
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(ylabel),
        );
        for i in 0..=4 {
            let v = y.0 + (y.1 - y.0) * i as f64 / 4.0;
            let py = c.py(v);
            let _ = write!(
                c.body,
                r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
                l - 4.0,
                l - 6.0,
                py + 4.0,
                tick_label(v),
            );
        }
        c
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn x_ticks(&mut self, ticks: &[(f64, String)]) {
        let b = HEIGHT - BOTTOM;
        for (v, label) in ticks {
            let px = self.px(*v);
            let _ = write!(
                self.body,
                r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                b + 4.0,
                b + 18.0,
                escape(label),
            );
        }
    }

    fn zero_line(&mut self) {
        if self.y.0 < 0.0 && self.y.1 > 0.0 {
            let py = self.py(0.0);
            let _ = write!(
                self.body,
                r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
                WIDTH - RIGHT
            );
        }
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (c, d) = (self.py(y0), self.py(y1));
        let _ = write!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="0.75"/>"#,
            a.min(b),
            c.min(d),
            (b - a).abs(),
            (d - c).abs()
        );
    }

    fn segment(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, stroke: &str, width: f64) {
        let _ = write!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"/>"#,
            self.px(x0),
            self.py(y0),
            self.px(x1),
            self.py(y1)
        );
    }

    fn dot(&mut self, x: f64, y: f64, fill: &str) {
        let _ = write!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{fill}" fill-opacity="0.4"/>"#,
            self.px(x),
            self.py(y)
        );
    }

    fn legend(&mut self, entries: &[(String, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = TOP + 8.0 + 18.0 * i as f64;
            let x = WIDTH - RIGHT - 150.0;
            let _ = write!(
                self.body,
                r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
                y - 10.0,
                x + 18.0,
                y,
                escape(label)
            );
        }
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">{}</svg>\n",
            self.body
        )
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn methods_in(records: &[RunRecord]) -> Vec<Method> {
    let mut out = Vec::new();
    for r in records {
        if !out.contains(&r.cell.method) {
            out.push(r.cell.method);
        }
    }
    out
}

/// Histogram of ΔL per method on shared bins.
pub fn delta_histogram(records: &[RunRecord]) -> String {
    const BINS: usize = 30;
    let deltas: Vec<f64> = records.iter().filter_map(|r| r.delta_l()).collect();
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / BINS as f64;
    let methods = methods_in(records);
    let mut counts = vec![vec![0usize; BINS]; methods.len()];
    for r in records {
        if let Some(d) = r.delta_l() {
            let m = methods
                .iter()
                .position(|m| *m == r.cell.method)
                .unwrap_or(0);
            let b = (((d - lo) / width) as usize).min(BINS - 1);
            counts[m][b] += 1;
        }
    }
    let top = counts.iter().flatten().copied().max().unwrap_or(1).max(1) as f64;
    let mut c = Canvas::new(
        "Distribution of ΔL by method",
        "ΔL = L_MS − L_MA",
        "runs",
        (lo, hi),
        (0.0, top * 1.05),
    );
    let share = width / methods.len().max(1) as f64;
    for (mi, row) in counts.iter().enumerate() {
        for (b, &k) in row.iter().enumerate() {
            if k > 0 {
                let x0 = lo + b as f64 * width + mi as f64 * share;
                c.rect(x0, x0 + share, 0.0, k as f64, PALETTE[mi % PALETTE.len()]);
            }
        }
    }
    let ticks: Vec<(f64, String)> = (0..=4)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / 4.0;
            (v, tick_label(v))
        })
        .collect();
    c.x_ticks(&ticks);
    let legend: Vec<(String, &str)> = methods
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str().to_string(), PALETTE[i % PALETTE.len()]))
        .collect();
    c.legend(&legend);
    c.finish()
}

/// ΔL against sample size with the fitted trend line.
pub fn delta_vs_n(records: &[RunRecord], trend: Option<&Trend>) -> String {
    let pts: Vec<(f64, f64, Method)> = records
        .iter()
        .filter_map(|r| r.delta_l().map(|d| (r.cell.n as f64, d, r.cell.method)))
        .collect();
    let xr = padded(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let yr = padded(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let mut c = Canvas::new("ΔL versus sample size", "sample size n", "ΔL", xr, yr);
    c.zero_line();
    let methods = methods_in(records);
    for (x, y, m) in &pts {
        let i = methods.iter().position(|v| v == m).unwrap_or(0);
        c.dot(*x, *y, PALETTE[i % PALETTE.len()]);
    }
    let mut ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    let ticks: Vec<(f64, String)> = ns.iter().map(|n| (*n, format!("{n}"))).collect();
    c.x_ticks(&ticks);
    let mut legend: Vec<(String, &str)> = methods
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str().to_string(), PALETTE[i % PALETTE.len()]))
        .collect();
    if let (Some(t), Some(first), Some(last)) = (trend, ns.first(), ns.last()) {
        let y = |n: f64| (t.intercept + t.slope * n).clamp(yr.0, yr.1);
        c.segment(*first, y(*first), *last, y(*last), "black", 2.0);
        legend.push((format!("OLS slope {:.2e}", t.slope), "black"));
    }
    c.legend(&legend);
    c.finish()
}

/// Mean ΔL with ±1 SE whiskers, one bar per `series` value within each
/// `group` value.
pub fn grouped_bars(
    title: &str,
    summaries: &[CellSummary],
    group: Factor,
    series: Factor,
) -> String {
    let mut groups: Vec<String> = Vec::new();
    let mut serieses: Vec<String> = Vec::new();
    for s in summaries {
        let g = s.key(group).unwrap_or_default().to_string();
        let v = s.key(series).unwrap_or_default().to_string();
        if !groups.contains(&g) {
            groups.push(g);
        }
        if !serieses.contains(&v) {
            serieses.push(v);
        }
    }
    let lo = summaries
        .iter()
        .map(|s| s.mean_delta - s.se_delta.unwrap_or(0.0))
        .fold(0.0, f64::min);
    let hi = summaries
        .iter()
        .map(|s| s.mean_delta + s.se_delta.unwrap_or(0.0))
        .fold(0.0, f64::max);
    let yr = padded(lo, hi);
    let mut c = Canvas::new(
        title,
        group.name(),
        "mean ΔL",
        (0.0, groups.len() as f64),
        yr,
    );
    c.zero_line();
    let slot = 0.8 / serieses.len().max(1) as f64;
    for s in summaries {
        let gi = groups
            .iter()
            .position(|g| Some(g.as_str()) == s.key(group))
            .unwrap_or(0);
        let si = serieses
            .iter()
            .position(|v| Some(v.as_str()) == s.key(series))
            .unwrap_or(0);
        let x0 = gi as f64 + 0.1 + si as f64 * slot;
        let color = PALETTE[si % PALETTE.len()];
        c.rect(x0, x0 + slot * 0.9, 0.0, s.mean_delta, color);
        if let Some(se) = s.se_delta {
            let xm = x0 + slot * 0.45;
            c.segment(xm, s.mean_delta - se, xm, s.mean_delta + se, "black", 1.5);
        }
    }
    let ticks: Vec<(f64, String)> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| (i as f64 + 0.5, format!("{}={g}", group.name())))
        .collect();
    c.x_ticks(&ticks);
    let legend: Vec<(String, &str)> = serieses
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), PALETTE[i % PALETTE.len()]))
        .collect();
    c.legend(&legend);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn empty_inputs_still_render() {
        let s = delta_histogram(&[]);
        assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
        assert!(delta_vs_n(&[], None).contains("<svg"));
    }
}
