//! Static SVG figures: residuals against the threshold, the simulated law of
//! `T`, a residual boxplot, and benchmark curves.
//!
//! Output is plain text assembled by hand, so the same input always gives
//! the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::report::write_bytes;
use crate::detection::DetectionReport;
use crate::error::Result;
use crate::monte_carlo::EmpiricalTDistribution;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const POINT_COLOR: &str = "#222222";
const FLAG_COLOR: &str = "#d62728";

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            body,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Canvas { body }
    }

    fn line(
        &mut self,
        class: &str,
        (x1, y1): (f64, f64),
        (x2, y2): (f64, f64),
        stroke: &str,
        dash: bool,
    ) {
        let dash = if dash {
            r#" stroke-dasharray="6,4""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{stroke}" stroke-width="1.5"{dash}/>"#
        );
    }

    fn circle(&mut self, class: &str, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{cx:.3}" cy="{cy:.3}" r="{r}" fill="{fill}"/>"#
        );
    }

    fn rect(&mut self, class: &str, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{fill}" stroke="{POINT_COLOR}" stroke-width="0.5"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            escape(s)
        );
    }

    fn frame(&mut self) {
        let _ = writeln!(
            self.body,
            r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="{POINT_COLOR}"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
    }

    fn finish(mut self) -> Vec<u8> {
        self.body.push_str("</svg>\n");
        self.body.into_bytes()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Affine map from data to pixels.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        };
        Scale {
            lo,
            hi,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn x_plot_scale(lo: f64, hi: f64) -> Scale {
    Scale::new(lo, hi, LEFT + 10.0, WIDTH - RIGHT - 10.0)
}

fn y_plot_scale(lo: f64, hi: f64) -> Scale {
    Scale::new(lo, hi, HEIGHT - BOTTOM, TOP)
}

/// Studentized residual against observation index, with the `±c_α` lines.
///
/// Flagged observations are drawn as `class="outlier"` circles, the rest as
/// `class="point"`; the two threshold lines carry `class="threshold"`.
pub fn render_residual_plot(report: &DetectionReport) -> Vec<u8> {
    let e = &report.residuals.values;
    let n = e.len();
    let reach = report.t_obs.max(report.threshold).max(1.0) * 1.1;
    let xs = x_plot_scale(1.0, n.max(2) as f64);
    let ys = y_plot_scale(-reach, reach);

    let mut c = Canvas::new(&format!(
        "Studentized residuals (alpha = {}, threshold = {:.4}, p = {:.4})",
        report.alpha, report.threshold, report.p_value
    ));
    c.frame();
    c.line(
        "axis",
        (LEFT, ys.map(0.0)),
        (WIDTH - RIGHT, ys.map(0.0)),
        "#999999",
        false,
    );
    for sign in [1.0, -1.0] {
        let y = ys.map(sign * report.threshold);
        c.line("threshold", (LEFT, y), (WIDTH - RIGHT, y), FLAG_COLOR, true);
    }
    for (i, v) in e.iter().enumerate() {
        let (cx, cy) = (xs.map((i + 1) as f64), ys.map(*v));
        if report.is_outlier(i) {
            c.circle("outlier", cx, cy, 4.0, FLAG_COLOR);
        } else {
            c.circle("point", cx, cy, 2.5, POINT_COLOR);
        }
    }
    c.text(
        LEFT - 6.0,
        ys.map(report.threshold) + 4.0,
        "end",
        &format!("{:.2}", report.threshold),
    );
    c.text(
        LEFT - 6.0,
        ys.map(-report.threshold) + 4.0,
        "end",
        &format!("{:.2}", -report.threshold),
    );
    c.text(WIDTH / 2.0, HEIGHT - 12.0, "middle", "observation");
    c.finish()
}

/// Histogram of the simulated law of `T`, with an optional threshold marker.
pub fn render_histogram(dist: &EmpiricalTDistribution, threshold: Option<f64>) -> Vec<u8> {
    let s = dist.sorted_samples();
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let bins = ((s.len() as f64).sqrt() as usize).clamp(1, 60);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for v in s {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1) as f64;
    let density = |count: usize| count as f64 / (s.len() as f64 * width);

    let xs = x_plot_scale(lo, lo + width * bins as f64);
    let ys = y_plot_scale(0.0, density(peak as usize) * 1.05);
    let mut c = Canvas::new(&format!("Simulated law of T (nsim = {})", dist.nsim()));
    c.frame();
    for (b, &count) in counts.iter().enumerate() {
        let x0 = xs.map(lo + width * b as f64);
        let x1 = xs.map(lo + width * (b + 1) as f64);
        let y = ys.map(density(count));
        c.rect("bar", x0, y, x1 - x0, ys.map(0.0) - y, "#9ecae1");
    }
    if let Some(t) = threshold {
        let x = xs.map(t);
        c.line(
            "threshold",
            (x, TOP),
            (x, HEIGHT - BOTTOM),
            FLAG_COLOR,
            true,
        );
    }
    c.text(LEFT, HEIGHT - 30.0, "middle", &format!("{lo:.2}"));
    c.text(WIDTH - RIGHT, HEIGHT - 30.0, "middle", &format!("{hi:.2}"));
    c.text(WIDTH / 2.0, HEIGHT - 12.0, "middle", "T");
    c.finish()
}

fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Tukey boxplot of the studentized residuals.
pub fn render_boxplot(report: &DetectionReport) -> Vec<u8> {
    let mut v = report.residuals.values.clone();
    v.sort_by(f64::total_cmp);
    let (q1, q2, q3) = (
        quantile_linear(&v, 0.25),
        quantile_linear(&v, 0.5),
        quantile_linear(&v, 0.75),
    );
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_lo = v.iter().copied().find(|&x| x >= lo_fence).unwrap_or(q1);
    let whisker_hi = v
        .iter()
        .rev()
        .copied()
        .find(|&x| x <= hi_fence)
        .unwrap_or(q3);

    let reach = v[0].abs().max(v[v.len() - 1].abs()).max(1.0) * 1.1;
    let ys = y_plot_scale(-reach, reach);
    let cx = WIDTH / 2.0;
    let half = 60.0;

    let mut c = Canvas::new("Studentized residuals");
    c.frame();
    c.rect(
        "box",
        cx - half,
        ys.map(q3),
        2.0 * half,
        ys.map(q1) - ys.map(q3),
        "#c6dbef",
    );
    c.line(
        "median",
        (cx - half, ys.map(q2)),
        (cx + half, ys.map(q2)),
        POINT_COLOR,
        false,
    );
    c.line(
        "whisker",
        (cx, ys.map(q3)),
        (cx, ys.map(whisker_hi)),
        POINT_COLOR,
        false,
    );
    c.line(
        "whisker",
        (cx, ys.map(q1)),
        (cx, ys.map(whisker_lo)),
        POINT_COLOR,
        false,
    );
    for w in [whisker_lo, whisker_hi] {
        c.line(
            "whisker",
            (cx - half / 2.0, ys.map(w)),
            (cx + half / 2.0, ys.map(w)),
            POINT_COLOR,
            false,
        );
    }
    for x in v.iter().filter(|&&x| x < lo_fence || x > hi_fence) {
        c.circle("far", cx, ys.map(*x), 3.0, POINT_COLOR);
    }
    c.finish()
}

/// Median runtime against the sweep variable, with the fitted line.
pub fn render_line_chart(
    title: &str,
    x_label: &str,
    xs_data: &[f64],
    ys_data: &[f64],
    fit: Option<(f64, f64)>,
) -> Vec<u8> {
    let fold = |v: &[f64], init: f64, f: fn(f64, f64) -> f64| v.iter().copied().fold(init, f);
    let x_hi = fold(xs_data, 0.0, f64::max);
    let y_hi = fold(ys_data, 0.0, f64::max) * 1.1;
    let xs = x_plot_scale(0.0, x_hi);
    let ys = y_plot_scale(0.0, if y_hi > 0.0 { y_hi } else { 1.0 });

    let mut c = Canvas::new(title);
    c.frame();
    for w in xs_data.windows(2).zip(ys_data.windows(2)) {
        let (x, y) = w;
        c.line(
            "series",
            (xs.map(x[0]), ys.map(y[0])),
            (xs.map(x[1]), ys.map(y[1])),
            "#1f77b4",
            false,
        );
    }
    for (x, y) in xs_data.iter().zip(ys_data) {
        c.circle("point", xs.map(*x), ys.map(*y), 3.0, "#1f77b4");
    }
    if let Some((r, b)) = fit {
        c.line(
            "fit",
            (xs.map(0.0), ys.map(b)),
            (xs.map(x_hi), ys.map(r * x_hi + b)),
            FLAG_COLOR,
            true,
        );
    }
    c.text(WIDTH / 2.0, HEIGHT - 12.0, "middle", x_label);
    c.text(LEFT - 6.0, ys.map(0.0), "end", "0");
    c.text(LEFT - 6.0, TOP + 10.0, "end", &format!("{:.3e}", y_hi));
    c.finish()
}

/// The three figures produced for a detection run.
pub struct PlotSet {
    pub residuals: Vec<u8>,
    pub histogram: Vec<u8>,
    pub boxplot: Vec<u8>,
}

pub fn render_plots(report: &DetectionReport, dist: &EmpiricalTDistribution) -> PlotSet {
    PlotSet {
        residuals: render_residual_plot(report),
        histogram: render_histogram(dist, Some(report.threshold)),
        boxplot: render_boxplot(report),
    }
}

/// Writes `residuals.svg`, `t_histogram.svg` and `residual_boxplot.svg`.
pub fn write_plots(dir: &Path, plots: &PlotSet) -> Result<()> {
    write_bytes(&dir.join("residuals.svg"), &plots.residuals)?;
    write_bytes(&dir.join("t_histogram.svg"), &plots.histogram)?;
    write_bytes(&dir.join("residual_boxplot.svg"), &plots.boxplot)
}
