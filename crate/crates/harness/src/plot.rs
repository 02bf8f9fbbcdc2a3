//! Self-contained SVG line plots of median and inter-quartile band.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::stats::StatRow;
use crate::table::write_text;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLOR: &str = "#1f77b4";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub legend: String,
    pub log_y: bool,
}

impl PlotStyle {
    pub fn fitness(title: &str, legend: &str) -> Self {
        PlotStyle {
            title: title.into(),
            x_label: "evaluations".into(),
            y_label: "best fitness".into(),
            legend: legend.into(),
            log_y: true,
        }
    }

    pub fn hypervolume(title: &str, legend: &str) -> Self {
        PlotStyle {
            title: title.into(),
            x_label: "evaluations".into(),
            y_label: "hypervolume".into(),
            legend: legend.into(),
            log_y: false,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Axis { lo, hi, log }
    }

    /// Position in `[0, 1]`; non-positive values on a log axis sit at the
    /// bottom.
    fn unit(&self, v: f64) -> f64 {
        let v = if self.log {
            if v > 0.0 {
                v.log10()
            } else {
                self.lo
            }
        } else {
            v
        };
        ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn label(&self, u: f64) -> String {
        let v = self.lo + u * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.4}")
        }
    }
}

/// SVG document for `stats`, which must be non-empty.
pub fn render_svg(stats: &[StatRow], style: &PlotStyle) -> String {
    assert!(!stats.is_empty(), "nothing to plot");
    let log = style.log_y && stats.iter().any(|s| s.q25 > 0.0 || s.median > 0.0);
    let xs = Axis::fit(stats.iter().map(|s| s.evaluations as f64), false);
    let ys = Axis::fit(stats.iter().flat_map(|s| [s.median, s.q25, s.q75]), log);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |e: usize| LEFT + xs.unit(e as f64) * plot_w;
    let py = |v: f64| TOP + (1.0 - ys.unit(v)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16" font-family="sans-serif">{}</text>"#,
        WIDTH / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let y = TOP + (1.0 - u) * plot_h;
        let x = LEFT + u * plot_w;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11" font-family="sans-serif">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            ys.label(u)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-size="11" font-family="sans-serif">{}</text>"#,
            TOP + plot_h + 16.0,
            xs.label(u).trim_end_matches('0').trim_end_matches('.')
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13" font-family="sans-serif">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 {0})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(&style.y_label)
    );

    if stats.len() == 1 {
        let s = stats[0];
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{COLOR}" stroke-opacity="0.3" stroke-width="6"/>"#,
            px(s.evaluations),
            py(s.q25),
            py(s.q75)
        );
        let _ = writeln!(
            svg,
            r#"<circle class="median" cx="{:.2}" cy="{:.2}" r="4" fill="{COLOR}"/>"#,
            px(s.evaluations),
            py(s.median)
        );
    } else {
        let mut band = String::new();
        for s in stats {
            let _ = write!(band, "{:.2},{:.2} ", px(s.evaluations), py(s.q75));
        }
        for s in stats.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(s.evaluations), py(s.q25));
        }
        let _ = writeln!(
            svg,
            r#"<polygon class="iqr" points="{}" fill="{COLOR}" fill-opacity="0.25" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = stats
            .iter()
            .map(|s| format!("{:.2},{:.2}", px(s.evaluations), py(s.median)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="median" points="{}" fill="none" stroke="{COLOR}" stroke-width="2"/>"#,
            line.join(" ")
        );
    }

    let lx = LEFT + plot_w - 150.0;
    let ly = TOP + 14.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{COLOR}" stroke-width="2"/>"#,
        lx + 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif">{} (median)</text>"#,
        lx + 26.0,
        ly + 4.0,
        escape(&style.legend)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{lx}" y="{}" width="20" height="10" fill="{COLOR}" fill-opacity="0.25"/>"#,
        ly + 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif">inter-quartile range</text>"#,
        lx + 26.0,
        ly + 19.0
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_plot(stats: &[StatRow], path: &Path, style: &PlotStyle) -> Result<()> {
    write_text(path, &render_svg(stats, style))
}
