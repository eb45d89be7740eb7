//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// Polylines are thinned to at most this many vertices.
pub const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Same scale on both axes, for planar trajectories.
    pub equal_aspect: bool,
    pub series: Vec<Series<'a>>,
}

/// Keeps every k-th point plus the last one.
pub fn thin(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max || max < 3 {
        return points.to_vec();
    }
    // room for the extra final point
    let stride = (points.len() - 1).div_ceil(max - 2);
    let mut out: Vec<_> = points.iter().step_by(stride).copied().collect();
    if !(points.len() - 1).is_multiple_of(stride) {
        out.push(*points.last().unwrap());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            let pad = 0.5 * (1.0 + lo.abs());
            return Self { lo: lo - pad, hi: hi + pad };
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad }
    }

    fn span(&self) -> f64 {
        self.hi - self.lo
    }

    fn widen_to(&mut self, span: f64) {
        let extra = 0.5 * (span - self.span());
        if extra > 0.0 {
            self.lo -= extra;
            self.hi += extra;
        }
    }
}

fn tick_label(v: f64, span: f64) -> String {
    let digits = (2.0 - span.log10().floor()).clamp(0.0, 6.0) as usize;
    format!("{v:.digits$}")
}

pub fn render(chart: &Chart) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let mut xr = Range::of(chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let mut yr = Range::of(chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    if chart.equal_aspect {
        let scale = (xr.span() / plot_w).max(yr.span() / plot_h);
        xr.widen_to(scale * plot_w);
        yr.widen_to(scale * plot_h);
    }
    let sx = |x: f64| MARGIN_LEFT + (x - xr.lo) / xr.span() * plot_w;
    let sy = |y: f64| MARGIN_TOP + (yr.hi - y) / yr.span() * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(chart.title)
    );

    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (xr.lo + f * xr.span(), yr.lo + f * yr.span());
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{MARGIN_TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h + 18.0,
            tick_label(xv, xr.span())
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            tick_label(yv, yr.span())
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        escape(chart.y_label)
    );

    for (k, s) in chart.series.iter().enumerate() {
        let pts = thin(&s.points, MAX_POINTS);
        let mut coords = String::with_capacity(pts.len() * 16);
        for (x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(coords, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            coords.trim_end()
        );
        let ly = MARGIN_TOP + 16.0 + 16.0 * k as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 24.0,
            s.color
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
