//! Minimal SVG line plots and heatmaps.
//!
//! Line plots draw one `<path>` per series; points that are not finite break
//! the line with a new `M` command. Heatmaps draw one `<rect>` per cell.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{GridResult, ScanResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub value_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[row][col]`, rows along `y`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    Lines(LinePlot),
    Heatmap(Heatmap),
}

impl LinePlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        LinePlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            lines: Vec::new(),
        }
    }

    pub fn line(mut self, name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        self.lines.push(Line {
            name: name.into(),
            x,
            y,
        });
        self
    }

    /// Every series of a scan against its axis.
    pub fn from_scan(title: impl Into<String>, y_label: impl Into<String>, scan: &ScanResult) -> Self {
        let mut plot = LinePlot::new(title, scan.axis_name.clone(), y_label);
        for s in &scan.series {
            let y = s.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            plot = plot.line(s.name.clone(), scan.axis.clone(), y);
        }
        plot
    }
}

impl Heatmap {
    pub fn from_grid(title: impl Into<String>, grid: &GridResult) -> Self {
        Heatmap {
            title: title.into(),
            x_label: grid.x_name.clone(),
            y_label: grid.y_name.clone(),
            value_label: grid.value_name.clone(),
            x: grid.x.clone(),
            y: grid.y.clone(),
            values: grid.values.clone(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn axes(out: &mut String, f: &Frame, title: &str, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let fx = f.x.0 + (f.x.1 - f.x.0) * k as f64 / 4.0;
        let fy = f.y.0 + (f.y.1 - f.y.0) * k as f64 / 4.0;
        let (px, py) = (f.px(fx), f.py(fy));
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="#000"/><text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
            y0 + 5.0,
            y0 + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn header() -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
    )
}

fn lines_svg(p: &LinePlot) -> Result<String> {
    if p.lines.is_empty() || p.lines.iter().all(|l| l.x.is_empty()) {
        return Err(Error::EmptyResult(format!("plot `{}` has no data", p.title)));
    }
    if let Some(l) = p.lines.iter().find(|l| l.x.len() != l.y.len()) {
        return Err(Error::domain(format!("series `{}` has mismatched x and y", l.name)));
    }
    let xr = range(p.lines.iter().flat_map(|l| l.x.iter().copied()));
    let yr = range(p.lines.iter().flat_map(|l| l.y.iter().copied()));
    let (Some(x), Some(y)) = (xr, yr) else {
        return Err(Error::EmptyResult(format!("plot `{}` has no finite points", p.title)));
    };
    let f = Frame { x, y };
    let mut out = header();
    axes(&mut out, &f, &p.title, &p.x_label, &p.y_label);
    for (i, l) in p.lines.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (&x, &y) in l.x.iter().zip(&l.y) {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, f.px(x), f.py(y));
            pen_down = true;
        }
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.5"><title>{}</title></path>"#,
            d.trim_end(),
            escape(&l.name)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{colour}" text-anchor="end">{}</text>"#,
            WIDTH - RIGHT - 6.0,
            TOP + 14.0 * (i + 1) as f64,
            escape(&l.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

// Blue through white to red.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (s, s, 1.0)
    } else {
        let s = (1.0 - t) / 0.5;
        (1.0, s, s)
    };
    let c = |v: f64| (v * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

fn edges(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n == 1 {
        return vec![c[0] - 0.5, c[0] + 0.5];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(c[0] - (c[1] - c[0]) / 2.0);
    for w in c.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    e.push(c[n - 1] + (c[n - 1] - c[n - 2]) / 2.0);
    e
}

fn heatmap_svg(h: &Heatmap) -> Result<String> {
    if h.x.is_empty() || h.y.is_empty() {
        return Err(Error::EmptyResult(format!("heatmap `{}` has no cells", h.title)));
    }
    if h.values.len() != h.y.len() || h.values.iter().any(|r| r.len() != h.x.len()) {
        return Err(Error::domain("heatmap values do not match the axes"));
    }
    let (xe, ye) = (edges(&h.x), edges(&h.y));
    let f = Frame {
        x: (xe[0], xe[xe.len() - 1]),
        y: (ye[0], ye[ye.len() - 1]),
    };
    let (lo, hi) = range(h.values.iter().flatten().copied()).unwrap_or((0.0, 1.0));
    let mut out = header();
    for (r, row) in h.values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (px0, px1) = (f.px(xe[c]), f.px(xe[c + 1]));
            let (py0, py1) = (f.py(ye[r + 1]), f.py(ye[r]));
            let fill = if v.is_finite() { colour((v - lo) / (hi - lo)) } else { "#808080".into() };
            let _ = writeln!(
                out,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="none"/>"#,
                (px1 - px0).max(0.0),
                (py1 - py0).max(0.0)
            );
        }
    }
    let title = format!("{} ({}: {} to {})", h.title, h.value_label, tick(lo), tick(hi));
    axes(&mut out, &f, &title, &h.x_label, &h.y_label);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render(plot: &Plot) -> Result<String> {
    match plot {
        Plot::Lines(p) => lines_svg(p),
        Plot::Heatmap(h) => heatmap_svg(h),
    }
}

/// Renders `plot` to `path`; nothing is written if rendering fails.
pub fn emit_svg(plot: &Plot, path: impl AsRef<Path>) -> Result<()> {
    let text = render(plot)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_path_per_series_and_gaps() {
        let p = LinePlot::new("t<1>", "x", "y")
            .line("a", vec![0.0, 1.0, 2.0], vec![0.0, f64::NAN, 2.0])
            .line("b", vec![0.0, 2.0], vec![1.0, 1.0]);
        let s = render(&Plot::Lines(p)).unwrap();
        assert_eq!(s.matches("<path").count(), 2);
        assert!(s.contains("t&lt;1&gt;"));
        let first = s.split("<path d=\"").nth(1).unwrap();
        assert_eq!(first.split('"').next().unwrap().matches('M').count(), 2);
    }

    #[test]
    fn heatmap_has_a_cell_per_value() {
        let h = Heatmap {
            title: "m".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            value_label: "v".into(),
            x: vec![0.0, 1.0, 2.0],
            y: vec![0.5, 1.0],
            values: vec![vec![0.0, 0.5, 1.0], vec![1.0, 0.5, 0.0]],
        };
        let s = render(&Plot::Heatmap(h)).unwrap();
        assert_eq!(s.matches("stroke=\"none\"").count(), 6);
        assert_eq!(s.matches("<path").count(), 0);
    }

    #[test]
    fn empty_plot_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        assert!(emit_svg(&Plot::Lines(LinePlot::new("e", "x", "y")), &path).is_err());
        assert!(!path.exists());
    }
}
