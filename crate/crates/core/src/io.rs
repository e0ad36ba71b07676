//! CSV export and import, plus deterministic SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::control::OptimizationReport;
use crate::error::{Error, Result};
use crate::evolve::{MultiplierField, Trajectory};
use crate::galerkin::Edge;

/// C-style `%.12e`, e.g. `-1.250000000000e-03`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn parse_err(source: &str, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        message: format!("line {line}: {message}"),
    }
}

fn parse_f64(source: &str, line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(source, line, format_args!("not a number: {field:?}")))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let m = traj.m();
    let mut out = String::from("t");
    for i in 1..=m {
        let _ = write!(out, ",c_{i}");
    }
    out.push('\n');
    for (t, c) in traj.times.iter().zip(&traj.coeffs) {
        out.push_str(&format_sci(*t));
        for v in c {
            out.push(',');
            out.push_str(&format_sci(*v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_trajectory_csv(text: &str, source: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(source, 1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected = (1..cols.len()).map(|i| format!("c_{i}"));
    if cols.first() != Some(&"t") || !cols[1..].iter().copied().eq(expected.collect::<Vec<_>>().iter().map(String::as_str)) {
        return Err(parse_err(source, 1, "header must be t,c_1,...,c_m"));
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        coeffs: Vec::new(),
    };
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(parse_err(source, i + 1, format_args!("expected {} fields, got {}", cols.len(), fields.len())));
        }
        traj.times.push(parse_f64(source, i + 1, fields[0])?);
        traj.coeffs.push(
            fields[1..]
                .iter()
                .map(|f| parse_f64(source, i + 1, f))
                .collect::<Result<_>>()?,
        );
    }
    Ok(traj)
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path)?;
    parse_trajectory_csv(&text, &path.display().to_string())
}

/// One row of the multiplier CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierRow {
    pub t: f64,
    pub edge: Edge,
    pub node_s: f64,
    pub u_n: f64,
    pub kappa: f64,
}

pub fn multiplier_csv(field: &MultiplierField) -> String {
    let mut out = String::from("t,edge,node_s,u_N,kappa\n");
    for ((t, us), ks) in field.times.iter().zip(&field.u_n).zip(&field.kappa) {
        for ((node, u), k) in field.nodes.iter().zip(us).zip(ks) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_sci(*t),
                node.edge.name(),
                format_sci(node.s_local),
                format_sci(*u),
                format_sci(*k)
            );
        }
    }
    out
}

pub fn parse_multiplier_csv(text: &str, source: &str) -> Result<Vec<MultiplierRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "t,edge,node_s,u_N,kappa" => {}
        _ => return Err(parse_err(source, 1, "header must be t,edge,node_s,u_N,kappa")),
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(parse_err(source, i + 1, format_args!("expected 5 fields, got {}", f.len())));
            }
            Ok(MultiplierRow {
                t: parse_f64(source, i + 1, f[0])?,
                edge: f[1].trim().parse().map_err(|e| parse_err(source, i + 1, e))?,
                node_s: parse_f64(source, i + 1, f[2])?,
                u_n: parse_f64(source, i + 1, f[3])?,
                kappa: parse_f64(source, i + 1, f[4])?,
            })
        })
        .collect()
}

pub fn write_multiplier_csv(field: &MultiplierField, path: &Path) -> Result<()> {
    fs::write(path, multiplier_csv(field))?;
    Ok(())
}

/// `iteration,start,accepted,J,w_1..w_n`; failed evaluations leave `J` empty.
pub fn iterates_csv(report: &OptimizationReport) -> String {
    let n = report.best_w.len();
    let mut out = String::from("iteration,start,accepted,J");
    for i in 1..=n {
        let _ = write!(out, ",w_{i}");
    }
    out.push('\n');
    for (it, x) in report.history.iter().enumerate() {
        let j = x.j.map(format_sci).unwrap_or_default();
        let _ = write!(out, "{it},{},{},{j}", x.start, u8::from(x.accepted));
        for w in &x.w {
            out.push(',');
            out.push_str(&format_sci(*w));
        }
        out.push('\n');
    }
    out
}

pub fn write_iterates_csv(report: &OptimizationReport, path: &Path) -> Result<()> {
    fs::write(path, iterates_csv(report))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Data-to-pixel map of a plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Frame {
    fn fit(series: &[Series]) -> Frame {
        let pts = series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let widen = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
                (lo - pad, hi + pad)
            }
        };
        Frame {
            x_range: widen(x0, x1),
            y_range: widen(y0, y1),
        }
    }

    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let px = LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
        let py = HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
        (px, py)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.series.is_empty() || self.series.iter().any(|s| s.points.is_empty()) {
            return Err(Error::Usage("plot needs at least one nonempty series".into()));
        }
        if self
            .series
            .iter()
            .flat_map(|s| &s.points)
            .any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::Numeric("plot data contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn frame(&self) -> Result<Frame> {
        self.validate()?;
        Ok(Frame::fit(&self.series))
    }

    /// SVG text; identical input gives identical bytes.
    pub fn render(&self) -> Result<String> {
        let frame = self.frame()?;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let (bx0, by0) = (LEFT, HEIGHT - BOTTOM);
        let (bx1, by1) = (WIDTH - RIGHT, TOP);
        let _ = writeln!(
            svg,
            r#"<path d="M{bx0} {by1} L{bx0} {by0} L{bx1} {by0}" stroke="black" fill="none"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = frame.x_range.0 + f * (frame.x_range.1 - frame.x_range.0);
            let yv = frame.y_range.0 + f * (frame.y_range.1 - frame.y_range.0);
            let (px, _) = frame.to_pixel(xv, frame.y_range.0);
            let (_, py) = frame.to_pixel(frame.x_range.0, yv);
            let _ = writeln!(
                svg,
                r#"<text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                by0 + 16.0,
                short(xv)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{py:.2}" font-size="11" text-anchor="end">{}</text>"#,
                bx0 - 6.0,
                short(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            (bx0 + bx1) / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{0}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (by0 + by1) / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = frame.to_pixel(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
                pts.join(" ")
            );
            let ly = by1 + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                bx1 - 150.0,
                bx1 - 130.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" class="legend">{}</text>"#,
                bx1 - 125.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

fn short(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

pub fn export_plot(plot: &Plot, path: &Path) -> Result<()> {
    fs::write(path, plot.render()?)?;
    Ok(())
}
