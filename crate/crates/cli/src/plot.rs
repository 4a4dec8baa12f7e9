//! Deterministic SVG plots (960×600) drawn from the CSV tables the runner
//! writes.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    GraphScatter,
    WidthHistogram,
    DecayCurve,
    SweepLines,
}

/// Named numeric columns of a CSV file.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(format!("{}: {e}", path.display())))?;
        let header = r
            .headers()
            .map_err(|e| CliError::csv(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| CliError::csv(e.to_string()))?;
        Ok(Table { header, rows })
    }

    pub fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::csv(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.get(i)
                    .ok_or_else(|| CliError::csv(format!("row {r} has no column `{name}`")))?
                    .parse::<f64>()
                    .map_err(|e| CliError::csv(format!("row {r}, column `{name}`: {e}")))
            })
            .collect()
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    svg: String,
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

impl Frame {
    fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            num(WIDTH / 2.0),
            escape(title)
        );
        let mut f = Frame { x, y, svg };
        f.axes(x_label, y_label);
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = writeln!(
            self.svg,
            r#"<path d="M{} {} L{} {} L{} {}" fill="none" stroke="black"/>"#,
            num(x0),
            num(y1),
            num(x0),
            num(y0),
            num(x1),
            num(y0)
        );
        for i in 0..=5 {
            let t = i as f64 / 5.0;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                self.svg,
                r#"<line x1="{p}" y1="{a}" x2="{p}" y2="{b}" stroke="black"/><text x="{p}" y="{c}" font-family="sans-serif" font-size="12" text-anchor="middle">{l}</text>"#,
                p = num(px),
                a = num(y0),
                b = num(y0 + 5.0),
                c = num(y0 + 20.0),
                l = tick_label(xv)
            );
            let _ = writeln!(
                self.svg,
                r#"<line x1="{a}" y1="{p}" x2="{b}" y2="{p}" stroke="black"/><text x="{c}" y="{d}" font-family="sans-serif" font-size="12" text-anchor="end">{l}</text>"#,
                p = num(py),
                a = num(x0 - 5.0),
                b = num(x0),
                c = num(x0 - 8.0),
                d = num(py + 4.0),
                l = tick_label(yv)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0),
            num(HEIGHT - 15.0),
            escape(x_label)
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="20" y="{y}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {y})">{}</text>"#,
            escape(y_label),
            y = num((y0 + y1) / 2.0)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn plot(csv_path: &Path, kind: PlotKind) -> Result<String, CliError> {
    let table = Table::read(csv_path)?;
    match kind {
        PlotKind::GraphScatter => graph_scatter(&table),
        PlotKind::WidthHistogram => width_histogram(&table),
        PlotKind::DecayCurve => decay_curve(&table),
        PlotKind::SweepLines => sweep_lines(&table),
    }
}

/// One marker per row: past coordinate against the fiber point (or the
/// midpoint of `lo`/`hi` when there is no `gamma` column).
fn graph_scatter(t: &Table) -> Result<String, CliError> {
    let xs = t.column("coordinate")?;
    let ys = if t.has("gamma") {
        t.column("gamma")?
    } else {
        let lo = t.column("lo")?;
        let hi = t.column("hi")?;
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
    };
    let (ylo, yhi) = extent(ys.iter().copied());
    let mut f = Frame::new("invariant graph", "past coordinate", "fiber value", (0.0, 1.0), padded(ylo, yhi));
    for (x, y) in xs.iter().zip(&ys) {
        if x.is_finite() && y.is_finite() {
            let _ = writeln!(
                f.svg,
                r#"<circle cx="{}" cy="{}" r="1.5" fill="{}"/>"#,
                num(f.px(*x)),
                num(f.py(*y)),
                PALETTE[0]
            );
        }
    }
    Ok(f.finish())
}

pub const HISTOGRAM_BINS: usize = 50;

fn width_histogram(t: &Table) -> Result<String, CliError> {
    let widths: Vec<f64> = t.column("width")?.into_iter().filter(|w| w.is_finite()).collect();
    let max = widths.iter().copied().fold(0.0_f64, f64::max).max(1e-12);
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for w in &widths {
        let i = ((w / max) * HISTOGRAM_BINS as f64).floor() as usize;
        counts[i.min(HISTOGRAM_BINS - 1)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    let mut f = Frame::new("fiber widths", "width", "count", (0.0, max), (0.0, top.max(1.0) * 1.05));
    let step = max / HISTOGRAM_BINS as f64;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (x0, x1) = (f.px(i as f64 * step), f.px((i + 1) as f64 * step));
        let (y0, y1) = (f.py(c as f64), f.py(0.0));
        let _ = writeln!(
            f.svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            num(x0),
            num(y0),
            num((x1 - x0).max(0.5)),
            num(y1 - y0),
            PALETTE[0]
        );
    }
    Ok(f.finish())
}

fn decay_curve(t: &Table) -> Result<String, CliError> {
    let lags = t.column("lag")?;
    let c = t.column("abs")?;
    let se = t.column("standard_error")?;
    let (xlo, xhi) = extent(lags.iter().copied());
    let (_, yhi) = extent(c.iter().zip(&se).map(|(a, b)| a + 3.0 * b));
    let mut f = Frame::new("correlation decay", "lag", "|C_n|", padded(xlo, xhi), (0.0, yhi.max(1e-300) * 1.05));
    let pts: Vec<String> = lags
        .iter()
        .zip(&c)
        .map(|(x, y)| format!("{},{}", num(f.px(*x)), num(f.py(*y))))
        .collect();
    let _ = writeln!(f.svg, r#"<polyline points="{}" fill="none" stroke="{}"/>"#, pts.join(" "), PALETTE[0]);
    for ((x, y), s) in lags.iter().zip(&c).zip(&se) {
        let _ = writeln!(
            f.svg,
            r#"<line x1="{p}" y1="{a}" x2="{p}" y2="{b}" stroke="{c}"/><circle cx="{p}" cy="{m}" r="3" fill="{c}"/>"#,
            p = num(f.px(*x)),
            a = num(f.py((y - 3.0 * s).max(0.0))),
            b = num(f.py(y + 3.0 * s)),
            m = num(f.py(*y)),
            c = PALETTE[1]
        );
    }
    Ok(f.finish())
}

/// Every numeric column other than `delta` against `delta`.
fn sweep_lines(t: &Table) -> Result<String, CliError> {
    let deltas = t.column("delta")?;
    let series: Vec<(String, Vec<f64>)> = t
        .header
        .iter()
        .filter(|h| *h != "delta")
        .filter_map(|h| t.column(h).ok().map(|v| (h.clone(), v)))
        .take(PALETTE.len())
        .collect();
    let (xlo, xhi) = extent(deltas.iter().copied());
    let (ylo, yhi) = extent(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut f = Frame::new("perturbation sweep", "target dist_C2", "value", padded(xlo, xhi), padded(ylo.min(0.0), yhi));
    for (i, (name, v)) in series.iter().enumerate() {
        let pts: Vec<String> = deltas
            .iter()
            .zip(v)
            .map(|(x, y)| format!("{},{}", num(f.px(*x)), num(f.py(*y))))
            .collect();
        let _ = writeln!(f.svg, r#"<polyline points="{}" fill="none" stroke="{}"/>"#, pts.join(" "), PALETTE[i]);
        let _ = writeln!(
            f.svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{}">{}</text>"#,
            num(WIDTH - MARGIN_RIGHT - 200.0),
            num(MARGIN_TOP + 16.0 * (i as f64 + 1.0)),
            PALETTE[i],
            escape(name)
        );
    }
    Ok(f.finish())
}
