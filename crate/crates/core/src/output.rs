//! CSV tables and minimal SVG line charts of sweep rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::optimizer::{Branch, OptResult};
use crate::sim::{StrategyId, SweepRow};

pub const CSV_HEADER: [&str; 9] = [
    "distance",
    "strategy",
    "n_cpb",
    "n_t",
    "eta_bits_per_joule",
    "rate_bps",
    "p_ppdu",
    "feasible",
    "branch",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("nothing to write: the table has no rows")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serialize rows as CSV into any writer.
pub fn write_csv_to<W: io::Write>(rows: &[SweepRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String, OutputError> {
    if rows.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut buf = Vec::new();
    write_csv_to(rows, &mut buf).map_err(|source| OutputError::Csv {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Write rows to `path`. Nothing is created when `rows` is empty.
pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<(), OutputError> {
    let text = csv_string(rows)?;
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize()
        .collect::<Result<Vec<SweepRow>, _>>()
        .map_err(csv_err)
}

/// One optimizer result as a CSV record.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptRow {
    pub distance: f64,
    pub n_cpb: u32,
    pub n_t: u32,
    pub eta_bits_per_joule: f64,
    pub rate_bps: f64,
    pub p_ppdu: f64,
    pub lambda: f64,
    pub feasible: bool,
    pub iterations: u32,
    pub branch: Branch,
}

impl From<&OptResult> for OptRow {
    fn from(r: &OptResult) -> Self {
        OptRow {
            distance: r.distance,
            n_cpb: r.n_cpb_star,
            n_t: r.n_t_star,
            eta_bits_per_joule: r.eta,
            rate_bps: r.rate,
            p_ppdu: r.p_ppdu,
            lambda: r.lambda,
            feasible: r.feasible,
            iterations: r.iterations,
            branch: r.branch,
        }
    }
}

pub fn opt_results_csv(results: &[OptResult]) -> Result<String, OutputError> {
    if results.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| OutputError::Csv {
        path: PathBuf::from("<memory>"),
        source,
    };
    for r in results {
        w.serialize(OptRow::from(r)).map_err(csv_err)?;
    }
    let buf = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Which column to plot on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Distance,
    FrameSize,
    Efficiency,
    Rate,
}

impl Axis {
    fn value(&self, row: &SweepRow) -> f64 {
        match self {
            Axis::Distance => row.distance,
            Axis::FrameSize => f64::from(row.n_t),
            Axis::Efficiency => row.eta,
            Axis::Rate => row.rate,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Axis::Distance => "distance (m)",
            Axis::FrameSize => "PSDU size (bits)",
            Axis::Efficiency => "energy efficiency (bits/J)",
            Axis::Rate => "throughput (bits/s)",
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One polyline per strategy, in strategy order.
pub fn render_svg(rows: &[SweepRow], x: Axis, y: Axis) -> Result<String, OutputError> {
    if rows.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut series: BTreeMap<StrategyId, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series
            .entry(r.strategy)
            .or_default()
            .push((x.value(r), y.value(r)));
    }
    let points = series.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(px, py) in points {
        x0 = x0.min(px);
        x1 = x1.max(px);
        y0 = y0.min(py);
        y1 = y1.max(py);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(vx),
            bottom + 16.0,
            tick(vx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(vy) + 4.0,
            tick(vy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        x.label()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        y.label()
    );
    for (i, (id, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(px, py)| format!("{:.2},{:.2}", sx(px), sy(py)))
            .collect();
        if path.len() == 1 {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(pts[0].0),
                sy(pts[0].1)
            );
        } else {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        let ly = top + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{id}</text>"#,
            right
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

/// Write `{stem}_eta.svg` and `{stem}_rate.svg` into `dir`.
pub fn write_svg_charts(
    rows: &[SweepRow],
    x: Axis,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, OutputError> {
    let mut written = Vec::new();
    for (suffix, y) in [("eta", Axis::Efficiency), ("rate", Axis::Rate)] {
        let svg = render_svg(rows, x, y)?;
        let path = dir.join(format!("{stem}_{suffix}.svg"));
        fs::write(&path, svg).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
