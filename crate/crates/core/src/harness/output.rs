//! CSV, JSON and SVG writers. Floats use Rust's shortest round-trip
//! representation, so equal values always print identically.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "hs_u", "hs_gamma", "winf", "energy", "min_slope"];

/// CSV text with a header row.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::param("CSV output needs at least one record"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::param(format!(
                "row has {} values for {} columns",
                row.len(),
                header.len()
            )));
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.records
        .iter()
        .map(|r| vec![r.t, r.hs_u, r.hs_gamma, r.winf, r.energy, r.min_slope])
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &csv_string(header, rows)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Parse a CSV written by [`csv_string`] back into header and columns.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::param("empty CSV"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::param(format!("CSV row {} has {} cells", i + 2, cells.len())));
        }
        for (c, cell) in cols.iter_mut().zip(cells) {
            c.push(
                cell.trim()
                    .parse()
                    .map_err(|_| Error::param(format!("CSV row {}: bad number `{cell}`", i + 2)))?,
            );
        }
    }
    Ok((header, cols))
}

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Draw markers only, no connecting line.
    pub points: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub annotation: Option<String>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot as a standalone SVG document. Points that are not finite, or
/// not positive on a log axis, are skipped; with nothing left to draw the
/// plot says "no data".
pub fn svg_string(series: &[Series], opts: &PlotOptions) -> String {
    let tx = |v: f64| if opts.log_x { v.log10() } else { v };
    let ty = |v: f64| if opts.log_y { v.log10() } else { v };
    let usable =
        |x: f64, y: f64| x.is_finite() && y.is_finite() && (!opts.log_x || x > 0.0) && (!opts.log_y || y > 0.0);
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.x.iter()
                .zip(&s.y)
                .filter(|(x, y)| usable(**x, **y))
                .map(|(x, y)| (tx(*x), ty(*y)))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16" font-family="sans-serif">{}</text>"#,
        W / 2.0,
        escape(&opts.title)
    );
    if all.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="18" font-family="sans-serif">no data</text>"#,
            W / 2.0,
            H / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(&mut all.iter().map(|p| p.0));
    let (y0, y1) = span(&mut all.iter().map(|p| p.1));
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let label = |v: f64, log: bool| {
            if log {
                format!("1e{v:.1}")
            } else {
                format!("{v:.3e}")
            }
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" font-family="sans-serif">{}</text>"#,
            px(xv),
            H - BOTTOM + 16.0,
            label(xv, opts.log_x)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11" font-family="sans-serif">{}</text>"#,
            LEFT - 6.0,
            py(yv) + 4.0,
            label(yv, opts.log_y)
        );
    }
    let axis = |log: bool, name: &str| {
        if log {
            format!("{name} (log10)")
        } else {
            name.to_string()
        }
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" font-family="sans-serif">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0,
        escape(&axis(opts.log_x, &opts.x_label))
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(&axis(opts.log_y, &opts.y_label))
    );
    for (i, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if s.points {
            for (x, y) in p {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(*x),
                    py(*y)
                );
            }
        } else if !p.is_empty() {
            let coords: Vec<String> = p.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" fill="{color}">{}</text>"#,
            LEFT + 10.0,
            TOP + 16.0 + 15.0 * i as f64,
            escape(&s.label)
        );
    }
    if let Some(note) = &opts.annotation {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12" font-family="sans-serif">{}</text>"#,
            W - RIGHT - 8.0,
            TOP + 16.0,
            escape(note)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(path: &Path, series: &[Series], opts: &PlotOptions) -> Result<()> {
    write_text(path, &svg_string(series, opts))
}
