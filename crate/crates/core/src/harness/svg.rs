//! Minimal standalone SVG charts. Output depends only on the table contents,
//! so identical tables render to identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::table::{format_sig, Table};
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

// Viridis control points.
const RAMP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Scatter,
    Heatmap,
    Lines,
}

/// Which columns to draw. `value` colours heatmap cells; `group` splits
/// scatter and line plots into legend entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x: String,
    pub y: String,
    pub value: Option<String>,
    pub group: Option<String>,
    /// Scatter plots keep every k-th row so at most this many points are drawn.
    pub max_points: usize,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: &str, x: &str, y: &str) -> Self {
        Self {
            kind,
            title: title.to_string(),
            x: x.to_string(),
            y: y.to_string(),
            value: None,
            group: None,
            max_points: 20_000,
        }
    }

    pub fn value(mut self, column: &str) -> Self {
        self.value = Some(column.to_string());
        self
    }

    pub fn group(mut self, column: &str) -> Self {
        self.group = Some(column.to_string());
        self
    }
}

/// Axis label with the unit pulled from the column suffix: `theta2_deg` -> `theta2 [deg]`.
pub fn axis_label(column: &str) -> String {
    for unit in ["mm3", "mm2", "mm", "deg", "rad"] {
        if let Some(stem) = column.strip_suffix(&format!("_{unit}")) {
            return format!("{stem} [{unit}]");
        }
    }
    format!("{column} [-]")
}

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .column(name)
        .ok_or_else(|| Error::param(format!("table {} has no column {name}", table.name)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Tick positions at 1/2/5 multiples covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 7.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let d = lo.abs().max(1.0) * 0.5;
        (lo - d, hi + d)
    } else {
        let d = (hi - lo) * 0.04;
        (lo - d, hi + d)
    }
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
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

fn axes(out: &mut String, frame: &Frame, spec: &PlotSpec) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(frame.x.0, frame.x.1) {
        let px = frame.px(t);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="#000"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            y0 + 5.0,
            y0 + 20.0,
            format_sig(t)
        );
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let py = frame.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            format_sig(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0,
        escape(&axis_label(&spec.x))
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&axis_label(&spec.y))
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
}

fn legend(out: &mut String, title: &str, entries: &[(String, &str)]) {
    let x = WIDTH - RIGHT + 15.0;
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{}">{}</text>"#,
        TOP + 10.0,
        escape(title)
    );
    for (i, (label, colour)) in entries.iter().enumerate() {
        let y = TOP + 30.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(label)
        );
    }
}

/// Rows grouped by the `group` column (or a single unnamed group), in first-seen order.
fn groups(
    table: &Table,
    group: Option<usize>,
    xi: usize,
    yi: usize,
) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut order: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let (Some(x), Some(y)) = (row[xi].as_f64(), row[yi].as_f64()) else {
            continue;
        };
        let key = group.map_or_else(String::new, |g| match row[g].as_f64() {
            Some(v) => format_sig(v),
            None => format!("{:?}", row[g]),
        });
        match order.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x, y)),
            None => order.push((key, vec![(x, y)])),
        }
    }
    order
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Renders `table` as a standalone SVG document.
pub fn emit_svg(table: &Table, spec: &PlotSpec) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::param(format!(
            "cannot plot empty table {}",
            table.name
        )));
    }
    let xi = column(table, &spec.x)?;
    let yi = column(table, &spec.y)?;
    let gi = spec
        .group
        .as_deref()
        .map(|g| column(table, g))
        .transpose()?;

    let mut body = String::new();
    match spec.kind {
        PlotKind::Heatmap => {
            let vi = column(
                table,
                spec.value
                    .as_deref()
                    .ok_or_else(|| Error::param("heatmap needs a value column"))?,
            )?;
            let mut cells = BTreeMap::new();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for row in &table.rows {
                if let (Some(x), Some(y)) = (row[xi].as_f64(), row[yi].as_f64()) {
                    xs.push(x);
                    ys.push(y);
                    cells.insert((x.to_bits(), y.to_bits()), row[vi].as_f64());
                }
            }
            let sorted_unique = |mut v: Vec<f64>| {
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            };
            let xs = sorted_unique(xs);
            let ys = sorted_unique(ys);
            let vals: Vec<f64> = cells.values().flatten().copied().collect();
            let (vlo, vhi) =
                bounds(vals.iter()).ok_or_else(|| Error::param("heatmap has no numeric values"))?;
            let edges = |v: &[f64]| -> Vec<f64> {
                let half = if v.len() > 1 {
                    (v[1] - v[0]) / 2.0
                } else {
                    0.5
                };
                let mut e = vec![v[0] - half];
                e.extend(v.windows(2).map(|w| (w[0] + w[1]) / 2.0));
                e.push(
                    v[v.len() - 1]
                        + if v.len() > 1 {
                            (v[v.len() - 1] - v[v.len() - 2]) / 2.0
                        } else {
                            0.5
                        },
                );
                e
            };
            let (ex, ey) = (edges(&xs), edges(&ys));
            let frame = Frame {
                x: (ex[0], ex[ex.len() - 1]),
                y: (ey[0], ey[ey.len() - 1]),
            };
            let span = if vhi > vlo { vhi - vlo } else { 1.0 };
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    let fill = match cells.get(&(x.to_bits(), y.to_bits())) {
                        Some(Some(v)) => ramp((v - vlo) / span),
                        _ => "#ffffff".to_string(),
                    };
                    let (px0, px1) = (frame.px(ex[i]), frame.px(ex[i + 1]));
                    let (py0, py1) = (frame.py(ey[j + 1]), frame.py(ey[j]));
                    let _ = writeln!(
                        body,
                        r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                        px1 - px0 + 0.05,
                        py1 - py0 + 0.05
                    );
                }
            }
            axes(&mut body, &frame, spec);
            // Colour bar.
            let bx = WIDTH - RIGHT + 25.0;
            let steps = 50;
            let h = (HEIGHT - TOP - BOTTOM) / steps as f64;
            for k in 0..steps {
                let t = (k as f64 + 0.5) / steps as f64;
                let _ = writeln!(
                    body,
                    r#"<rect x="{bx}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#,
                    HEIGHT - BOTTOM - (k + 1) as f64 * h,
                    h + 0.05,
                    ramp(t)
                );
            }
            let label = spec.value.as_deref().map(axis_label).unwrap_or_default();
            let _ = writeln!(
                body,
                r#"<text x="{bx}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}">{}</text>"#,
                TOP - 8.0,
                escape(&label),
                bx + 24.0,
                TOP + 10.0,
                format_sig(vhi),
                bx + 24.0,
                HEIGHT - BOTTOM,
                format_sig(vlo)
            );
        }
        PlotKind::Scatter | PlotKind::Lines => {
            let mut series = groups(table, gi, xi, yi);
            if spec.kind == PlotKind::Scatter {
                let total: usize = series.iter().map(|(_, p)| p.len()).sum();
                let stride = total.div_ceil(spec.max_points.max(1)).max(1);
                for (_, pts) in &mut series {
                    *pts = pts.iter().step_by(stride).copied().collect();
                }
            }
            let (xlo, xhi) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| &q.0)))
                .ok_or_else(|| Error::param(format!("table {} has no numeric rows", table.name)))?;
            let (ylo, yhi) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| &q.1)))
                .unwrap_or((0.0, 1.0));
            let frame = Frame {
                x: padded(xlo, xhi),
                y: padded(ylo, yhi),
            };
            axes(&mut body, &frame, spec);
            for (k, (_, pts)) in series.iter().enumerate() {
                let colour = PALETTE[k % PALETTE.len()];
                if spec.kind == PlotKind::Lines {
                    let path: Vec<String> = pts
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                        .collect();
                    let _ = writeln!(
                        body,
                        r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
                        path.join(" ")
                    );
                }
                for &(x, y) in pts {
                    let r = if spec.kind == PlotKind::Lines {
                        3.0
                    } else {
                        1.0
                    };
                    let _ = writeln!(
                        body,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{colour}"/>"#,
                        frame.px(x),
                        frame.py(y)
                    );
                }
            }
            if let Some(g) = &spec.group {
                let entries: Vec<(String, &str)> = series
                    .iter()
                    .enumerate()
                    .map(|(k, (key, _))| (format!("{g} = {key}"), PALETTE[k % PALETTE.len()]))
                    .collect();
                legend(&mut body, "legend", &entries);
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}
