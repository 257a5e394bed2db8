//! `eby plot`: line chart of one CSV column against `K` (or `epsilon`).

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const SERIES_COLUMNS: [&str; 3] = ["setting", "method", "metric"];

/// Parsed chart data: one sorted point list per series.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub x_label: String,
    pub y_label: String,
    pub series: BTreeMap<String, Vec<(f64, f64)>>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}

/// Reads a CSV written by `simulate`. `metric` defaults to `fcr_mean`, or
/// `mean` when that column is absent.
pub fn parse_chart(csv_text: &str, metric: Option<&str>) -> CliResult<Chart> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| bad(format!("malformed CSV: {e}")))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(bad("CSV is empty"));
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let x_name = ["epsilon", "K"]
        .into_iter()
        .find(|n| col(n).is_some())
        .ok_or_else(|| bad("CSV needs a K or epsilon column"))?;
    let y_name = match metric {
        Some(m) => m,
        None if col("fcr_mean").is_some() => "fcr_mean",
        None => "mean",
    };
    let x_idx = col(x_name).unwrap();
    let y_idx = col(y_name).ok_or_else(|| bad(format!("CSV has no column {y_name}")))?;
    let key_idx: Vec<usize> = SERIES_COLUMNS.iter().filter_map(|n| col(n)).collect();

    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(format!("malformed CSV: {e}")))?;
        let number = |i: usize| -> CliResult<f64> {
            let field = record.get(i).ok_or_else(|| bad("short CSV row"))?;
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: {field:?}")))
        };
        let key = if key_idx.is_empty() {
            y_name.to_string()
        } else {
            key_idx
                .iter()
                .map(|&i| record.get(i).unwrap_or(""))
                .collect::<Vec<_>>()
                .join(" / ")
        };
        series.entry(key).or_default().push((number(x_idx)?, number(y_idx)?));
    }
    if series.is_empty() {
        return Err(bad("CSV has no data rows"));
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(Chart {
        x_label: x_name.to_string(),
        y_label: y_name.to_string(),
        series,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: &[f64], allow_log: bool) -> Self {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let (mut lo, mut hi) = finite
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if finite.is_empty() {
            (lo, hi) = (0.0, 1.0);
        }
        let log = allow_log && lo > 0.0 && hi / lo > 100.0;
        if log {
            return Self {
                lo: lo.log10().floor(),
                hi: hi.log10().ceil(),
                log,
            };
        }
        if hi - lo <= 0.0 {
            let pad = if lo == 0.0 { 0.5 } else { 0.1 * lo.abs() };
            lo -= pad;
            hi += pad;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo as i32..=self.hi as i32).map(|p| 10f64.powi(p)).collect()
        } else {
            (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
        }
    }
}

pub fn render_svg(chart: &Chart) -> String {
    let xs: Vec<f64> = chart.series.values().flatten().map(|p| p.0).collect();
    let ys: Vec<f64> = chart.series.values().flatten().map(|p| p.1).collect();
    let x_axis = Axis::new(&xs, true);
    let y_axis = Axis::new(&ys, false);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x_axis.frac(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - y_axis.frac(y)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{} vs {}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&chart.y_label),
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for t in x_axis.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            tick_label(t)
        );
    }
    for t in y_axis.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );
    for (n, (name, points)) in chart.series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * n as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
