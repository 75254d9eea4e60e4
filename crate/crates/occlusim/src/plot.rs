//! Deterministic SVG rendering: line plots, heatmaps, and scatter plots.
//!
//! The renderer is intentionally small (fixed canvas, fixed palette,
//! fixed numeric formatting) so identical data produces identical bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::report::CsvTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis labels and scales for line and scatter plots.
#[derive(Debug, Clone, Default)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

struct Mapper {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_x: bool,
    log_y: bool,
}

impl Mapper {
    fn new(xs: &[f64], ys: &[f64], log_x: bool, log_y: bool) -> Mapper {
        let tx = |v: f64| if log_x { v.log10() } else { v };
        let ty = |v: f64| if log_y { v.log10() } else { v };
        let finite = |it: &[f64], f: &dyn Fn(f64) -> f64| -> (f64, f64) {
            let vals: Vec<f64> = it.iter().map(|&v| f(v)).filter(|v| v.is_finite()).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() && hi.is_finite() && lo < hi {
                (lo, hi)
            } else if lo.is_finite() {
                (lo - 0.5, lo + 0.5)
            } else {
                (0.0, 1.0)
            }
        };
        let (x0, x1) = finite(xs, &tx);
        let (y0, y1) = finite(ys, &ty);
        let pad_y = 0.05 * (y1 - y0);
        Mapper { x0, x1, y0: y0 - pad_y, y1: y1 + pad_y, log_x, log_y }
    }

    fn px(&self, x: f64) -> f64 {
        let v = if self.log_x { x.log10() } else { x };
        MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let v = if self.log_y { y.log10() } else { y };
        HEIGHT - MARGIN_B - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn x_ticks(&self) -> Vec<f64> {
        ticks(self.x0, self.x1, self.log_x)
    }

    fn y_ticks(&self) -> Vec<f64> {
        ticks(self.y0, self.y1, self.log_y)
    }
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let first = lo.floor() as i64;
        let last = hi.ceil() as i64;
        (first..=last).map(|e| 10f64.powi(e as i32)).collect()
    } else {
        let n = 5;
        (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect()
    }
}

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         fill=\"white\"/>\n<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes_svg(mapper: &Mapper, axes: &Axes) -> String {
    let mut out = String::new();
    let x_axis_y = HEIGHT - MARGIN_B;
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{x_axis_y}\" x2=\"{}\" y2=\"{x_axis_y}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_R
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{x_axis_y}\" stroke=\"black\"/>\n"
    ));
    for t in mapper.x_ticks() {
        let px = mapper.px(t);
        if !(MARGIN_L - 1.0..=WIDTH - MARGIN_R + 1.0).contains(&px) {
            continue;
        }
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{x_axis_y}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(px),
            fmt(px),
            fmt(x_axis_y + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt(px),
            fmt(x_axis_y + 18.0),
            fmt_tick(t)
        ));
    }
    for t in mapper.y_ticks() {
        let py = mapper.py(t);
        if !(MARGIN_T - 1.0..=HEIGHT - MARGIN_B + 1.0).contains(&py) {
            continue;
        }
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(MARGIN_L - 5.0),
            fmt(py),
            fmt(py)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_L - 8.0),
            fmt(py + 4.0),
            fmt_tick(t)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        escape(&axes.y_label)
    ));
    out
}

/// Multi-series line plot.
pub fn line_plot(series: &[Series], axes: &Axes) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let mapper = Mapper::new(&xs, &ys, axes.log_x, axes.log_y);
    let mut out = svg_header(&axes.title);
    out.push_str(&axes_svg(&mapper, axes));
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| {
                let (x, y) = (mapper.px(p.0), mapper.py(p.1));
                x.is_finite() && y.is_finite()
            })
            .map(|p| format!("{},{}", fmt(mapper.px(p.0)), fmt(mapper.py(p.1))))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            pts.join(" ")
        ));
        // Legend entry.
        let ly = MARGIN_T + 16.0 * i as f64 + 6.0;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            WIDTH - 170.0,
            ly,
            WIDTH - 150.0,
            ly
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            WIDTH - 145.0,
            ly + 4.0,
            escape(&s.name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale heatmap of a row-major matrix (row 0 at the top).
pub fn heatmap(rows: &[Vec<f64>], title: &str) -> String {
    let nr = rows.len().max(1);
    let nc = rows.first().map(|r| r.len()).unwrap_or(0).max(1);
    let lo = rows.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (WIDTH - MARGIN_L - MARGIN_R) / nc as f64;
    let ch = (HEIGHT - MARGIN_T - MARGIN_B) / nr as f64;
    let mut out = svg_header(title);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let g = (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8;
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({g},{g},{g})\"/>\n",
                fmt(MARGIN_L + j as f64 * cw),
                fmt(MARGIN_T + i as f64 * ch),
                fmt(cw + 0.5),
                fmt(ch + 0.5)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot: faint background dots plus numbered cross marks.
pub fn scatter(
    background: &[(f64, f64)],
    marks: &[(f64, f64, String)],
    axes: &Axes,
) -> String {
    let xs: Vec<f64> = background
        .iter()
        .map(|p| p.0)
        .chain(marks.iter().map(|m| m.0))
        .collect();
    let ys: Vec<f64> = background
        .iter()
        .map(|p| p.1)
        .chain(marks.iter().map(|m| m.1))
        .collect();
    let mapper = Mapper::new(&xs, &ys, false, false);
    let mut out = svg_header(&axes.title);
    out.push_str(&axes_svg(&mapper, axes));
    for (x, y) in background {
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"1.5\" fill=\"#555555\"/>\n",
            fmt(mapper.px(*x)),
            fmt(mapper.py(*y))
        ));
    }
    for (x, y, label) in marks {
        let (px, py) = (mapper.px(*x), mapper.py(*y));
        out.push_str(&format!(
            "<path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"#d62728\" stroke-width=\"1.6\"/>\n",
            fmt(px - 4.0),
            fmt(py - 4.0),
            fmt(px + 4.0),
            fmt(py + 4.0),
            fmt(px - 4.0),
            fmt(py + 4.0),
            fmt(px + 4.0),
            fmt(py - 4.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#d62728\">{}</text>\n",
            fmt(px + 5.0),
            fmt(py - 5.0),
            escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// JSON plot request for the CLI: renders a report (or matrix) CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotSpec {
    /// Line plot of `y` columns against the `x` column.
    Line {
        x: String,
        y: Vec<String>,
        #[serde(default)]
        log_x: bool,
        #[serde(default)]
        log_y: bool,
        #[serde(default)]
        title: String,
    },
    /// Scatter of two columns, optionally labeled by a third.
    Scatter {
        x: String,
        y: String,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        title: String,
    },
    /// Grayscale heatmap of a headerless numeric matrix CSV.
    Heatmap {
        #[serde(default)]
        title: String,
    },
}

/// Render a parsed CSV table (or raw matrix text for heatmaps) per spec.
pub fn render_plot(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    match spec {
        PlotSpec::Line { x, y, log_x, log_y, title } => {
            let table = CsvTable::parse(csv_text)?;
            let xs = table.column(x)?;
            let mut series = Vec::new();
            for name in y {
                let ys = table.column(name)?;
                series.push(Series {
                    name: name.clone(),
                    points: xs.iter().copied().zip(ys).collect(),
                });
            }
            Ok(line_plot(
                &series,
                &Axes {
                    title: title.clone(),
                    x_label: x.clone(),
                    y_label: y.join(", "),
                    log_x: *log_x,
                    log_y: *log_y,
                },
            ))
        }
        PlotSpec::Scatter { x, y, label, title } => {
            let table = CsvTable::parse(csv_text)?;
            let xs = table.column(x)?;
            let ys = table.column(y)?;
            let marks: Vec<(f64, f64, String)> = match label {
                Some(lcol) => {
                    let ls = table.column(lcol)?;
                    xs.iter()
                        .zip(&ys)
                        .zip(&ls)
                        .map(|((x, y), l)| (*x, *y, format!("{l}")))
                        .collect()
                }
                None => xs.iter().zip(&ys).map(|(x, y)| (*x, *y, String::new())).collect(),
            };
            Ok(scatter(
                &[],
                &marks,
                &Axes {
                    title: title.clone(),
                    x_label: x.clone(),
                    y_label: y.clone(),
                    ..Axes::default()
                },
            ))
        }
        PlotSpec::Heatmap { title } => {
            let rows: Vec<Vec<f64>> = csv_text
                .lines()
                .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
                .map(|l| {
                    l.split(',')
                        .map(|c| {
                            c.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::Config(format!("bad matrix cell: {e}")))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            if rows.is_empty() {
                return Err(Error::Empty("heatmap matrix is empty".into()));
            }
            Ok(heatmap(&rows, title))
        }
    }
}

/// Matrix rows as a headerless CSV (heatmap input, external inspection).
pub fn matrix_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
