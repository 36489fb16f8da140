//! Standalone SVG scatter plots with the raw points alongside as CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RatioTable, ResultRow};
use crate::order_stats::{qk_exact, smirnov_limit, BoundarySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotAxis {
    X,
    Y,
    Z,
    ZOverY,
    K,
    V,
}

impl PlotAxis {
    fn label(self) -> &'static str {
        match self {
            PlotAxis::X => "x",
            PlotAxis::Y => "y",
            PlotAxis::Z => "z",
            PlotAxis::ZOverY => "z/y",
            PlotAxis::K => "k",
            PlotAxis::V => "v",
        }
    }

    fn of(self, row: &ResultRow) -> Option<f64> {
        match self {
            PlotAxis::X => row.x.map(|x| x as f64),
            PlotAxis::Y => row.y,
            PlotAxis::Z => row.z,
            PlotAxis::ZOverY => Some(row.z? / row.y?),
            PlotAxis::K => row.k.map(|k| k as f64),
            PlotAxis::V => row.v,
        }
    }
}

impl std::str::FromStr for PlotAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => PlotAxis::X,
            "y" => PlotAxis::Y,
            "z" => PlotAxis::Z,
            "z_over_y" => PlotAxis::ZOverY,
            "k" => PlotAxis::K,
            "v" => PlotAxis::V,
            _ => {
                return Err(Error::Lookup {
                    kind: "plot axis",
                    id: s.into(),
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl PlotData {
    /// Log-log scatter of the ratio against one grid parameter.
    pub fn from_ratio_table(table: &RatioTable, axis: PlotAxis) -> Self {
        let points = table
            .rows
            .iter()
            .filter_map(|r| Some((axis.of(r)?, r.ratio?)))
            .collect();
        PlotData {
            title: format!("{} / {}", table.counter, table.predictor),
            x_label: axis.label().into(),
            y_label: "ratio".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                name: "ratio".into(),
                points,
            }],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("series,{},{}\n", self.x_label, self.y_label);
        for s in &self.series {
            for (x, y) in &s.points {
                let _ = writeln!(out, "{},{x},{y}", s.name);
            }
        }
        out
    }

    fn visible(&self) -> Vec<(usize, f64, f64)> {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        self.series
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.points.iter().map(move |&(x, y)| (i, tx(x), ty(y))))
            .filter(|(_, x, y)| x.is_finite() && y.is_finite())
            .collect()
    }

    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const L: f64 = 70.0;
        const R: f64 = 20.0;
        const T: f64 = 40.0;
        const B: f64 = 50.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

        let pts = self.visible();
        let range = |f: fn(&(usize, f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            match (lo.is_finite(), hi > lo) {
                (false, _) => (0.0, 1.0),
                (true, true) => (lo, hi),
                (true, false) => (lo - 0.5, lo + 0.5),
            }
        };
        let (x0, x1) = range(|p| p.1);
        let (y0, y1) = range(|p| p.2);
        let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
        let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);
        let tick = |v: f64, log: bool| {
            if log {
                format!("{:.3e}", 10f64.powf(v))
            } else {
                format!("{v:.4}")
            }
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<polyline points="{L},{T} {L},{} {},{}" fill="none" stroke="black"/>"#,
            H - B,
            W - R,
            H - B
        );
        for (v, anchor) in [(x0, "start"), (x1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="{anchor}">{}</text>"#,
                px(v),
                H - B + 16.0,
                tick(v, self.log_x)
            );
        }
        for v in [y0, y1] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                L - 4.0,
                py(v) + 4.0,
                tick(v, self.log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
            (L + W - R) / 2.0,
            H - 12.0,
            escape(&self.x_label),
            if self.log_x { " (log)" } else { "" }
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}{}</text>"#,
            (T + H - B) / 2.0,
            (T + H - B) / 2.0,
            escape(&self.y_label),
            if self.log_y { " (log)" } else { "" }
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            for &(_, x, y) in pts.iter().filter(|p| p.0 == i) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(x),
                    py(y)
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                L + 10.0,
                T + 14.0 * (i as f64 + 1.0),
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFiles {
    pub svg: PathBuf,
    pub csv: PathBuf,
}

/// Writes `<stem>.svg` and `<stem>.csv`.
pub fn emit_plot_data(data: &PlotData, stem: &Path) -> Result<PlotFiles> {
    if data.series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Precondition("plot data has no points".into()));
    }
    let files = PlotFiles {
        svg: stem.with_extension("svg"),
        csv: stem.with_extension("csv"),
    };
    std::fs::write(&files.svg, data.to_svg())?;
    std::fs::write(&files.csv, data.to_csv())?;
    Ok(files)
}

/// `Q_k(λ√k, k)` against the limit `1 - e^{-2λ²}` over the given `λ`.
pub fn smirnov_plot_data(k: usize, lambdas: &[f64]) -> Result<PlotData> {
    let mut exact = Vec::with_capacity(lambdas.len());
    let mut limit = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let spec = BoundarySpec::new(k, l * (k as f64).sqrt(), k as f64)?;
        exact.push((l, qk_exact(&spec)?));
        limit.push((l, smirnov_limit(l)?));
    }
    Ok(PlotData {
        title: format!("Q_k boundary probability, k = {k}"),
        x_label: "lambda".into(),
        y_label: "probability".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                name: format!("Q_{k}"),
                points: exact,
            },
            Series {
                name: "1 - exp(-2 lambda^2)".into(),
                points: limit,
            },
        ],
    })
}
