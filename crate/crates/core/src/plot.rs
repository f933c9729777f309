//! Minimal SVG line charts with logarithmic axes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::harness::summarize_values;
use crate::report::{format_float, SummaryKind, SummaryLine, TrialRow};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = (hi - lo) * 0.05;
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let decades: Vec<f64> = (self.lo.ceil() as i32..=self.hi.floor() as i32)
                .map(|e| 10f64.powi(e))
                .collect();
            if decades.len() >= 2 {
                return decades;
            }
            let mut out = Vec::new();
            for e in (self.lo.floor() as i32)..=(self.hi.ceil() as i32) {
                for m in [1.0, 2.0, 5.0] {
                    let v = m * 10f64.powi(e);
                    let l = v.log10();
                    if l >= self.lo && l <= self.hi {
                        out.push(v);
                    }
                }
            }
            out
        } else {
            let span = self.hi - self.lo;
            let step = 10f64.powf((span / 5.0).log10().floor());
            let mut v = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= self.hi {
                out.push(v);
                v += step;
            }
            out
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(chart: &Chart) -> String {
    let usable = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let visible: Vec<Vec<(f64, f64)>> = chart
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .copied()
                .filter(|&(x, y)| usable(x, chart.log_x) && usable(y, chart.log_y))
                .collect()
        })
        .collect();
    let x_axis = Axis::fit(visible.iter().flatten().map(|p| p.0), chart.log_x);
    let y_axis = Axis::fit(visible.iter().flatten().map(|p| p.1), chart.log_y);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x_axis.unit(x) * plot_w;
    let sy = |y: f64| TOP + (1.0 - y_axis.unit(y)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for t in x_axis.ticks() {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 16.0,
            format_float(t)
        );
    }
    for t in y_axis.ticks() {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            format_float(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );

    for (i, (series, points)) in chart.series.iter().zip(&visible).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in points {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Normalized runtime against p, one line per n.
pub fn p_sweep_chart(lines: &[SummaryLine]) -> Chart {
    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for l in lines {
        if let Some(y) = l.normalized_mean {
            by_n.entry(l.n).or_default().push((l.p, y));
        }
    }
    Chart {
        title: "SA-(1,λ)-EA with resets on distorted OneMax".into(),
        x_label: "distortion probability p".into(),
        y_label: "T · p / (n ln n)".into(),
        log_x: true,
        log_y: true,
        series: by_n
            .into_iter()
            .map(|(n, mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series {
                    label: format!("n = {n}"),
                    points,
                    dashed: false,
                }
            })
            .collect(),
    }
}

/// Median evaluations against n, one line per algorithm plus the reference.
pub fn comparison_chart(lines: &[SummaryLine]) -> Chart {
    let mut by_algo: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for l in lines {
        let name = l.algorithm.clone().unwrap_or_default();
        by_algo.entry(name).or_default().push((l.n as f64, l.median));
    }
    Chart {
        title: "Median evaluations to reach n - k*".into(),
        x_label: "n".into(),
        y_label: "evaluations".into(),
        log_x: true,
        log_y: true,
        series: by_algo
            .into_iter()
            .map(|(name, mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                let dashed = name == crate::report::REFERENCE_LABEL;
                Series {
                    label: if dashed { "n ln n / p".into() } else { name },
                    points,
                    dashed,
                }
            })
            .collect(),
    }
}

pub fn summary_chart(kind: SummaryKind, lines: &[SummaryLine]) -> Chart {
    match kind {
        SummaryKind::PSweep => p_sweep_chart(lines),
        SummaryKind::AlgorithmComparison => comparison_chart(lines),
    }
}

/// Median evaluations from raw trial rows.
///
/// Plotted against p (one line per algorithm and n) when p varies within
/// a group, otherwise against n (one line per algorithm).
pub fn trials_chart(rows: &[TrialRow]) -> Chart {
    let mut groups: BTreeMap<(String, usize, u64), (Vec<f64>, u64, f64)> = BTreeMap::new();
    for r in rows {
        let e = groups
            .entry((r.algorithm.clone(), r.n, r.p.to_bits()))
            .or_insert((Vec::new(), 0, r.p));
        e.0.push(r.evaluations as f64);
        e.1 += r.censored as u64;
    }
    let medians: Vec<(String, usize, f64, f64)> = groups
        .into_iter()
        .map(|((algo, n, _), (values, censored, p))| {
            let median = summarize_values(&values, censored, n, p).expect("non-empty group").median;
            (algo, n, p, median)
        })
        .collect();
    let p_varies = {
        let mut seen: BTreeMap<(&str, usize), f64> = BTreeMap::new();
        medians
            .iter()
            .any(|(a, n, p, _)| *seen.entry((a.as_str(), *n)).or_insert(*p) != *p)
    };
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (algo, n, p, median) in &medians {
        if p_varies {
            series.entry(format!("{algo} n={n}")).or_default().push((*p, *median));
        } else {
            series.entry(algo.clone()).or_default().push((*n as f64, *median));
        }
    }
    Chart {
        title: "Median evaluations".into(),
        x_label: if p_varies { "p".into() } else { "n".into() },
        y_label: "evaluations".into(),
        log_x: true,
        log_y: true,
        series: series
            .into_iter()
            .map(|(label, mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series {
                    label,
                    points,
                    dashed: false,
                }
            })
            .collect(),
    }
}
