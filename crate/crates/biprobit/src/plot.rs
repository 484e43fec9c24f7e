//! Static SVG renders of the result tables. Hand-rolled and dependency-free
//! so figures come out of the same run that produced the numbers, with no
//! plotting runtime. All output is deterministic in the input.

use crate::effects::SensitivityReport;
use crate::eval::{PrCurve, SelectionReport};

const PALETTE: [&str; 6] =
    ["#1f6f8b", "#d1495b", "#66a182", "#8d5a97", "#e6a23c", "#4a4e69"];
const AXIS: &str = "#555555";
const GRID: &str = "#dddddd";
const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Plot rectangle in pixel space; y runs downward in SVG.
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.xmin) / (self.xmax - self.xmin) * self.w
    }
    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.ymin) / (self.ymax - self.ymin) * self.h
    }
}

fn open_svg(width: f64, height: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"{tx}\" y=\"24\" {FONT} font-size=\"15\" font-weight=\"bold\" \
         text-anchor=\"middle\">{t}</text>\n",
        tx = width / 2.0,
        t = esc(title),
    )
}

fn axis_line(x1: f64, y1: f64, x2: f64, y2: f64, color: &str, width: f64, dash: &str) -> String {
    let dash_attr =
        if dash.is_empty() { String::new() } else { format!(" stroke-dasharray=\"{dash}\"") };
    format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" \
         stroke-width=\"{width}\"{dash_attr}/>\n",
        fmt(x1),
        fmt(y1),
        fmt(x2),
        fmt(y2),
    )
}

fn text(x: f64, y: f64, size: u32, anchor: &str, fill: &str, s: &str) -> String {
    format!(
        "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"{size}\" text-anchor=\"{anchor}\" \
         fill=\"{fill}\">{}</text>\n",
        fmt(x),
        fmt(y),
        esc(s),
    )
}

/// Frame border plus x-axis ticks, grid lines, and axis titles.
fn decorate_x(frame: &Frame, ticks: &[f64], x_label: &str) -> String {
    let mut s = String::new();
    s += &axis_line(frame.x0, frame.y0 + frame.h, frame.x0 + frame.w, frame.y0 + frame.h, AXIS, 1.0, "");
    s += &axis_line(frame.x0, frame.y0, frame.x0, frame.y0 + frame.h, AXIS, 1.0, "");
    for &t in ticks {
        let px = frame.x(t);
        s += &axis_line(px, frame.y0, px, frame.y0 + frame.h, GRID, 0.6, "");
        s += &axis_line(px, frame.y0 + frame.h, px, frame.y0 + frame.h + 4.0, AXIS, 1.0, "");
        s += &text(px, frame.y0 + frame.h + 16.0, 10, "middle", AXIS, &fmt(t));
    }
    s += &text(frame.x0 + frame.w / 2.0, frame.y0 + frame.h + 32.0, 11, "middle", AXIS, x_label);
    s
}

fn even_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Step curves of precision against recall, one per labeled model.
pub fn pr_curves_svg(curves: &[(&str, &PrCurve)], title: &str) -> String {
    let (width, height) = (560.0, 420.0);
    let frame = Frame {
        x0: 60.0,
        y0: 44.0,
        w: width - 90.0,
        h: height - 110.0,
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut svg = open_svg(width, height, title);
    svg += &decorate_x(&frame, &even_ticks(0.0, 1.0, 4), "recall");
    for &t in &even_ticks(0.0, 1.0, 4) {
        let py = frame.y(t);
        svg += &axis_line(frame.x0, py, frame.x0 + frame.w, py, GRID, 0.6, "");
        svg += &text(frame.x0 - 8.0, py + 3.0, 10, "end", AXIS, &fmt(t));
    }
    svg += &format!(
        "<text x=\"18\" y=\"{}\" {FONT} font-size=\"11\" fill=\"{AXIS}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">precision</text>\n",
        fmt(frame.y0 + frame.h / 2.0),
        fmt(frame.y0 + frame.h / 2.0),
    );
    for (k, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        // Steps: precision is held over each recall increment.
        let mut d = format!("M {} {}", fmt(frame.x(0.0)), fmt(frame.y(curve.precision[0])));
        let mut prev_p = curve.precision[0];
        for i in 0..curve.recall.len() {
            if curve.precision[i] != prev_p {
                d += &format!(" V {}", fmt(frame.y(curve.precision[i])));
                prev_p = curve.precision[i];
            }
            d += &format!(" H {}", fmt(frame.x(curve.recall[i])));
        }
        svg += &format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
        );
        let ly = frame.y0 + 14.0 + 16.0 * k as f64;
        svg += &axis_line(frame.x0 + frame.w - 120.0, ly - 4.0, frame.x0 + frame.w - 100.0, ly - 4.0, color, 2.5, "");
        svg += &text(
            frame.x0 + frame.w - 94.0,
            ly,
            10,
            "start",
            "#222222",
            &format!("{} (area {:.3})", label, curve.auc),
        );
    }
    svg + "</svg>\n"
}

struct BarSpec<'a> {
    label: &'a str,
    value: Option<f64>,
    note: &'a str,
    highlight: bool,
}

/// Horizontal bars in the given row order, with optional reference lines.
fn hbar_chart(
    title: &str,
    x_label: &str,
    rows: &[BarSpec],
    references: &[f64],
    include_zero: bool,
) -> String {
    let row_h = 22.0;
    let width = 560.0;
    let height = 110.0 + row_h * rows.len() as f64;
    let values: Vec<f64> = rows.iter().filter_map(|r| r.value).collect();
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    for &r in references {
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.08 * (hi - lo);
    let frame = Frame {
        x0: 90.0,
        y0: 44.0,
        w: width - 130.0,
        h: row_h * rows.len() as f64,
        xmin: lo - pad,
        xmax: hi + pad,
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut svg = open_svg(width, height, title);
    svg += &decorate_x(&frame, &even_ticks(frame.xmin, frame.xmax, 4), x_label);
    for &r in references {
        svg += &axis_line(frame.x(r), frame.y0, frame.x(r), frame.y0 + frame.h, "#999999", 1.0, "4 3");
    }
    let zero = frame.x(0.0_f64.clamp(frame.xmin, frame.xmax));
    for (i, row) in rows.iter().enumerate() {
        let yc = frame.y0 + row_h * (i as f64 + 0.5);
        svg += &text(frame.x0 - 8.0, yc + 3.5, 10, "end", "#222222", row.label);
        match row.value {
            Some(v) => {
                let px = frame.x(v);
                let (bx, bw) = if px >= zero { (zero, px - zero) } else { (px, zero - px) };
                let color = if row.highlight { PALETTE[1] } else { PALETTE[0] };
                svg += &format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\" \
                     fill-opacity=\"0.85\"/>\n",
                    fmt(bx),
                    fmt(yc - 7.0),
                    fmt(bw.max(0.5)),
                    fmt(14.0),
                );
                let anchor = if px >= zero { "start" } else { "end" };
                let off = if px >= zero { 4.0 } else { -4.0 };
                svg += &text(px + off, yc + 3.5, 9, anchor, "#222222", &format!("{v:.3}"));
            }
            None => {
                svg += &text(zero + 4.0, yc + 3.5, 9, "start", "#aa3333", row.note);
            }
        }
    }
    svg + "</svg>\n"
}

/// Ranked out-of-sample PR-AUC per copula spec (best bar on top).
pub fn selection_bars_svg(report: &SelectionReport) -> String {
    let rows: Vec<BarSpec> = report
        .rows
        .iter()
        .map(|r| BarSpec {
            label: &r.code,
            value: r.pr_auc,
            note: if r.error.is_some() { "failed" } else { "no score" },
            highlight: r.code == report.winner,
        })
        .collect();
    hbar_chart(
        "Out-of-sample PR-AUC by copula",
        "PR-AUC (held-out rows)",
        &rows,
        &[],
        true,
    )
}

/// Treatment-coefficient z statistics across copula specs, with the
/// conventional two-sided 5% reference lines at ±1.96.
pub fn sensitivity_z_svg(report: &SensitivityReport) -> String {
    let rows: Vec<BarSpec> = report
        .rows
        .iter()
        .map(|r| BarSpec {
            label: &r.code,
            value: r.gamma_z,
            note: if r.error.is_some() { "failed" } else { "no z statistic" },
            highlight: r.gamma_z.map(|z| z.abs() >= 1.96).unwrap_or(false),
        })
        .collect();
    hbar_chart(
        "Treatment z statistic by copula",
        "z statistic (reference lines at ±1.96)",
        &rows,
        &[-1.96, 1.96],
        true,
    )
}

/// Average treatment effects with simulation intervals across copula specs.
pub fn sensitivity_ate_svg(report: &SensitivityReport) -> String {
    let row_h = 22.0;
    let rows = &report.rows;
    let width = 560.0;
    let height = 110.0 + row_h * rows.len() as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in rows {
        if let Some(a) = &r.ate {
            lo = lo.min(a.ci_lower);
            hi = hi.max(a.ci_upper);
        }
    }
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    lo = lo.min(0.0);
    hi = hi.max(0.0);
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.08 * (hi - lo);
    let frame = Frame {
        x0: 90.0,
        y0: 44.0,
        w: width - 130.0,
        h: row_h * rows.len() as f64,
        xmin: lo - pad,
        xmax: hi + pad,
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut svg = open_svg(width, height, "Average treatment effect by copula");
    svg += &decorate_x(
        &frame,
        &even_ticks(frame.xmin, frame.xmax, 4),
        "average treatment effect (simulation interval)",
    );
    svg += &axis_line(frame.x(0.0), frame.y0, frame.x(0.0), frame.y0 + frame.h, "#999999", 1.0, "4 3");
    for (i, row) in rows.iter().enumerate() {
        let yc = frame.y0 + row_h * (i as f64 + 0.5);
        svg += &text(frame.x0 - 8.0, yc + 3.5, 10, "end", "#222222", &row.code);
        match &row.ate {
            Some(a) => {
                svg += &axis_line(frame.x(a.ci_lower), yc, frame.x(a.ci_upper), yc, PALETTE[0], 1.8, "");
                for &cap in &[a.ci_lower, a.ci_upper] {
                    svg += &axis_line(frame.x(cap), yc - 4.0, frame.x(cap), yc + 4.0, PALETTE[0], 1.8, "");
                }
                svg += &format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3.4\" fill=\"{}\"/>\n",
                    fmt(frame.x(a.point)),
                    fmt(yc),
                    PALETTE[1],
                );
            }
            None => {
                let note = if row.error.is_some() { "failed" } else { "no effect estimate" };
                svg += &text(frame.x(0.0) + 4.0, yc + 3.5, 9, "start", "#aa3333", note);
            }
        }
    }
    svg + "</svg>\n"
}
