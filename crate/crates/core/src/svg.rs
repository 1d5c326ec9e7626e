//! Minimal self-contained SVG plots: the per-run profile in double-log
//! coordinates with its fitted segments, and the collapse plot with the
//! bisectrix. No external assets; coordinates are written with two decimals
//! so identical inputs give identical bytes.

use crate::diagnostics::CollapsePoint;
use crate::report::{fmt_sig, RunAnalysis};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 54.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Affine map from data coordinates to pixels along one axis.
struct AxisMap {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl AxisMap {
    fn new(mut d0: f64, mut d1: f64, p0: f64, p1: f64) -> Self {
        if d0 == d1 {
            d0 -= 1.0;
            d1 += 1.0;
        } else {
            let pad = 0.04 * (d1 - d0);
            d0 -= pad;
            d1 += pad;
        }
        AxisMap { d0, d1, p0, p1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.d0 + (self.d1 - self.d0) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct SvgDoc {
    body: String,
}

impl SvgDoc {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        body.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        body.push_str(&format!(
            "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
            px(WIDTH / 2.0),
            escape(title)
        ));
        SvgDoc { body }
    }

    fn frame(&mut self, xm: &AxisMap, ym: &AxisMap, x_label: &str, y_label: &str, log_ticks: bool) {
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            px(MARGIN_LEFT),
            px(MARGIN_TOP),
            px(WIDTH - MARGIN_LEFT - MARGIN_RIGHT),
            px(HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
        ));
        for t in xm.ticks(5) {
            let x = xm.map(t);
            let y0 = HEIGHT - MARGIN_BOTTOM;
            let label = if log_ticks {
                fmt_sig(10f64.powf(t), 4)
            } else {
                fmt_sig(t, 4)
            };
            self.body.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
                px(x),
                px(y0),
                px(y0 + 5.0)
            ));
            self.body.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                px(x),
                px(y0 + 18.0),
                label
            ));
        }
        for t in ym.ticks(5) {
            let y = ym.map(t);
            let label = if log_ticks {
                fmt_sig(10f64.powf(t), 4)
            } else {
                fmt_sig(t, 4)
            };
            self.body.push_str(&format!(
                "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n",
                px(y),
                px(MARGIN_LEFT - 5.0),
                px(MARGIN_LEFT)
            ));
            self.body.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                px(MARGIN_LEFT - 8.0),
                px(y + 4.0),
                label
            ));
        }
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            px((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
            px(HEIGHT - 14.0),
            escape(x_label)
        ));
        self.body.push_str(&format!(
            "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            px((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
            px((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
            escape(y_label)
        ));
    }

    fn circle(&mut self, x: f64, y: f64, color: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\" fill-opacity=\"0.75\"/>\n",
            px(x),
            px(y)
        ));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, dash: Option<&str>) {
        let dash_attr = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        self.body.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>\n",
            px(x1),
            px(y1),
            px(x2),
            px(y2)
        ));
    }

    fn label(&mut self, x: f64, y: f64, text: &str, color: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            px(x),
            px(y),
            escape(text)
        ));
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Per-run profile plot in (log10 y+, log10 U+) with both fitted segments,
/// the breakpoint, and the y+ = 200 reference line.
pub fn profile_plot(run: &RunAnalysis) -> String {
    let pts = run.profile.points();
    let xs: Vec<f64> = pts.iter().map(|p| p.y_plus.log10()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.u_plus.log10()).collect();
    let (x_lo, x_hi) = min_max(&xs);
    let (y_lo, y_hi) = min_max(&ys);
    let xm = AxisMap::new(x_lo, x_hi, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let ym = AxisMap::new(y_lo, y_hi, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);

    let mut doc = SvgDoc::new(&format!(
        "{} (Re_theta = {})",
        run.report.label,
        fmt_sig(run.report.re_theta, 6)
    ));
    doc.frame(&xm, &ym, "y+", "U+", true);

    // y+ = 200 reference line.
    let x200 = 200f64.log10();
    if x200 > xm.d0 && x200 < xm.d1 {
        doc.line(
            xm.map(x200),
            ym.map(ym.d0),
            xm.map(x200),
            ym.map(ym.d1),
            "#ff7f0e",
            Some("6 4"),
        );
        doc.label(xm.map(x200) + 4.0, MARGIN_TOP + 14.0, "y+=200", "#ff7f0e");
    }

    // Breakpoint marker.
    let xbp = run.segmented.breakpoint_y_plus.log10();
    doc.line(
        xm.map(xbp),
        ym.map(ym.d0),
        xm.map(xbp),
        ym.map(ym.d1),
        "#7f7f7f",
        Some("2 3"),
    );

    // Fitted segments are straight lines in double-log coordinates.
    for (fit, color) in [(&run.segmented.region1, "#d62728"), (&run.segmented.region2, "#2ca02c")]
    {
        let (wlo, whi) = (fit.window.lo, fit.window.hi);
        let y_at = |y_plus: f64| (fit.amplitude * y_plus.powf(fit.exponent)).log10();
        doc.line(
            xm.map(wlo.log10()),
            ym.map(y_at(wlo)),
            xm.map(whi.log10()),
            ym.map(y_at(whi)),
            color,
            None,
        );
    }

    for (&x, &y) in xs.iter().zip(&ys) {
        doc.circle(xm.map(x), ym.map(y), "#1f77b4");
    }
    doc.finish()
}

/// Collapse plot: psi against ln y+ for every run, with the bisectrix.
pub fn collapse_plot(points: &[CollapsePoint]) -> String {
    let mut doc = SvgDoc::new("Universal collapse");
    if points.is_empty() {
        doc.label(WIDTH / 2.0 - 40.0, HEIGHT / 2.0, "no points", "black");
        return doc.finish();
    }
    let xs: Vec<f64> = points.iter().map(|p| p.ln_y_plus).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.psi).collect();
    let (x_lo, x_hi) = min_max(&xs);
    let (y_lo, y_hi) = min_max(&ys);
    let xm = AxisMap::new(x_lo, x_hi, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let ym = AxisMap::new(y_lo, y_hi, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    doc.frame(&xm, &ym, "ln y+", "psi", false);

    // Bisectrix psi = ln y+ across the x span.
    doc.line(
        xm.map(xm.d0),
        ym.map(xm.d0),
        xm.map(xm.d1),
        ym.map(xm.d1),
        "black",
        Some("5 4"),
    );

    // Stable label -> colour assignment in first-appearance order.
    let mut labels: Vec<&str> = Vec::new();
    for p in points {
        if !labels.contains(&p.run_label.as_str()) {
            labels.push(&p.run_label);
        }
    }
    for p in points {
        let idx = labels.iter().position(|l| *l == p.run_label).unwrap_or(0);
        doc.circle(
            xm.map(p.ln_y_plus),
            ym.map(p.psi),
            PALETTE[idx % PALETTE.len()],
        );
    }
    doc.finish()
}

fn min_max(vals: &[f64]) -> (f64, f64) {
    vals.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse_plot_keeps_bisectrix_points_on_the_diagonal() {
        let points: Vec<CollapsePoint> = (0..30)
            .map(|i| {
                let t = 4.0 + 0.1 * i as f64;
                CollapsePoint {
                    ln_y_plus: t,
                    psi: t,
                    run_label: format!("r{}", i % 3),
                }
            })
            .collect();
        let svg = collapse_plot(&points);

        // Recover the drawn diagonal and every marker from the emitted text.
        let diag = svg
            .lines()
            .find(|l| l.contains("stroke-dasharray=\"5 4\""))
            .expect("bisectrix present");
        let num = |l: &str, key: &str| -> f64 {
            let start = l.find(key).unwrap() + key.len();
            let rest = &l[start..];
            rest[..rest.find('"').unwrap()].parse().unwrap()
        };
        let (x1, y1) = (num(diag, "x1=\""), num(diag, "y1=\""));
        let (x2, y2) = (num(diag, "x2=\""), num(diag, "y2=\""));
        let slope = (y2 - y1) / (x2 - x1);
        for line in svg.lines().filter(|l| l.starts_with("<circle")) {
            let (cx, cy) = (num(line, "cx=\""), num(line, "cy=\""));
            let on_line = y1 + slope * (cx - x1);
            assert!(
                (cy - on_line).abs() <= 0.5,
                "marker ({cx},{cy}) off the diagonal by {}",
                (cy - on_line).abs()
            );
        }
    }

    #[test]
    fn collapse_plot_handles_empty_input() {
        let svg = collapse_plot(&[]);
        assert!(svg.contains("no points"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
