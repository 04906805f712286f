//! Minimal hand-rolled SVG line plots (axes, ticks, one polyline). CSV
//! remains the canonical output; these exist for quick visual checks.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Axis scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log10,
}

fn transform(v: f64, scale: AxisScale) -> Option<f64> {
    match scale {
        AxisScale::Linear => v.is_finite().then_some(v),
        AxisScale::Log10 => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= 6.0)
        .unwrap_or(mag * 10.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-12 * span {
        out.push(t);
        t += step;
    }
    out
}

/// Writes a single-series plot. Non-plottable points (non-positive on a
/// log axis, NaN) are skipped.
pub fn write_line_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    x_scale: AxisScale,
    y_scale: AxisScale,
) -> Result<()> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, &y)| Some((transform(x, x_scale)?, transform(y, y_scale)?)))
        .collect();
    let (x_lo, x_hi, y_lo, y_hi) = if pts.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        let x_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let x_hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let y_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let y_hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_lo, x_hi) = pad(x_lo, x_hi);
        let (y_lo, y_hi) = pad(y_lo, y_hi);
        (x_lo, x_hi, y_lo, y_hi)
    };
    let to_px = |x: f64, y: f64| {
        let px = MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        title
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    );
    let fmt_tick = |v: f64, scale: AxisScale| match scale {
        AxisScale::Linear => format!("{v:.3}"),
        AxisScale::Log10 => format!("1e{v:.0}"),
    };
    for t in ticks(x_lo, x_hi) {
        let (px, _) = to_px(t, y_lo);
        let _ = writeln!(
            svg,
            "<line x1=\"{px}\" y1=\"{b}\" x2=\"{px}\" y2=\"{b2}\" stroke=\"black\"/>\
             <text x=\"{px}\" y=\"{ty}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            fmt_tick(t, x_scale),
            b = HEIGHT - MARGIN,
            b2 = HEIGHT - MARGIN + 6.0,
            ty = HEIGHT - MARGIN + 20.0
        );
    }
    for t in ticks(y_lo, y_hi) {
        let (_, py) = to_px(x_lo, t);
        let _ = writeln!(
            svg,
            "<line x1=\"{m2}\" y1=\"{py}\" x2=\"{m}\" y2=\"{py}\" stroke=\"black\"/>\
             <text x=\"{tx}\" y=\"{ty}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            fmt_tick(t, y_scale),
            m = MARGIN,
            m2 = MARGIN - 6.0,
            tx = MARGIN - 9.0,
            ty = py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        x_label
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        y_label
    );
    if !pts.is_empty() {
        let mut d = String::from("<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1.5\" points=\"");
        for (x, y) in &pts {
            let (px, py) = to_px(*x, *y);
            let _ = write!(d, "{px:.2},{py:.2} ");
        }
        d.push_str("\"/>");
        let _ = writeln!(svg, "{d}");
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_wellformed_svg_and_skips_nonpositive_log_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.1, 0.0, 0.001];
        write_line_plot(
            &path,
            "demo",
            "tau",
            "value",
            &xs,
            &ys,
            AxisScale::Linear,
            AxisScale::Log10,
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("polyline"));
        assert!(text.trim_end().ends_with("</svg>"));
    }
}
