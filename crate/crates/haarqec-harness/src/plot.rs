//! Standalone SVG scatter of the scaling data.

use crate::fit::ScalingFit;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 64.0;

/// Scatter of `log10(mean delta)` against `log10(Km/N)` with the fitted
/// line. `points` holds raw (ratio, mean delta) pairs.
pub fn scaling_plot_svg(points: &[(f64, f64)], fit: &ScalingFit) -> String {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &logs {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if logs.is_empty() {
        x0 = -1.0;
        x1 = 0.0;
        y0 = -1.0;
        y1 = 0.0;
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(0.2);
        *lo -= 0.08 * span;
        *hi += 0.08 * span;
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = (W - 2.0 * MARGIN) / (x1 - x0);
    let sy = (H - 2.0 * MARGIN) / (y1 - y0);
    let px = |x: f64| MARGIN + (x - x0) * sx;
    let py = |y: f64| H - MARGIN - (y - y0) * sy;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN,
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    ));
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN,
        MARGIN,
        MARGIN,
        H - MARGIN
    ));
    // Decade ticks.
    let mut tick = x0.ceil();
    while tick <= x1 {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n<text x=\"{0}\" y=\"{3}\" font-size=\"12\" text-anchor=\"middle\">1e{4}</text>\n",
            px(tick),
            H - MARGIN,
            H - MARGIN + 6.0,
            H - MARGIN + 20.0,
            tick as i64
        ));
        tick += 1.0;
    }
    let mut tick = y0.ceil();
    while tick <= y1 {
        s.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n<text x=\"{3}\" y=\"{0}\" font-size=\"12\" text-anchor=\"end\">1e{4}</text>\n",
            py(tick),
            MARGIN - 6.0,
            MARGIN,
            MARGIN - 10.0,
            tick as i64
        ));
        tick += 1.0;
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">Km / N</text>\n",
        W / 2.0,
        H - 16.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">mean delta</text>\n",
        H / 2.0,
        H / 2.0
    ));

    // Fitted line (ln-space fit rendered in log10 coordinates).
    let ln10 = std::f64::consts::LN_10;
    let line_y = |xl: f64| (fit.slope * (xl * ln10) + fit.intercept) / ln10;
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c22\" stroke-width=\"1.5\"/>\n",
        px(x0),
        py(line_y(x0)),
        px(x1),
        py(line_y(x1))
    ));
    for &(x, y) in &logs {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3.4\" fill=\"#246\" fill-opacity=\"0.8\"/>\n",
            px(x),
            py(y)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\">slope = {:.4}</text>\n",
        MARGIN + 10.0,
        MARGIN + 16.0,
        fit.slope
    ));
    s.push_str("</svg>\n");
    s
}
