//! Minimal deterministic SVG line plots for the result curves.

use crate::harness::fmt_sig6;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

/// Render one polyline per series on a shared x axis.
pub fn render_curve_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    series: &[(&str, &[f64])],
) -> String {
    let x_min = x.first().copied().unwrap_or(0.0);
    let x_max = x.last().copied().unwrap_or(1.0).max(x_min + 1e-9);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, ys) in series {
        for &v in *ys {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_max = y_min + 1.0;
    }
    let sx = |v: f64| MARGIN + (v - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let colors = ["#1f77b4", "#aec7e8", "#aec7e8", "#ff7f0e", "#2ca02c"];
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    ));
    svg.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{x_label}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 20.0
    ));
    svg.push_str(&format!(
        "  <text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 20 {})\">{y_label}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    // axis extents
    for (v, ha) in [(x_min, "start"), (x_max, "end")] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"{ha}\" font-size=\"10\">{}</text>\n",
            sx(v),
            HEIGHT - MARGIN + 16.0,
            fmt_sig6(v)
        ));
    }
    for v in [y_min, y_max] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n",
            MARGIN - 6.0,
            sy(v) + 4.0,
            fmt_sig6(v)
        ));
    }
    for (idx, (name, ys)) in series.iter().enumerate() {
        let mut points = String::new();
        for (xv, yv) in x.iter().zip(*ys) {
            points.push_str(&format!("{:.2},{:.2} ", sx(*xv), sy(*yv)));
        }
        svg.push_str(&format!(
            "  <polyline id=\"{name}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" \
             points=\"{}\"/>\n",
            colors[idx % colors.len()],
            points.trim_end()
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
