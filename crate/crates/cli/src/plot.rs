//! Minimal static SVG emitters: a multi-series line chart and a square
//! heatmap. CSVs are the artifact contract; these exist so a run can be
//! eyeballed without further tooling.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (0.01..10_000.0).contains(&a) {
        let s = format!("{v:.2}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of the given series. With `log_x`, x values are plotted on a
/// log10 axis and non-positive x points are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, log_x: bool, series: &[Series]) -> String {
    let (w, h) = (860.0, 520.0);
    let (x0, x1, y0, y1) = (70.0, 830.0, 40.0, 460.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let cleaned: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| y.is_finite() && x.is_finite() && (!log_x || *x > 0.0))
                .map(|&(x, y)| (tx(x), y))
                .collect()
        })
        .collect();
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for pts in &cleaned {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax - xmin < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    let px = |x: f64| x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
    let py = |y: f64| y1 - (y - ymin) / (ymax - ymin) * (y1 - y0);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        (x0 + x1) / 2.0,
        escape(title)
    );
    // grid and ticks
    for i in 0..=5 {
        let fx = xmin + (xmax - xmin) * i as f64 / 5.0;
        let fy = ymin + (ymax - ymin) * i as f64 / 5.0;
        let gx = px(fx);
        let gy = py(fy);
        let _ = write!(
            svg,
            "<line x1=\"{gx:.1}\" y1=\"{y0}\" x2=\"{gx:.1}\" y2=\"{y1}\" stroke=\"#e5e5e5\"/>\n\
             <line x1=\"{x0}\" y1=\"{gy:.1}\" x2=\"{x1}\" y2=\"{gy:.1}\" stroke=\"#e5e5e5\"/>\n\
             <text x=\"{gx:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            y1 + 18.0,
            if log_x { format!("1e{}", fmt_tick(fx)) } else { fmt_tick(fx) },
            x0 - 8.0,
            gy + 4.0,
            fmt_tick(fy),
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        x1 - x0,
        y1 - y0,
        (x0 + x1) / 2.0,
        y1 + 40.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
    );
    for (si, pts) in cleaned.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[si % PALETTE.len()];
        let coords: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            coords.join(" ")
        );
        let ly = y0 + 16.0 + 18.0 * si as f64;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{ly:.1}\" x2=\"{}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>\n\
             <text x=\"{}\" y=\"{:.1}\">{}</text>\n",
            x1 - 170.0,
            x1 - 140.0,
            x1 - 132.0,
            ly + 4.0,
            escape(&series[si].label),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn viridis(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, (f64, f64, f64)); 5] = [
        (0.00, (68.0, 1.0, 84.0)),
        (0.25, (59.0, 82.0, 139.0)),
        (0.50, (33.0, 145.0, 140.0)),
        (0.75, (94.0, 201.0, 98.0)),
        (1.00, (253.0, 231.0, 37.0)),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut lo = STOPS[0];
    let mut hi = STOPS[4];
    for w in STOPS.windows(2) {
        if t >= w[0].0 && t <= w[1].0 {
            lo = w[0];
            hi = w[1];
            break;
        }
    }
    let f = if hi.0 > lo.0 { (t - lo.0) / (hi.0 - lo.0) } else { 0.0 };
    let mix = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
    (mix(lo.1 .0, hi.1 .0), mix(lo.1 .1, hi.1 .1), mix(lo.1 .2, hi.1 .2))
}

/// Square heatmap of `(x, y, value)` cells on a `resolution²` grid spanning
/// [-1, 1]²; absent cells stay blank.
pub fn heatmap(title: &str, resolution: usize, cells: &[(f64, f64, f64)]) -> String {
    let side = 440.0;
    let (ox, oy) = (70.0, 50.0);
    let (w, h) = (ox + side + 120.0, oy + side + 60.0);
    let finite: Vec<f64> = cells.iter().map(|c| c.2).filter(|v| v.is_finite()).collect();
    let vmin = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };
    let cell = side / resolution as f64;
    let pos = |c: f64| (c + 1.0) / 2.0 * (side - cell);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        ox + side / 2.0,
        escape(title)
    );
    for &(x, y, v) in cells {
        let (r, g, b) = if v.is_finite() {
            viridis((v - vmin) / span)
        } else {
            (187, 187, 187)
        };
        let _ = write!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>\n",
            ox + pos(x),
            oy + side - cell - pos(y),
            cell,
            cell,
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{ox}\" y=\"{oy}\" width=\"{side}\" height=\"{side}\" fill=\"none\" stroke=\"#333\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">alpha_u</text>\n\
         <text x=\"24\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 24 {})\">alpha_v</text>\n",
        ox + side / 2.0,
        oy + side + 36.0,
        oy + side / 2.0,
        oy + side / 2.0,
    );
    // colorbar
    let (bx, bw, bh) = (ox + side + 30.0, 18.0, side);
    for i in 0..64 {
        let t = 1.0 - i as f64 / 63.0;
        let (r, g, b) = viridis(t);
        let _ = write!(
            svg,
            "<rect x=\"{bx}\" y=\"{:.2}\" width=\"{bw}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>\n",
            oy + bh * i as f64 / 64.0,
            bh / 64.0 + 0.5,
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\">{}</text>\n<text x=\"{}\" y=\"{}\">{}</text>\n</svg>\n",
        bx + bw + 6.0,
        oy + 10.0,
        fmt_tick(vmax),
        bx + bw + 6.0,
        oy + bh,
        fmt_tick(vmin),
    );
    svg
}
