//! Self-contained SVG writer for log-log convergence plots.
//!
//! Output bytes are deterministic for identical input: coordinates are
//! written with fixed precision and colors come from a fixed palette, so
//! plots can be golden-file tested.

use crate::analysis::fit_loglog;
use std::fmt::Write as _;

/// One curve of a plot; points with nonpositive coordinates are dropped
/// (log axes).
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Render a log-log plot. `slope_guides` draws reference triangles with the
/// given slopes anchored near the lower left of the data; each series'
/// legend entry carries its fitted slope when it has at least two points.
pub fn loglog_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    slope_guides: &[f64],
) -> String {
    // gather finite positive points
    let mut clean: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for s in series {
        let pts: Vec<(f64, f64)> = s
            .xs
            .iter()
            .zip(&s.ys)
            .filter(|(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (x.log10(), y.log10()))
            .collect();
        if !pts.is_empty() {
            clean.push((s.label.clone(), pts));
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="monospace" font-size="16" text-anchor="middle">{}</text>"#,
        fmt(WIDTH / 2.0),
        title
    );

    if clean.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="14" text-anchor="middle">no positive data</text>"#,
            fmt(WIDTH / 2.0),
            fmt(HEIGHT / 2.0)
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, pts) in &clean {
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if xmax - xmin < 1e-9 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-9 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad_x = 0.06 * (xmax - xmin);
    let pad_y = 0.08 * (ymax - ymin);
    xmin -= pad_x;
    xmax += pad_x;
    ymin -= pad_y;
    ymax += pad_y;

    let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

    // frame
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(WIDTH - MARGIN_L - MARGIN_R),
        fmt(HEIGHT - MARGIN_T - MARGIN_B)
    );

    // decade ticks
    for d in (xmin.ceil() as i64)..=(xmax.floor() as i64) {
        let x = px(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#cccccc" stroke-dasharray="3,3"/>"##,
            x0 = fmt(x),
            y0 = fmt(MARGIN_T),
            y1 = fmt(HEIGHT - MARGIN_B)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">1e{}</text>"#,
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 18.0),
            d
        );
    }
    for d in (ymin.ceil() as i64)..=(ymax.floor() as i64) {
        let y = py(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#cccccc" stroke-dasharray="3,3"/>"##,
            x0 = fmt(MARGIN_L),
            x1 = fmt(WIDTH - MARGIN_R),
            y0 = fmt(y)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="end">1e{}</text>"#,
            fmt(MARGIN_L - 6.0),
            fmt(y + 4.0),
            d
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="14" text-anchor="middle">{}</text>"#,
        fmt(MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0),
        fmt(HEIGHT - 12.0),
        xlabel
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="monospace" font-size="14" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        fmt(MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0),
        fmt(MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0),
        ylabel
    );

    // slope reference triangles near the lower-left of the data
    for (gi, &slope) in slope_guides.iter().enumerate() {
        let x0 = xmin + 0.12 * (xmax - xmin);
        let x1 = x0 + 0.12 * (xmax - xmin);
        let y0 = ymin + 0.10 * (ymax - ymin) + 0.16 * gi as f64 * (ymax - ymin);
        let y1 = y0 + slope * (x1 - x0);
        let _ = writeln!(
            svg,
            r##"<path d="M {x0} {y0} L {x1} {y0} L {x1} {y1} Z" fill="none" stroke="#555555"/>"##,
            x0 = fmt(px(x0)),
            y0 = fmt(py(y0)),
            x1 = fmt(px(x1)),
            y1 = fmt(py(y1)),
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="monospace" font-size="11" fill="#555555">{:.2}</text>"##,
            fmt(px(x1) + 4.0),
            fmt(py((y0 + y1) / 2.0)),
            slope
        );
    }

    // curves, markers, legend
    for (si, (label, pts)) in clean.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| {
                    format!("{} {} {}", if i == 0 { "M" } else { "L" }, fmt(px(x)), fmt(py(y)))
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                fmt(px(x)),
                fmt(py(y))
            );
        }
        let fitted = if pts.len() > 1 {
            let xs: Vec<f64> = pts.iter().map(|p| 10f64.powf(p.0)).collect();
            let ys: Vec<f64> = pts.iter().map(|p| 10f64.powf(p.1)).collect();
            fit_loglog(&xs, &ys)
        } else {
            None
        };
        let legend = match fitted {
            Some(s) => format!("{label} ({s:.2})"),
            None => label.clone(),
        };
        let ly = MARGIN_T + 16.0 + 18.0 * si as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            fmt(WIDTH - MARGIN_R + 8.0),
            fmt(ly - 4.0),
            fmt(WIDTH - MARGIN_R + 28.0),
            fmt(ly - 4.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11">{}</text>"#,
            fmt(WIDTH - MARGIN_R + 34.0),
            fmt(ly),
            legend
        );
    }

    svg.push_str("</svg>\n");
    svg
}
