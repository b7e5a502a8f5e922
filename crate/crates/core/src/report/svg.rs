//! Strategy-share line chart as a standalone SVG 1.1 document.
//!
//! Coordinate mapping (pixels, origin top-left):
//!   x = PLOT_LEFT + (iteration - first) / (last - first) * PLOT_WIDTH   (PLOT_LEFT when first == last)
//!   y = PLOT_BOTTOM - share * PLOT_HEIGHT
//! Coordinates are printed with two decimals. There is no timestamp or other
//! varying content, so equal inputs give byte-identical files.

use std::fmt::Write;

use super::census::CensusSeries;
use super::{ReportError, STRATEGY_COLORS};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
pub const PLOT_LEFT: f64 = 60.0;
pub const PLOT_WIDTH: f64 = 440.0;
pub const PLOT_TOP: f64 = 40.0;
pub const PLOT_HEIGHT: f64 = 300.0;
pub const PLOT_BOTTOM: f64 = PLOT_TOP + PLOT_HEIGHT;

pub fn x_coord(iteration: u32, first: u32, last: u32) -> f64 {
    if last == first {
        PLOT_LEFT
    } else {
        PLOT_LEFT + (iteration - first) as f64 / (last - first) as f64 * PLOT_WIDTH
    }
}

pub fn y_coord(share: f64) -> f64 {
    PLOT_BOTTOM - share * PLOT_HEIGHT
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_trend_svg(series: &CensusSeries, title: &str) -> Result<String, ReportError> {
    let (first, last) = match (series.points.first(), series.points.last()) {
        (Some(f), Some(l)) => (f.iteration, l.iteration),
        _ => return Err(ReportError::EmptySeries),
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let colors: Vec<String> = STRATEGY_COLORS
        .iter()
        .map(|(k, c)| format!("{}={c}", k.label()))
        .collect();
    let _ = writeln!(s, "<!-- strategy colors: {} -->", colors.join(" "));
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        PLOT_LEFT + PLOT_WIDTH / 2.0,
        escape(title)
    );

    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{PLOT_LEFT:.2}" y1="{PLOT_BOTTOM:.2}" x2="{:.2}" y2="{PLOT_BOTTOM:.2}" stroke="black"/>"#,
        PLOT_LEFT + PLOT_WIDTH
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PLOT_LEFT:.2}" y1="{PLOT_TOP:.2}" x2="{PLOT_LEFT:.2}" y2="{PLOT_BOTTOM:.2}" stroke="black"/>"#
    );
    for tick in 0..=4 {
        let share = tick as f64 / 4.0;
        let y = y_coord(share);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            PLOT_LEFT,
            PLOT_LEFT + PLOT_WIDTH
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{share:.2}</text>"#,
            PLOT_LEFT - 6.0,
            y + 4.0
        );
    }
    for p in &series.points {
        let x = x_coord(p.iteration, first, last);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            PLOT_BOTTOM + 16.0,
            p.iteration
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">iteration</text>"#,
        PLOT_LEFT + PLOT_WIDTH / 2.0,
        PLOT_BOTTOM + 36.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">population share</text>"#,
        PLOT_TOP + PLOT_HEIGHT / 2.0,
        PLOT_TOP + PLOT_HEIGHT / 2.0
    );

    for (i, (strategy, color)) in STRATEGY_COLORS.iter().enumerate() {
        let points: Vec<String> = series
            .points
            .iter()
            .map(|p| {
                format!(
                    "{:.2},{:.2}",
                    x_coord(p.iteration, first, last),
                    y_coord(p.share(*strategy))
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-strategy="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            strategy.label(),
            points.join(" ")
        );
        let ly = PLOT_TOP + 10.0 + i as f64 * 20.0;
        let lx = PLOT_LEFT + PLOT_WIDTH + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{} ({})</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(strategy.display_name()),
            strategy.label()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
