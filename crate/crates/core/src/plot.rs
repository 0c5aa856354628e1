//! Static SVG line chart of a spreader-count curve.

use std::fmt::Write as _;

use crate::influence::CurvePoint;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const Z_95: f64 = 1.96;

/// Half-width of the 95% normal interval around a point's mean.
pub fn error_half_width(p: &CurvePoint) -> f64 {
    Z_95 * (p.variance / p.instances as f64).sqrt()
}

struct Frame {
    n_lo: f64,
    n_hi: f64,
}

impl Frame {
    fn x(&self, n: f64) -> f64 {
        let span = self.n_hi - self.n_lo;
        LEFT + (n - self.n_lo) / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, pr: f64) -> f64 {
        TOP + (1.0 - pr.clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Renders the curve with n on the x axis and Pr(n) on a fixed [0, 1] y
/// axis. Output depends only on `points`.
pub fn render_svg(points: &[CurvePoint]) -> String {
    let first = points.iter().map(|p| p.n).min().unwrap_or(1) as f64;
    let last = points.iter().map(|p| p.n).max().unwrap_or(1) as f64;
    let frame = Frame { n_lo: first - 0.5, n_hi: last + 0.5 };
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (frame.y(0.0), frame.y(1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">Retweet probability Pr(n) by number of spreaders</text>"#,
        WIDTH / 2.0
    );

    // axes and grid
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="yticks">"#);
    for i in 0..=5 {
        let pr = i as f64 / 5.0;
        let y = frame.y(pr);
        let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{pr:.1}</text>"#, x0 - 6.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="xticks">"#);
    let step = ((last - first) / 20.0).ceil().max(1.0) as usize;
    for n in (first as usize..=last as usize).step_by(step) {
        let x = frame.x(n as f64);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, y0 + 18.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (spreaders)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Pr(n)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let _ = writeln!(s, r##"<g class="errorbars" stroke="#555555" stroke-width="1">"##);
    for p in points {
        let x = frame.x(p.n as f64);
        let h = error_half_width(p);
        let (lo, hi) = (frame.y(p.mean - h), frame.y(p.mean + h));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}"/>"#);
        for y in [lo, hi] {
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, x - 4.0, x + 4.0);
        }
    }
    let _ = writeln!(s, "</g>");

    let coords: Vec<String> =
        points.iter().map(|p| format!("{:.2},{:.2}", frame.x(p.n as f64), frame.y(p.mean))).collect();
    let _ = writeln!(
        s,
        r##"<polyline class="curve" fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        coords.join(" ")
    );
    let _ = writeln!(s, r##"<g class="markers" fill="#1f77b4">"##);
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4"><title>n={} Pr={:.4} instances={}</title></circle>"#,
            frame.x(p.n as f64),
            frame.y(p.mean),
            p.n,
            p.mean,
            p.instances
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
