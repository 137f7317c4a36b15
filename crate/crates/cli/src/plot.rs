//! Plain SVG polyline plots of orbits in the complex ε-plane.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 84.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One curve with labelled endpoints.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub start_label: String,
    pub end_label: String,
}

/// ε = r e^{iφ} ↦ log(1 + r) e^{iφ}; keeps the winding of a spiral while
/// compressing its radius.
pub fn log_radial((x, y): (f64, f64)) -> (f64, f64) {
    let r = x.hypot(y);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let s = r.ln_1p() / r;
    (x * s, y * s)
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e5).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let w = (hi - lo).max(1e-12 * lo.abs().max(1.0));
        (lo - 0.05 * w, hi + 0.05 * w)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{1}" stroke="#bbb"/>"##, sx(0.0), HEIGHT - MARGIN);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{MARGIN}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#bbb"/>"##, sy(0.0), WIDTH - MARGIN);
    }
    for (v, anchor, x) in [(x0, "start", MARGIN), (x1, "end", WIDTH - MARGIN)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#, HEIGHT - MARGIN + 16.0, tick(v));
    }
    for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, MARGIN - 4.0, tick(v));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ends = [(ser.points.first(), &ser.start_label), (ser.points.last(), &ser.end_label)];
        for (k, (p, label)) in ends.into_iter().enumerate() {
            let Some(&(x, y)) = p else { continue };
            let (px, py) = (sx(x), sy(y));
            // stagger so that endpoints shared by two sheets stay readable
            let dy = if k == 0 { -8.0 - 14.0 * i as f64 } else { 16.0 + 14.0 * i as f64 };
            let (anchor, lx) = if px > WIDTH / 2.0 { ("end", px - 5.0) } else { ("start", px + 5.0) };
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{lx:.2}" y="{:.2}" fill="{color}" text-anchor="{anchor}" class="endpoint">{}</text>"#,
                py + dy,
                escape(label)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            MARGIN + 80.0 * i as f64,
            MARGIN - 12.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_radial_keeps_direction() {
        let (x, y) = log_radial((-3.0, 4.0));
        assert!((x.hypot(y) - 6f64.ln()).abs() < 1e-15);
        assert!((y / x + 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(log_radial((0.0, 0.0)), (0.0, 0.0));
    }

    #[test]
    fn renders_polyline_and_labels() {
        let ser = Series {
            name: "sheet 1".into(),
            points: vec![(2.0, 0.0), (0.0, 3.0), (-22.0, 0.0)],
            start_label: "2.0".into(),
            end_label: "-22 <end>".into(),
        };
        let svg = render("orbit", "Re", "Im", &[ser]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("-22 &lt;end&gt;"));
        assert_eq!(svg.matches("class=\"endpoint\"").count(), 2);
    }

    #[test]
    fn degenerate_extent() {
        let ser = Series { name: "p".into(), points: vec![(1.0, 1.0)], start_label: "a".into(), end_label: "b".into() };
        let svg = render("t", "x", "y", &[ser]);
        assert!(!svg.contains("NaN"));
    }
}
