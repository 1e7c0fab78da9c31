//! Minimal SVG charts written by hand.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 90.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Bar {
    pub label: String,
    pub value: f64,
    pub error: f64,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + h - (y - self.y0) / (self.y1 - self.y0) * h
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn axes(out: &mut String, f: &Frame, y_label: &str) {
    let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (t, b) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(out, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#);
    for i in 0..=4 {
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let py = f.py(y);
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.1}" x2="{l}" y2="{py:.1}" stroke="black"/>"#, l - 4.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"#,
            l - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

/// Bar chart with symmetric error bars.
pub fn bar_chart(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let lo = bars.iter().map(|b| b.value - b.error).fold(0.0_f64, f64::min);
    let hi = bars.iter().map(|b| b.value + b.error).fold(0.0_f64, f64::max);
    let (y0, y1) = padded(lo, hi);
    let f = Frame {
        x0: 0.0,
        x1: bars.len().max(1) as f64,
        y0,
        y1,
    };
    axes(&mut out, &f, y_label);
    let zero = f.py(0.0);
    for (i, b) in bars.iter().enumerate() {
        let left = f.px(i as f64 + 0.15);
        let right = f.px(i as f64 + 0.85);
        let top = f.py(b.value).min(zero);
        let height = (f.py(b.value) - zero).abs();
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<rect x="{left:.1}" y="{top:.1}" width="{:.1}" height="{height:.1}" fill="{color}"/>"#,
            right - left
        );
        let cx = (left + right) / 2.0;
        let (ea, eb) = (f.py(b.value - b.error), f.py(b.value + b.error));
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{ea:.1}" x2="{cx:.1}" y2="{eb:.1}" stroke="black"/>"#);
        for e in [ea, eb] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{e:.1}" x2="{:.1}" y2="{e:.1}" stroke="black"/>"#,
                cx - 5.0,
                cx + 5.0
            );
        }
        let ly = HEIGHT - MARGIN_BOTTOM + 14.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{ly:.1}" text-anchor="end" transform="rotate(-35 {cx:.1} {ly:.1})">{}</text>"#,
            escape(&b.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Line chart with one polyline per series and a legend on the right.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    let (x0, x1) = if xh > xl { (xl, xh) } else { padded(xl, xh) };
    let (y0, y1) = padded(yl, yh);
    let f = Frame { x0, x1, y0, y1 };
    axes(&mut out, &f, y_label);
    let b = HEIGHT - MARGIN_BOTTOM;
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let px = f.px(x);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{x:.0}</text>"#, b + 16.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        b + 36.0,
        escape(x_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", f.px(x), f.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 14.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 16.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}
