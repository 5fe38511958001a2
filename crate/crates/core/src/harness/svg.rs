//! Minimal deterministic SVG plotting: line plots with error bands and
//! heatmaps with a labelled colorbar. Coordinates are printed with two decimals.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Half-width of the shaded band at each point.
    pub band: Option<Vec<f64>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Doc(String);

impl Doc {
    fn new(title: &str) -> Doc {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        Doc(s)
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, t: &str) {
        let _ = writeln!(self.0, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(t));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(self.0, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"/>"#);
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(self.0, r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#);
    }

    fn finish(mut self) -> String {
        self.0.push_str("</svg>\n");
        self.0
    }
}

fn plot_w() -> f64 {
    W - LEFT - RIGHT
}

fn plot_h() -> f64 {
    H - TOP - BOTTOM
}

/// Placeholder figure for an empty input.
pub fn no_data(title: &str) -> String {
    let mut d = Doc::new(title);
    d.rect(LEFT, TOP, plot_w(), plot_h(), "#f4f4f4");
    d.text(LEFT + plot_w() / 2.0, TOP + plot_h() / 2.0, "middle", "no data");
    d.finish()
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], y_range: Option<(f64, f64)>) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    if series.iter().all(|s| s.points.is_empty()) {
        return no_data(title);
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = span(x0, x1);
    let (y0, y1) = y_range.unwrap_or_else(|| span(y0, y1));
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w();
    let sy = |y: f64| TOP + plot_h() - (y.clamp(y0, y1) - y0) / (y1 - y0) * plot_h();

    let mut d = Doc::new(title);
    d.line(LEFT, TOP + plot_h(), LEFT + plot_w(), TOP + plot_h(), "black");
    d.line(LEFT, TOP, LEFT, TOP + plot_h(), "black");
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        d.line(sx(xv), TOP + plot_h(), sx(xv), TOP + plot_h() + 4.0, "black");
        d.text(sx(xv), TOP + plot_h() + 18.0, "middle", &format!("{xv:.2}"));
        d.line(LEFT - 4.0, sy(yv), LEFT, sy(yv), "black");
        d.text(LEFT - 7.0, sy(yv) + 4.0, "end", &format!("{yv:.2}"));
    }
    d.text(LEFT + plot_w() / 2.0, H - 15.0, "middle", xlabel);
    let _ = writeln!(
        d.0,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h() / 2.0,
        TOP + plot_h() / 2.0,
        escape(ylabel)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(band) = &s.band {
            let upper = s.points.iter().zip(band).map(|(&(x, y), b)| (sx(x), sy(y + b)));
            let lower = s.points.iter().zip(band).rev().map(|(&(x, y), b)| (sx(x), sy(y - b)));
            let poly: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                d.0,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                poly.join(" ")
            );
        }
        let line: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ =
            writeln!(d.0, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for &(x, y) in &s.points {
            let _ = writeln!(d.0, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        d.rect(LEFT + plot_w() + 15.0, ly - 8.0, 12.0, 10.0, color);
        d.text(LEFT + plot_w() + 32.0, ly + 1.0, "start", &s.label);
    }
    d.finish()
}

/// Blue (0) to yellow (1) ramp.
fn color(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(48.0, 250.0), lerp(18.0, 230.0), lerp(120.0, 35.0))
}

/// `values[row][col]`; `None` cells are drawn hatched grey and labelled "n/a".
pub fn heatmap(
    title: &str,
    col_label: &str,
    row_label: &str,
    cols: &[String],
    rows: &[String],
    values: &[Vec<Option<f64>>],
) -> String {
    if cols.is_empty() || rows.is_empty() {
        return no_data(title);
    }
    let mut d = Doc::new(title);
    let cw = plot_w() / cols.len() as f64;
    let ch = plot_h() / rows.len() as f64;
    for (r, row) in values.iter().enumerate() {
        // First row at the bottom.
        let y = TOP + plot_h() - (r + 1) as f64 * ch;
        for (c, v) in row.iter().enumerate() {
            let x = LEFT + c as f64 * cw;
            match v {
                Some(v) => {
                    d.rect(x, y, cw, ch, &color(*v));
                    d.text(x + cw / 2.0, y + ch / 2.0 + 4.0, "middle", &format!("{v:.2}"));
                }
                None => {
                    d.rect(x, y, cw, ch, "#bbbbbb");
                    d.text(x + cw / 2.0, y + ch / 2.0 + 4.0, "middle", "n/a");
                }
            }
        }
        d.text(LEFT - 6.0, y + ch / 2.0 + 4.0, "end", &rows[r]);
    }
    for (c, label) in cols.iter().enumerate() {
        d.text(LEFT + (c as f64 + 0.5) * cw, TOP + plot_h() + 18.0, "middle", label);
    }
    d.text(LEFT + plot_w() / 2.0, H - 15.0, "middle", col_label);
    let _ = writeln!(
        d.0,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h() / 2.0,
        TOP + plot_h() / 2.0,
        escape(row_label)
    );
    // Colorbar with value labels.
    let bx = LEFT + plot_w() + 30.0;
    let steps = 20;
    for k in 0..steps {
        let v = (k as f64 + 0.5) / steps as f64;
        let y = TOP + plot_h() - (k + 1) as f64 * plot_h() / steps as f64;
        d.rect(bx, y, 20.0, plot_h() / steps as f64, &color(v));
    }
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = TOP + plot_h() - v * plot_h();
        d.line(bx + 20.0, y, bx + 25.0, y, "black");
        d.text(bx + 28.0, y + 4.0, "start", &format!("{v:.2}"));
    }
    d.text(bx + 10.0, TOP - 8.0, "middle", "success");
    d.finish()
}
