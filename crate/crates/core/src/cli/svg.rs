//! Minimal SVG scatter/line plots with equal-aspect axes.

use std::fmt::Write;

use crate::velocity::PlanePoint;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 60.0;

pub struct Plot {
    x: [f64; 2],
    y: [f64; 2],
    body: String,
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Bounds of `points` padded by 5%, or `[-1, 1]²` when empty.
pub fn data_bounds<'a>(points: impl IntoIterator<Item = &'a PlanePoint>) -> ([f64; 2], [f64; 2]) {
    let mut x = [f64::INFINITY, f64::NEG_INFINITY];
    let mut y = x;
    for p in points {
        if p.is_finite() {
            x = [x[0].min(p.x), x[1].max(p.x)];
            y = [y[0].min(p.y), y[1].max(p.y)];
        }
    }
    if !(x[0] <= x[1]) {
        return ([-1.0, 1.0], [-1.0, 1.0]);
    }
    let pad = 0.05 * (x[1] - x[0]).max(y[1] - y[0]).max(1e-3);
    ([x[0] - pad, x[1] + pad], [y[0] - pad, y[1] + pad])
}

impl Plot {
    /// Ranges are widened about their centres so one data unit has the same
    /// length on both axes.
    pub fn new(x: [f64; 2], y: [f64; 2], title: &str) -> Self {
        let span = (x[1] - x[0]).max(y[1] - y[0]);
        let cx = 0.5 * (x[0] + x[1]);
        let cy = 0.5 * (y[0] + y[1]);
        let mut plot = Self {
            x: [cx - span / 2.0, cx + span / 2.0],
            y: [cy - span / 2.0, cy + span / 2.0],
            body: String::new(),
        };
        plot.axes(title);
        plot
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x[0]) / (self.x[1] - self.x[0]) * (SIZE - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y[0]) / (self.y[1] - self.y[0]) * (SIZE - 2.0 * MARGIN)
    }

    fn inside(&self, p: PlanePoint) -> bool {
        p.is_finite() && p.x >= self.x[0] && p.x <= self.x[1] && p.y >= self.y[0] && p.y <= self.y[1]
    }

    fn axes(&mut self, title: &str) {
        let (l, r, t, b) = (MARGIN, SIZE - MARGIN, MARGIN, SIZE - MARGIN);
        let _ = writeln!(
            self.body,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x[0] + f * (self.x[1] - self.x[0]);
            let yv = self.y[0] + f * (self.y[1] - self.y[0]);
            let (px, py) = (self.sx(xv), self.sy(yv));
            let _ = writeln!(
                self.body,
                r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" font-size="12" text-anchor="middle">{xv:.3}</text>"#,
                b + 5.0,
                b + 20.0
            );
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" font-size="12" text-anchor="end">{yv:.3}</text>"#,
                l - 5.0,
                l - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="30" font-size="16" text-anchor="middle">{}</text>"#,
            SIZE / 2.0,
            escape(title)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">x</text><text x="15" y="{}" font-size="14">y</text>"#,
            SIZE / 2.0,
            SIZE - 15.0,
            SIZE / 2.0
        );
    }

    pub fn points(&mut self, pts: &[PlanePoint], color: &str, radius: f64) {
        for &p in pts {
            if self.inside(p) {
                let (x, y) = (self.sx(p.x), self.sy(p.y));
                let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}" fill="{color}"/>"#);
            }
        }
    }

    /// Open polyline; `breaks` holds indices `i` whose link to `i + 1` is
    /// not drawn.
    pub fn polyline(&mut self, pts: &[PlanePoint], breaks: &[usize], color: &str, width: f64) {
        let mut run = String::new();
        let flush = |run: &mut String, body: &mut String| {
            if run.contains(' ') {
                let _ = writeln!(
                    body,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
                    run.trim()
                );
            }
            run.clear();
        };
        for (i, p) in pts.iter().enumerate() {
            if self.inside(*p) {
                let _ = write!(run, "{:.2},{:.2} ", self.sx(p.x), self.sy(p.y));
            } else {
                flush(&mut run, &mut self.body);
            }
            if breaks.contains(&i) {
                flush(&mut run, &mut self.body);
            }
        }
        flush(&mut run, &mut self.body);
    }

    pub fn marker(&mut self, p: PlanePoint, color: &str, label: &str) {
        if !self.inside(p) {
            return;
        }
        let (x, y) = (self.sx(p.x), self.sy(p.y));
        let _ = writeln!(
            self.body,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0,
            x + 8.0,
            y - 8.0,
            escape(label)
        );
    }

    pub fn legend(&mut self, row: usize, color: &str, label: &str) {
        let y = MARGIN + 18.0 + 18.0 * row as f64;
        let x = SIZE - MARGIN - 170.0;
        let _ = writeln!(
            self.body,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
            y - 10.0,
            x + 18.0,
            y,
            escape(label)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_aspect() {
        let p = Plot::new([0.0, 2.0], [0.0, 1.0], "t");
        let dx = p.sx(1.0) - p.sx(0.0);
        let dy = p.sy(0.0) - p.sy(1.0);
        assert!((dx - dy).abs() < 1e-12);
        let svg = p.finish();
        assert!(svg.starts_with("<svg") && svg.contains("width=\"800\""));
    }

    #[test]
    fn polyline_breaks() {
        let mut p = Plot::new([0.0, 1.0], [0.0, 1.0], "t");
        let pts = [PlanePoint::new(0.1, 0.1), PlanePoint::new(0.2, 0.2), PlanePoint::new(0.3, 0.3), PlanePoint::new(0.4, 0.4)];
        p.polyline(&pts, &[1], "red", 1.0);
        assert_eq!(p.finish().matches("<polyline").count(), 2);
    }
}
