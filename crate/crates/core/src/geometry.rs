//! Segment and polyline primitives.

use crate::velocity::{PlanePoint, PlaneVector};

pub fn point_segment_distance(p: PlanePoint, a: PlanePoint, b: PlanePoint) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + s * ab)
}

/// Distance from `p` to an open polyline.
pub fn polyline_distance(p: PlanePoint, line: &[PlanePoint]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => p.distance(*only),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Proper intersection of segments `[a, b]` and `[c, d]`, returned as the
/// parameters `(s, u)` along each with `a + s(b-a) = c + u(d-c)`.
pub fn segment_intersection(a: PlanePoint, b: PlanePoint, c: PlanePoint, d: PlanePoint) -> Option<(f64, f64)> {
    let r = b - a;
    let q = d - c;
    let denom = r.cross(q);
    if denom == 0.0 {
        return None;
    }
    let ac = c - a;
    let s = ac.cross(q) / denom;
    let u = ac.cross(r) / denom;
    ((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u)).then_some((s, u))
}

/// Acute angle in `[0, π/2]` between two directions.
pub fn line_angle(u: PlaneVector, v: PlaneVector) -> f64 {
    let c = u.cross(v).abs();
    let d = u.dot(v).abs();
    c.atan2(d)
}
