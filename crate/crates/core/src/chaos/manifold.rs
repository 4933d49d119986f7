//! Invariant manifolds of saddle fixed points and their transversal crossings.

use rayon::prelude::*;
use serde::Serialize;

use super::fixed_point::FixedPointRecord;
use crate::error::{Error, Result};
use crate::geometry::{line_angle, segment_intersection};
use crate::integrate::PlaneMap;
use crate::velocity::PlanePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Branch {
    pub stability: Stability,
    pub side: Side,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch { stability: Stability::Unstable, side: Side::Plus },
        Branch { stability: Stability::Unstable, side: Side::Minus },
        Branch { stability: Stability::Stable, side: Side::Plus },
        Branch { stability: Stability::Stable, side: Side::Minus },
    ];

    pub fn label(&self) -> &'static str {
        match (self.stability, self.side) {
            (Stability::Unstable, Side::Plus) => "unstable+",
            (Stability::Unstable, Side::Minus) => "unstable-",
            (Stability::Stable, Side::Plus) => "stable+",
            (Stability::Stable, Side::Minus) => "stable-",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ManifoldParams {
    /// Length of the initial linear segment along the eigenvector.
    pub seed_delta: f64,
    pub max_arclength: f64,
    pub max_spacing: f64,
    /// Safety cap on the number of map iterations (fundamental domains).
    pub max_levels: usize,
    /// Safety cap on the number of points.
    pub max_points: usize,
}

impl Default for ManifoldParams {
    fn default() -> Self {
        Self { seed_delta: 1e-4, max_arclength: 4.0, max_spacing: 5e-3, max_levels: 60, max_points: 400_000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifoldPolyline {
    pub branch: Branch,
    pub fixed_point: PlanePoint,
    pub seed_delta: f64,
    pub points: Vec<PlanePoint>,
    /// Number of map iterations that produced each point from the seed segment.
    pub levels: Vec<u32>,
    /// Indices `i` for which the segment `points[i] → points[i+1]` is not
    /// resolved (captured preimages or parameter exhaustion).
    pub gaps: Vec<usize>,
    pub arclength: f64,
}

impl ManifoldPolyline {
    /// Resolved segments, as index pairs.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.points.len().saturating_sub(1)).filter(|i| !self.gaps.contains(i)).map(|i| (i, i + 1))
    }
}

/// One parameter sample in the fundamental domain and its current image.
#[derive(Clone, Copy)]
struct Node {
    u: f64,
    point: Option<PlanePoint>,
}

/// Smallest parameter gap in the fundamental domain worth subdividing.
const MIN_PARAM_GAP: f64 = 1e-14;

/// Traces one branch of the stable or unstable manifold of a saddle.
///
/// A seed segment of length `seed_delta` along the eigenvector is taken
/// as fundamental domain `p + δ μ^u e`, `u ∈ [0, 1]`, where `μ` is the
/// expanding multiplier. Its successive images are appended, inserting
/// new fundamental-domain samples wherever consecutive images are more
/// than `max_spacing` apart. The stable manifold is traced as the unstable
/// manifold of the inverse map.
pub fn trace_manifold<M: PlaneMap + ?Sized>(
    map: &M,
    fp: &FixedPointRecord,
    branch: Branch,
    params: &ManifoldParams,
) -> Result<ManifoldPolyline> {
    let ((lu, eu), (ls, es)) = fp
        .saddle_directions()
        .ok_or_else(|| Error::InvalidArgument("manifolds need a saddle fixed point".into()))?;
    if !(params.seed_delta > 0.0 && params.max_spacing > 0.0 && params.max_arclength > 0.0) {
        return Err(Error::InvalidArgument("manifold parameters must be positive".into()));
    }
    let (mu, dir) = match branch.stability {
        Stability::Unstable => (lu, eu),
        Stability::Stable => (1.0 / ls, es),
    };
    let dir = match branch.side {
        Side::Plus => dir,
        Side::Minus => -1.0 * dir,
    };
    // orientation-reversing saddles flip sides each iterate; use the square
    let (mu, twice) = if mu < 0.0 { (mu * mu, true) } else { (mu, false) };
    let one = |p: PlanePoint| match branch.stability {
        Stability::Unstable => map.apply(p),
        Stability::Stable => map.apply_inverse(p),
    };
    let step = |p: PlanePoint| -> Option<PlanePoint> {
        let q = one(p).ok()?;
        if twice {
            one(q).ok()
        } else {
            Some(q)
        }
    };
    let p0 = fp.location;
    let delta = params.seed_delta;
    let base = |u: f64| p0 + (delta * mu.powf(u)) * dir;
    let image = |u: f64, level: u32| -> Option<PlanePoint> {
        let mut p = base(u);
        for _ in 0..level {
            p = step(p)?;
        }
        Some(p)
    };

    let mut out = ManifoldPolyline {
        branch,
        fixed_point: p0,
        seed_delta: delta,
        points: Vec::new(),
        levels: Vec::new(),
        gaps: Vec::new(),
        arclength: 0.0,
    };

    let n0 = (((mu - 1.0) * delta / params.max_spacing).ceil() as usize).max(1) + 1;
    let mut nodes: Vec<Node> = (0..n0)
        .map(|i| {
            let u = i as f64 / (n0 - 1) as f64;
            Node { u, point: Some(base(u)) }
        })
        .collect();

    for level in 0..params.max_levels as u32 {
        if level > 0 {
            nodes = nodes
                .par_iter()
                .map(|n| Node { u: n.u, point: n.point.and_then(step) })
                .collect();
        }
        let unresolved = refine(&mut nodes, level, params, &image);

        let mut prev: Option<PlanePoint> = out.points.last().copied();
        let mut prev_gap = !out.points.is_empty() && prev.is_none();
        for (i, n) in nodes.iter().enumerate() {
            let Some(p) = n.point else {
                prev_gap = true;
                continue;
            };
            if let Some(q) = prev {
                let bad_link = prev_gap || (i > 0 && unresolved.contains(&(i - 1)));
                if bad_link {
                    out.gaps.push(out.points.len() - 1);
                } else {
                    let seg = p.distance(q);
                    if out.arclength + seg > params.max_arclength {
                        return Ok(out);
                    }
                    out.arclength += seg;
                }
            }
            out.points.push(p);
            out.levels.push(level);
            prev = Some(p);
            prev_gap = false;
            if out.points.len() >= params.max_points {
                return Ok(out);
            }
        }
        if nodes.iter().all(|n| n.point.is_none()) {
            break;
        }
    }
    Ok(out)
}

/// Inserts samples until consecutive images are within `max_spacing`.
/// Returns the indices `i` whose link `i → i+1` could not be resolved.
fn refine(
    nodes: &mut Vec<Node>,
    level: u32,
    params: &ManifoldParams,
    image: &(impl Fn(f64, u32) -> Option<PlanePoint> + Sync),
) -> Vec<usize> {
    loop {
        let needs: Vec<usize> = (0..nodes.len().saturating_sub(1))
            .filter(|&i| {
                let (a, b) = (nodes[i], nodes[i + 1]);
                if b.u - a.u < MIN_PARAM_GAP {
                    return false;
                }
                match (a.point, b.point) {
                    (Some(p), Some(q)) => p.distance(q) > params.max_spacing,
                    // bisect toward the edge of a captured stretch
                    _ => a.point.is_some() != b.point.is_some(),
                }
            })
            .collect();
        if needs.is_empty() || nodes.len() + needs.len() > params.max_points {
            break;
        }
        let inserted: Vec<Node> = needs
            .par_iter()
            .map(|&i| {
                let u = 0.5 * (nodes[i].u + nodes[i + 1].u);
                Node { u, point: image(u, level) }
            })
            .collect();
        let mut merged = Vec::with_capacity(nodes.len() + inserted.len());
        let mut k = 0;
        for (i, n) in nodes.iter().enumerate() {
            merged.push(*n);
            if k < needs.len() && needs[k] == i {
                merged.push(inserted[k]);
                k += 1;
            }
        }
        *nodes = merged;
    }
    (0..nodes.len().saturating_sub(1))
        .filter(|&i| match (nodes[i].point, nodes[i + 1].point) {
            (Some(p), Some(q)) => p.distance(q) > params.max_spacing,
            _ => false,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HomoclinicCrossing {
    pub location: PlanePoint,
    /// Acute angle between the two manifolds at the crossing, radians.
    pub angle: f64,
    pub unstable_segment: usize,
    pub stable_segment: usize,
}

/// Radius, in units of `seed_delta`, of the disc around the fixed point
/// where crossings are ignored.
pub const EXCLUSION_FACTOR: f64 = 5.0;

/// All transversal crossings of an unstable and a stable branch of the
/// same saddle, away from the saddle itself.
pub fn detect_homoclinic(
    stable: &ManifoldPolyline,
    unstable: &ManifoldPolyline,
    transversality_tol: f64,
) -> Vec<HomoclinicCrossing> {
    let exclusion = EXCLUSION_FACTOR * stable.seed_delta.max(unstable.seed_delta);
    let center = unstable.fixed_point;
    let bbox = |a: PlanePoint, b: PlanePoint| (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y));
    let stable_segs: Vec<(usize, PlanePoint, PlanePoint, (f64, f64, f64, f64))> = stable
        .segments()
        .map(|(i, j)| {
            let (a, b) = (stable.points[i], stable.points[j]);
            (i, a, b, bbox(a, b))
        })
        .collect();
    let mut found: Vec<HomoclinicCrossing> = unstable
        .segments()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let (a, b) = (unstable.points[i], unstable.points[j]);
            let (x0, x1, y0, y1) = bbox(a, b);
            stable_segs
                .iter()
                .filter(move |(_, _, _, bb)| bb.0 <= x1 && bb.1 >= x0 && bb.2 <= y1 && bb.3 >= y0)
                .filter_map(move |&(k, c, d, _)| {
                    let (s, _) = segment_intersection(a, b, c, d)?;
                    let location = a + s * (b - a);
                    if location.distance(center) < exclusion {
                        return None;
                    }
                    let angle = line_angle(b - a, d - c);
                    (angle > transversality_tol).then_some(HomoclinicCrossing {
                        location,
                        angle,
                        unstable_segment: i,
                        stable_segment: k,
                    })
                })
        })
        .collect();
    found.sort_by_key(|c| (c.unstable_segment, c.stable_segment));
    found
}
