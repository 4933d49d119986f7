use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{IntegratorSettings, PeriodMap, PlaneMap};
use crate::pointvortex::{PeriodicVortexPath, PointVortexField};
use crate::velocity::{PlanePoint, PlaneVector};

/// Angles averaged over at each radius in [`verify_property_a`].
pub const PROPERTY_A_ANGLES: usize = 8;
/// Nodes on the circle in [`verify_property_b`].
pub const PROPERTY_B_NODES: usize = 512;
/// Below this maximal radial deviation the image is taken to coincide with
/// the circle.
pub const DEGENERATE_DEVIATION: f64 = 1e-8;

/// Mean vortex position over one period; circles are centred here.
pub fn path_center(path: &PeriodicVortexPath) -> PlanePoint {
    let n = 256;
    let (mut x, mut y) = (0.0, 0.0);
    for k in 0..n {
        let p = path.position(path.period() * k as f64 / n as f64);
        x += p.x;
        y += p.y;
    }
    PlanePoint::new(x / n as f64, y / n as f64)
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyAReport {
    pub radii: Vec<f64>,
    /// `|∂_r R_θ|` averaged over the sampled angles, per radius.
    pub derivatives: Vec<f64>,
    /// Least-squares slope of `log|∂_r R_θ|` against `log r`.
    pub slope: f64,
}

/// Twist of the period map: fitted exponent of `∂_r R_θ` in `r`.
pub fn verify_property_a(
    path: &PeriodicVortexPath,
    radii: &[f64],
    settings: &IntegratorSettings,
) -> Result<PropertyAReport> {
    if radii.len() < 4 || radii.iter().any(|&r| !(r > 0.0 && r <= 0.5)) {
        return Err(Error::InvalidArgument("need at least 4 radii in (0, 0.5]".into()));
    }
    let field = PointVortexField::new(path.clone());
    let map = PeriodMap::new(&field, *settings);
    let c = path_center(path);
    let angle_of = |p: PlanePoint| (p.y - c.y).atan2(p.x - c.x);
    let derivatives = radii
        .par_iter()
        .map(|&r| -> Result<f64> {
            let h = 1e-5 * r;
            let mut sum = 0.0;
            for k in 0..PROPERTY_A_ANGLES {
                let th = TAU * k as f64 / PROPERTY_A_ANGLES as f64;
                let at = |rr: f64| c + PlaneVector::new(rr * th.cos(), rr * th.sin());
                let hi = angle_of(map.apply(at(r + h))?);
                let lo = angle_of(map.apply(at(r - h))?);
                sum += wrap(hi - lo) / (2.0 * h);
            }
            Ok((sum / PROPERTY_A_ANGLES as f64).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = derivatives.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(PropertyAReport { radii: radii.to_vec(), derivatives, slope: sxy / sxx })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyBReport {
    pub radius: f64,
    /// Sign changes of `|R(p) - c| - r` around the circle.
    pub crossings: usize,
    /// Smallest angle between the image curve and the circle at a crossing.
    pub min_angle: Option<f64>,
    pub max_deviation: f64,
    /// The image coincides with the circle to within [`DEGENERATE_DEVIATION`].
    pub degenerate: bool,
}

/// Image of the circle of radius `r` under the period map, compared with
/// the circle.
pub fn verify_property_b(path: &PeriodicVortexPath, r: f64, settings: &IntegratorSettings) -> Result<PropertyBReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let field = PointVortexField::new(path.clone());
    let map = PeriodMap::new(&field, *settings);
    let c = path_center(path);
    let n = PROPERTY_B_NODES;
    let images = (0..n)
        .into_par_iter()
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            map.apply(c + PlaneVector::new(r * th.cos(), r * th.sin()))
        })
        .collect::<Result<Vec<_>>>()?;
    let dev: Vec<f64> = images.iter().map(|p| p.distance(c) - r).collect();
    let max_deviation = dev.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if max_deviation < DEGENERATE_DEVIATION {
        return Ok(PropertyBReport { radius: r, crossings: 0, min_angle: None, max_deviation, degenerate: true });
    }
    let mut crossings = 0;
    let mut min_angle: Option<f64> = None;
    for i in 0..n {
        let j = (i + 1) % n;
        if (dev[i] < 0.0) == (dev[j] < 0.0) {
            continue;
        }
        crossings += 1;
        let s = dev[i] / (dev[i] - dev[j]);
        let chord = images[j] - images[i];
        let at = images[i] + s * chord;
        let radial = at - c;
        let sin = chord.dot(radial).abs() / (chord.norm() * radial.norm());
        let angle = sin.clamp(0.0, 1.0).asin();
        min_angle = Some(min_angle.map_or(angle, |m| m.min(angle)));
    }
    Ok(PropertyBReport { radius: r, crossings, min_angle, max_deviation, degenerate: false })
}
