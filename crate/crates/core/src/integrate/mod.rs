//! Adaptive trajectory integration through singular, time-periodic velocity
//! fields, stroboscopic sections and the period map `R = Φ_{T₀}`.

mod dopri;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::velocity::{PlanePoint, VelocityField};

pub(crate) use dopri::{solve, Step, Stop};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Trajectories entering this disc around the vortex are reported as captured.
    pub vortex_cutoff: f64,
    pub max_steps: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            min_step: 1e-14,
            vortex_cutoff: 1e-6,
            max_steps: 100_000_000,
        }
    }
}

impl IntegratorSettings {
    /// Tolerances used for finite-difference Jacobians and Newton solves.
    pub fn for_jacobian() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, ..Self::default() }
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = rel_tol * 1e-2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("min_step", self.min_step),
            ("vortex_cutoff", self.vortex_cutoff),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.min_step >= self.max_step {
            return Err(Error::InvalidArgument("min_step must be smaller than max_step".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrajectoryStatus {
    Completed,
    VortexCapture,
    StepLimit,
}

impl TrajectoryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Completed => "COMPLETED",
            Self::VortexCapture => "VORTEX_CAPTURE",
            Self::StepLimit => "STEP_LIMIT",
        }
    }
}

impl From<Stop> for TrajectoryStatus {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Completed => Self::Completed,
            Stop::Capture => Self::VortexCapture,
            Stop::StepLimit => Self::StepLimit,
        }
    }
}

/// Accepted integration steps, monotone in the direction of integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, PlanePoint)>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn last(&self) -> (f64, PlanePoint) {
        *self.samples.last().expect("trajectory always holds its start")
    }
}

pub(crate) fn vortex_distance<F: VelocityField + ?Sized>(field: &F, t: f64, p: PlanePoint) -> f64 {
    field
        .vortex_position(t)
        .map_or(f64::INFINITY, |v| p.distance(v))
}

pub(crate) fn planar_rhs<F: VelocityField + ?Sized>(field: &F) -> impl Fn(f64, &[f64; 2]) -> Result<[f64; 2]> + '_ {
    move |t, y| {
        let v = field.velocity(PlanePoint::new(y[0], y[1]), t)?;
        Ok([v.vx, v.vy])
    }
}

pub(crate) fn planar_proximity<F: VelocityField + ?Sized>(field: &F) -> impl Fn(f64, &[f64; 2]) -> f64 + '_ {
    move |t, y| vortex_distance(field, t, PlanePoint::new(y[0], y[1]))
}

pub fn integrate_trajectory<F: VelocityField + ?Sized>(
    field: &F,
    start: PlanePoint,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    if !start.is_finite() || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument("start point and times must be finite".into()));
    }
    let mut samples = vec![(t0, start)];
    let out = solve(
        planar_rhs(field),
        planar_proximity(field),
        t0,
        t1,
        [start.x, start.y],
        None,
        settings,
        |s: &Step<2>| samples.push((s.t_new(), PlanePoint::new(s.y_new[0], s.y_new[1]))),
    );
    let end = PlanePoint::new(out.y[0], out.y[1]);
    if samples.last().map(|s| s.1) != Some(end) {
        samples.push((out.t, end));
    }
    Ok(Trajectory { samples, status: out.stop.into() })
}

/// Position at `t1` of the trajectory through `p` at `t0`.
pub fn flow<F: VelocityField + ?Sized>(
    field: &F,
    p: PlanePoint,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<PlanePoint> {
    let (y, _) = solve(planar_rhs(field), planar_proximity(field), t0, t1, [p.x, p.y], None, settings, |_| {})
        .into_result()?;
    Ok(PlanePoint::new(y[0], y[1]))
}

/// Image under the time-`T₀` flow started at `t = 0`.
pub fn period_map<F: VelocityField + ?Sized>(field: &F, p: PlanePoint, settings: &IntegratorSettings) -> Result<PlanePoint> {
    flow(field, p, 0.0, field.period(), settings)
}

/// A planar map with an inverse, as consumed by the fixed-point and
/// manifold machinery.
pub trait PlaneMap: Sync {
    fn apply(&self, p: PlanePoint) -> Result<PlanePoint>;
    fn apply_inverse(&self, p: PlanePoint) -> Result<PlanePoint>;
}

/// `R = Φ_{T₀}` (or an iterate `R^k`) for a periodic field.
#[derive(Debug, Clone, Copy)]
pub struct PeriodMap<'a, F: ?Sized> {
    field: &'a F,
    settings: IntegratorSettings,
    iterates: u32,
}

impl<'a, F: VelocityField + ?Sized> PeriodMap<'a, F> {
    pub fn new(field: &'a F, settings: IntegratorSettings) -> Self {
        Self { field, settings, iterates: 1 }
    }

    /// `R^k`, the stroboscopic map over `k` periods.
    pub fn iterated(mut self, k: u32) -> Self {
        self.iterates = k.max(1);
        self
    }

    pub fn field(&self) -> &'a F {
        self.field
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }
}

impl<F: VelocityField + ?Sized> PlaneMap for PeriodMap<'_, F> {
    fn apply(&self, p: PlanePoint) -> Result<PlanePoint> {
        let t1 = self.field.period() * f64::from(self.iterates);
        flow(self.field, p, 0.0, t1, &self.settings)
    }

    fn apply_inverse(&self, p: PlanePoint) -> Result<PlanePoint> {
        let t1 = self.field.period() * f64::from(self.iterates);
        flow(self.field, p, t1, 0.0, &self.settings)
    }
}

/// Fourth-order central finite-difference Jacobian of a planar map.
///
/// The second-order stencil loses several digits where the period map is
/// strongly stretching, which shows up directly in `det J`.
pub fn map_jacobian<M: PlaneMap + ?Sized>(map: &M, p: PlanePoint, step: f64) -> Result<Matrix2<f64>> {
    jacobian_with(|q| map.apply(q), p, step)
}

pub(crate) fn jacobian_with(
    f: impl Fn(PlanePoint) -> Result<PlanePoint>,
    p: PlanePoint,
    step: f64,
) -> Result<Matrix2<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    // (8[f(p+h) - f(p-h)] - [f(p+2h) - f(p-2h)]) / 12h
    let column = |dx: f64, dy: f64| -> Result<[f64; 2]> {
        let at = |k: f64| f(PlanePoint::new(p.x + k * dx, p.y + k * dy));
        let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
        let d = |a: f64, b: f64, c: f64, e: f64| (8.0 * (a - b) - (c - e)) / (12.0 * step);
        Ok([d(p1.x, m1.x, p2.x, m2.x), d(p1.y, m1.y, p2.y, m2.y)])
    };
    let cx = column(step, 0.0)?;
    let cy = column(0.0, step)?;
    Ok(Matrix2::new(cx[0], cy[0], cx[1], cy[1]))
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;

pub fn period_map_jacobian<F: VelocityField + ?Sized>(
    field: &F,
    p: PlanePoint,
    fd_step: f64,
    settings: &IntegratorSettings,
) -> Result<Matrix2<f64>> {
    map_jacobian(&PeriodMap::new(field, *settings), p, fd_step)
}

/// Stroboscopic points of one seed.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSection {
    pub seed: PlanePoint,
    /// Positions at `t = n T₀`, starting with the seed itself (`n = 0`).
    pub points: Vec<PlanePoint>,
    pub status: TrajectoryStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionDataset {
    pub period: f64,
    pub requested_periods: usize,
    pub seeds: Vec<SeedSection>,
}

impl SectionDataset {
    pub fn point_count(&self) -> usize {
        self.seeds.iter().map(|s| s.points.len()).sum()
    }
}

fn section_of_seed<F: VelocityField + ?Sized>(
    field: &F,
    seed: PlanePoint,
    periods: usize,
    settings: &IntegratorSettings,
) -> SeedSection {
    let period = field.period();
    let mut points = vec![seed];
    let mut status = TrajectoryStatus::Completed;
    if vortex_distance(field, 0.0, seed) < settings.vortex_cutoff {
        return SeedSection { seed, points, status: TrajectoryStatus::VortexCapture };
    }
    let mut y = [seed.x, seed.y];
    let mut h = None;
    for n in 0..periods {
        let t0 = period * n as f64;
        let out = solve(planar_rhs(field), planar_proximity(field), t0, t0 + period, y, h, settings, |_| {});
        if out.stop != Stop::Completed {
            status = out.stop.into();
            break;
        }
        y = out.y;
        h = Some(out.h_next);
        points.push(PlanePoint::new(y[0], y[1]));
    }
    SeedSection { seed, points, status }
}

/// Positions at `t = n T₀`, `n = 0..=periods`, for every seed. Seeds are
/// integrated in parallel; a captured seed stops early with its status
/// recorded.
pub fn stroboscopic_section<F: VelocityField + ?Sized>(
    field: &F,
    seeds: &[PlanePoint],
    periods: usize,
    settings: &IntegratorSettings,
) -> Result<SectionDataset> {
    settings.validate()?;
    let seeds = seeds
        .par_iter()
        .map(|&s| section_of_seed(field, s, periods, settings))
        .collect();
    Ok(SectionDataset { period: field.period(), requested_periods: periods, seeds })
}

/// One revolution of an orbit of an autonomous field around its vortex,
/// sampled so consecutive points are at most `spacing` apart.
///
/// Integration stops once the winding angle about the vortex reaches 2π.
pub fn trace_closed_orbit<F: VelocityField + ?Sized>(
    field: &F,
    seed: PlanePoint,
    spacing: f64,
    max_time: f64,
    settings: &IntegratorSettings,
) -> Result<Vec<PlanePoint>> {
    let center = field
        .vortex_position(0.0)
        .ok_or_else(|| Error::InvalidArgument("field has no vortex to wind around".into()))?;
    let angle = |p: PlanePoint| (p.y - center.y).atan2(p.x - center.x);
    let mut pts = vec![seed];
    let mut winding = 0.0;
    let mut last_angle = angle(seed);
    let mut done = false;
    let mut chunk_start = 0.0;
    let mut y = [seed.x, seed.y];
    let mut h = None;
    // integrate in chunks so the winding test can stop the run
    while !done && chunk_start < max_time {
        let chunk_end = (chunk_start + 1.0).min(max_time);
        let out = solve(
            planar_rhs(field),
            planar_proximity(field),
            chunk_start,
            chunk_end,
            y,
            h,
            settings,
            |s: &Step<2>| {
                if done {
                    return;
                }
                let len = (s.y_new[0] - s.y_old[0]).hypot(s.y_new[1] - s.y_old[1]);
                let sub = (len / spacing).ceil().max(1.0) as usize;
                for k in 1..=sub {
                    let t = s.t_old + s.h * k as f64 / sub as f64;
                    let q = if k == sub { s.y_new } else { s.dense(t) };
                    let p = PlanePoint::new(q[0], q[1]);
                    let a = angle(p);
                    let mut d = a - last_angle;
                    d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                    winding += d;
                    last_angle = a;
                    pts.push(p);
                    if winding.abs() >= std::f64::consts::TAU {
                        done = true;
                        return;
                    }
                }
            },
        );
        let (yy, hh) = out.into_result()?;
        y = yy;
        h = Some(hh);
        chunk_start = chunk_end;
    }
    if !done {
        return Err(Error::InvalidArgument(format!("orbit did not close within t = {max_time}")));
    }
    Ok(pts)
}
