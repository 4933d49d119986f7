//! Bohmian velocity field `v = Im(∇ψ/ψ)` of the oscillator superposition,
//! the analytic vortex path, the linearized near-vortex field and
//! circulation around closed contours.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavefunction::{reduced_psi, ComplexGradient, SuperpositionState};

/// A point of the plane, in oscillator units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

/// A velocity (or displacement) vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlaneVector {
    pub vx: f64,
    pub vy: f64,
}

impl PlanePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: PlanePoint) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl PlaneVector {
    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn norm(self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn dot(self, o: PlaneVector) -> f64 {
        self.vx * o.vx + self.vy * o.vy
    }

    pub fn cross(self, o: PlaneVector) -> f64 {
        self.vx * o.vy - self.vy * o.vx
    }
}

impl Sub for PlanePoint {
    type Output = PlaneVector;
    fn sub(self, o: PlanePoint) -> PlaneVector {
        PlaneVector::new(self.x - o.x, self.y - o.y)
    }
}

impl Add<PlaneVector> for PlanePoint {
    type Output = PlanePoint;
    fn add(self, v: PlaneVector) -> PlanePoint {
        PlanePoint::new(self.x + v.vx, self.y + v.vy)
    }
}

impl Add for PlaneVector {
    type Output = PlaneVector;
    fn add(self, o: PlaneVector) -> PlaneVector {
        PlaneVector::new(self.vx + o.vx, self.vy + o.vy)
    }
}

impl Sub for PlaneVector {
    type Output = PlaneVector;
    fn sub(self, o: PlaneVector) -> PlaneVector {
        PlaneVector::new(self.vx - o.vx, self.vy - o.vy)
    }
}

impl Mul<PlaneVector> for f64 {
    type Output = PlaneVector;
    fn mul(self, v: PlaneVector) -> PlaneVector {
        PlaneVector::new(self * v.vx, self * v.vy)
    }
}

/// A time-dependent planar velocity field.
///
/// Implementations are immutable and shared across worker threads.
pub trait VelocityField: Send + Sync {
    fn velocity(&self, p: PlanePoint, t: f64) -> Result<PlaneVector>;

    /// Temporal period `T₀` of the field.
    fn period(&self) -> f64;

    /// Position of the (single) vortex at time `t`, when known.
    fn vortex_position(&self, _t: f64) -> Option<PlanePoint> {
        None
    }
}

impl<F: VelocityField + ?Sized> VelocityField for &F {
    fn velocity(&self, p: PlanePoint, t: f64) -> Result<PlaneVector> {
        (**self).velocity(p, t)
    }
    fn period(&self) -> f64 {
        (**self).period()
    }
    fn vortex_position(&self, t: f64) -> Option<PlanePoint> {
        (**self).vortex_position(t)
    }
}

/// Below this `|ψ|²` the phase gradient is treated as undefined.
pub const PSI_SQ_FLOOR: f64 = 1e-24;

pub fn bohm_velocity(state: &SuperpositionState, x: f64, y: f64, t: f64) -> Result<PlaneVector> {
    let (p, px, py) = reduced_psi(state, x, y, t);
    let psi_sq = p.norm_sqr() * (-(x * x + y * y)).exp();
    if !(psi_sq >= PSI_SQ_FLOOR) {
        return Err(Error::VortexProximity { x, y, t });
    }
    // ψ = e^{-r²/2} P and the Gaussian factor is real, so Im(∇ψ/ψ) = Im(∇P/P)
    Ok(PlaneVector::new((px / p).im, (py / p).im))
}

/// Position of the single node of the three-mode state at time `t`.
///
/// Solving `ψ = 0` for the time-evolved state gives
/// `x_v = a sin(γ₂+t) / (√2 b sin(γ₁-γ₂))`, `y_v = -a sin(γ₁+t) / (√2 c sin(γ₁-γ₂))`.
pub fn vortex_position(state: &SuperpositionState, t: f64) -> Result<PlanePoint> {
    let s = (state.gamma1() - state.gamma2()).sin();
    if state.b() == 0.0 || state.c() == 0.0 || s.abs() < 1e-15 {
        return Err(Error::DegenerateState(format!(
            "vortex path undefined: b = {}, c = {}, sin(γ₁-γ₂) = {s}",
            state.b(),
            state.c()
        )));
    }
    let a = state.a();
    Ok(PlanePoint::new(
        a / (SQRT_2 * state.b()) * (state.gamma2() + t).sin() / s,
        -a / (SQRT_2 * state.c()) * (state.gamma1() + t).sin() / s,
    ))
}

/// Linearized field around a vortex at `rv` with gradient `w = ∇ψ(rv)`.
///
/// Planar reduction of `(-i/2)[d × (w × w*)] / |d·w|²` with `d = r - rv`:
/// `v = Im(w_x w_y*) (d_y, -d_x) / |d·w|²`, which is `Im(w / (w·d))`.
pub fn near_vortex_velocity(w: ComplexGradient, rv: PlanePoint, x: f64, y: f64) -> Result<PlaneVector> {
    let (dx, dy) = (x - rv.x, y - rv.y);
    let denom = (w.dx * dx + w.dy * dy).norm_sqr();
    let scale = (w.dx.norm_sqr() + w.dy.norm_sqr()) * (dx * dx + dy * dy);
    if !(denom > 1e-300 && denom > 1e-28 * scale) {
        return Err(Error::VortexProximity { x, y, t: f64::NAN });
    }
    let k = (w.dx * w.dy.conj()).im / denom;
    Ok(PlaneVector::new(k * dy, -k * dx))
}

/// The oscillator's Bohmian field as a [`VelocityField`].
#[derive(Debug, Clone, Copy)]
pub struct BohmField {
    state: SuperpositionState,
    has_vortex_path: bool,
}

impl BohmField {
    pub fn new(state: SuperpositionState) -> Self {
        Self {
            has_vortex_path: vortex_position(&state, 0.0).is_ok(),
            state,
        }
    }

    pub fn state(&self) -> &SuperpositionState {
        &self.state
    }
}

impl VelocityField for BohmField {
    fn velocity(&self, p: PlanePoint, t: f64) -> Result<PlaneVector> {
        bohm_velocity(&self.state, p.x, p.y, t)
    }

    fn period(&self) -> f64 {
        self.state.period()
    }

    fn vortex_position(&self, t: f64) -> Option<PlanePoint> {
        if self.has_vortex_path {
            vortex_position(&self.state, t).ok()
        } else {
            None
        }
    }
}

/// Closed curve sampled uniformly in its parameter `s ∈ [0, 2π)`.
///
/// Tangents `dr/ds` come from spectral differentiation of the samples, so the
/// periodic trapezoid rule used by [`circulation`] converges geometrically.
#[derive(Debug, Clone)]
pub struct ClosedContour {
    points: Vec<PlanePoint>,
    tangents: Vec<PlaneVector>,
}

pub const MIN_CONTOUR_NODES: usize = 64;

impl ClosedContour {
    pub fn new(points: Vec<PlanePoint>) -> Result<Self> {
        let n = points.len();
        if n < MIN_CONTOUR_NODES {
            return Err(Error::InvalidArgument(format!(
                "contour needs at least {MIN_CONTOUR_NODES} nodes, got {n}"
            )));
        }
        for i in 0..n {
            let (p, q) = (points[i], points[(i + 1) % n]);
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!("contour node {i} not finite")));
            }
            if p == q {
                return Err(Error::InvalidArgument(format!("contour nodes {i} and {} coincide", (i + 1) % n)));
            }
        }
        let tangents = spectral_derivative(&points);
        Ok(Self { points, tangents })
    }

    pub fn circle(center: PlanePoint, radius: f64, nodes: usize) -> Result<Self> {
        Self::ellipse(center, radius, radius, 0.0, nodes)
    }

    /// Ellipse with semi-axes `(sa, sb)` rotated by `angle`, traversed counterclockwise.
    pub fn ellipse(center: PlanePoint, sa: f64, sb: f64, angle: f64, nodes: usize) -> Result<Self> {
        let (ca, sn) = (angle.cos(), angle.sin());
        let points = (0..nodes)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / nodes as f64;
                let (u, v) = (sa * s.cos(), sb * s.sin());
                PlanePoint::new(center.x + ca * u - sn * v, center.y + sn * u + ca * v)
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }
}

/// Derivative with respect to the uniform parameter `s_j = 2πj/N` via a
/// direct DFT (contours are a few hundred nodes).
fn spectral_derivative(points: &[PlanePoint]) -> Vec<PlaneVector> {
    use num_complex::Complex64;
    let n = points.len();
    let z: Vec<Complex64> = points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
    let root = |k: usize, j: usize| Complex64::from_polar(1.0, 2.0 * PI * ((k * j) % n) as f64 / n as f64);
    let coeffs: Vec<Complex64> = (0..n)
        .map(|k| z.iter().enumerate().map(|(j, zj)| zj * root(k, j).conj()).sum())
        .collect();
    let wave = |k: usize| -> f64 {
        if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        }
    };
    (0..n)
        .map(|j| {
            let d: Complex64 = (0..n)
                .map(|k| Complex64::new(0.0, wave(k)) * coeffs[k] * root(k, j))
                .sum::<Complex64>()
                / n as f64;
            PlaneVector::new(d.re, d.im)
        })
        .collect()
}

/// Line integral `∮ v·dr` at time `t` by the periodic trapezoid rule.
pub fn circulation<F: VelocityField + ?Sized>(field: &F, contour: &ClosedContour, t: f64) -> Result<f64> {
    let n = contour.points.len();
    let mut sum = 0.0;
    for (p, tan) in contour.points.iter().zip(&contour.tangents) {
        sum += field.velocity(*p, t)?.dot(*tan);
    }
    Ok(sum * 2.0 * PI / n as f64)
}
