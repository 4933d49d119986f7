//! Unit point vortex moving on a prescribed periodic curve.
//!
//! The Cartesian field
//!
//! ```text
//! vx = -(y - y_v(t)) / ρ²,   vy = (x - x_v(t)) / ρ²,   ρ² = |r - r_v(t)|²
//! ```
//!
//! is the only form that is ever integrated.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::velocity::{PlanePoint, PlaneVector, VelocityField};
use crate::wavefunction::SuperpositionState;

/// Below this distance from the vortex the field is not evaluated.
pub const MODEL_CORE_RADIUS: f64 = 1e-10;

pub const MIN_PATH_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum PeriodicVortexPath {
    Stationary { center: PlanePoint, period: f64 },
    /// `x_v = A_x sin(γ₂ + ωt)`, `y_v = A_y sin(γ₁ + ωt)` with `ω = 2π/T₀`.
    Ellipse {
        amplitude_x: f64,
        amplitude_y: f64,
        gamma1: f64,
        gamma2: f64,
        period: f64,
    },
    Sampled(SampledPath),
}

impl PeriodicVortexPath {
    pub fn stationary(center: PlanePoint, period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(Self::Stationary { center, period })
    }

    pub fn ellipse(amplitude_x: f64, amplitude_y: f64, gamma1: f64, gamma2: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        if ![amplitude_x, amplitude_y, gamma1, gamma2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("ellipse parameters must be finite".into()));
        }
        Ok(Self::Ellipse { amplitude_x, amplitude_y, gamma1, gamma2, period })
    }

    /// The vortex path of an oscillator superposition, period 2π.
    pub fn ellipse_from_state(state: &SuperpositionState) -> Result<Self> {
        let s = (state.gamma1() - state.gamma2()).sin();
        if state.b() == 0.0 || state.c() == 0.0 || s.abs() < 1e-15 {
            return Err(Error::DegenerateState("state has no periodic vortex path".into()));
        }
        Self::ellipse(
            state.a() / (SQRT_2 * state.b() * s),
            -state.a() / (SQRT_2 * state.c() * s),
            state.gamma1(),
            state.gamma2(),
            2.0 * PI,
        )
    }

    pub fn sampled(samples: Vec<PlanePoint>, period: f64) -> Result<Self> {
        Ok(Self::Sampled(SampledPath::new(samples, period)?))
    }

    pub fn period(&self) -> f64 {
        match self {
            Self::Stationary { period, .. } | Self::Ellipse { period, .. } => *period,
            Self::Sampled(s) => s.period,
        }
    }

    pub fn position(&self, t: f64) -> PlanePoint {
        match self {
            Self::Stationary { center, .. } => *center,
            Self::Ellipse { amplitude_x, amplitude_y, gamma1, gamma2, period } => {
                let phase = 2.0 * PI * (t / period).rem_euclid(1.0);
                PlanePoint::new(amplitude_x * (gamma2 + phase).sin(), amplitude_y * (gamma1 + phase).sin())
            }
            Self::Sampled(s) => s.eval(t),
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("period must be positive, got {period}")))
    }
}

/// Periodic cubic spline through uniformly spaced samples over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    samples: Vec<PlanePoint>,
    /// second derivatives (x, y) at the knots
    moments: Vec<(f64, f64)>,
    period: f64,
}

impl SampledPath {
    pub fn new(samples: Vec<PlanePoint>, period: f64) -> Result<Self> {
        check_period(period)?;
        if samples.len() < MIN_PATH_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "sampled path needs at least {MIN_PATH_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if !samples.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidArgument("sampled path has non-finite samples".into()));
        }
        let h = period / samples.len() as f64;
        let mx = spline_moments(&samples.iter().map(|p| p.x).collect::<Vec<_>>(), h);
        let my = spline_moments(&samples.iter().map(|p| p.y).collect::<Vec<_>>(), h);
        Ok(Self {
            samples,
            moments: mx.into_iter().zip(my).collect(),
            period,
        })
    }

    fn eval(&self, t: f64) -> PlanePoint {
        let n = self.samples.len();
        let h = self.period / n as f64;
        let u = (t / self.period).rem_euclid(1.0) * n as f64;
        let i = (u.floor() as usize).min(n - 1);
        let s = u - i as f64;
        let j = (i + 1) % n;
        let r = 1.0 - s;
        let c0 = h * h / 6.0 * (r * r * r - r);
        let c1 = h * h / 6.0 * (s * s * s - s);
        let (p, q) = (self.samples[i], self.samples[j]);
        let (mi, mj) = (self.moments[i], self.moments[j]);
        PlanePoint::new(
            r * p.x + s * q.x + c0 * mi.0 + c1 * mj.0,
            r * p.y + s * q.y + c0 * mi.1 + c1 * mj.1,
        )
    }
}

/// Solves the cyclic system `M₋ + 4M + M₊ = 6/h² (y₊ - 2y + y₋)` by
/// Gauss–Seidel; the matrix is strictly diagonally dominant.
fn spline_moments(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let rhs: Vec<f64> = (0..n)
        .map(|i| 6.0 / (h * h) * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]))
        .collect();
    let mut m = vec![0.0; n];
    for _ in 0..200 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let new = (rhs[i] - m[(i + n - 1) % n] - m[(i + 1) % n]) / 4.0;
            change = change.max((new - m[i]).abs());
            m[i] = new;
        }
        let scale = rhs.iter().fold(1.0f64, |a, r| a.max(r.abs()));
        if change <= 1e-16 * scale {
            break;
        }
    }
    m
}

pub fn model_velocity(path: &PeriodicVortexPath, x: f64, y: f64, t: f64) -> Result<PlaneVector> {
    let rv = path.position(t);
    let (dx, dy) = (x - rv.x, y - rv.y);
    let rho2 = dx * dx + dy * dy;
    if rho2 < MODEL_CORE_RADIUS * MODEL_CORE_RADIUS {
        return Err(Error::VortexProximity { x, y, t });
    }
    Ok(PlaneVector::new(-dy / rho2, dx / rho2))
}

/// `H = ½ log r + r [cos θ y_v(t) - sin θ x_v(t)]`, kept as documentation of
/// the perturbation structure; it is never used to drive the dynamics.
pub fn model_hamiltonian(path: &PeriodicVortexPath, r: f64, theta: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let rv = path.position(t);
    Ok(0.5 * r.ln() + r * (theta.cos() * rv.y - theta.sin() * rv.x))
}

/// Exact time-`T₀` flow of a stationary unit vortex in polar coordinates:
/// circles are invariant and rotate by `T₀/r²`.
pub fn unperturbed_map(r: f64, theta: f64, period: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    Ok((r, theta + period / (r * r)))
}

/// `∫₀^{T₀} [cos θ y_v(t) - sin θ x_v(t)] dt` at fixed θ.
pub fn condition_integral(path: &PeriodicVortexPath, theta: f64) -> f64 {
    // periodic trapezoid; the node count is a multiple of any sensible
    // sample count so spline knots are hit exactly
    const NODES: usize = 4096;
    let t0 = path.period();
    let h = t0 / NODES as f64;
    let (c, s) = (theta.cos(), theta.sin());
    (0..NODES)
        .map(|k| {
            let p = path.position(h * k as f64);
            c * p.y - s * p.x
        })
        .sum::<f64>()
        * h
}

/// The point-vortex model as a [`VelocityField`].
#[derive(Debug, Clone)]
pub struct PointVortexField {
    path: PeriodicVortexPath,
}

impl PointVortexField {
    pub fn new(path: PeriodicVortexPath) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &PeriodicVortexPath {
        &self.path
    }
}

impl VelocityField for PointVortexField {
    fn velocity(&self, p: PlanePoint, t: f64) -> Result<PlaneVector> {
        model_velocity(&self.path, p.x, p.y, t)
    }

    fn period(&self) -> f64 {
        self.path.period()
    }

    fn vortex_position(&self, t: f64) -> Option<PlanePoint> {
        Some(self.path.position(t))
    }
}
