//! Eigenstates of the 2-D isotropic harmonic oscillator (unit mass,
//! frequency and ħ) and the time-evolved three-mode superposition
//!
//! ```text
//! ψ(x, y, t) = a e^{-it} φ₀₀ + b e^{-i(γ₁+2t)} φ₁₀ + c e^{-i(γ₂+2t)} φ₀₁
//! ```
//!
//! Every function here is a pure closed-form evaluation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex wavefunction value.
pub type ComplexValue = Complex64;

/// Complex gradient `(∂ψ/∂x, ∂ψ/∂y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGradient {
    pub dx: ComplexValue,
    pub dy: ComplexValue,
}

/// Tolerance on `a² + b² + c² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Three-mode superposition of φ₀₀, φ₁₀ and φ₀₁ with real amplitudes and
/// two relative phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionState {
    a: f64,
    b: f64,
    c: f64,
    gamma1: f64,
    gamma2: f64,
}

/// One stationary component: complex coefficient at `t = 0` and quantum numbers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mode {
    pub coef: ComplexValue,
    pub nx: u32,
    pub ny: u32,
}

impl SuperpositionState {
    /// Builds a state from explicit amplitudes. The amplitudes must already
    /// be normalized.
    pub fn new(a: f64, b: f64, c: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("gamma1", gamma1), ("gamma2", gamma2)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} is not finite")));
            }
        }
        let norm = a * a + b * b + c * c;
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!(
                "amplitudes not normalized: a² + b² + c² = {norm}"
            )));
        }
        Ok(Self { a, b, c, gamma1, gamma2 })
    }

    /// The figure parameterization: `b = c`, `a = ρ b`, normalized so that
    /// `b = c = 1/√(2 + ρ²)`.
    pub fn from_ratio(a_over_b: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::from_ratios(a_over_b, 1.0, gamma1, gamma2)
    }

    /// General ratio parameterization `a = ρ b`, `c = κ b`.
    pub fn from_ratios(a_over_b: f64, c_over_b: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        if !a_over_b.is_finite() || !c_over_b.is_finite() {
            return Err(Error::InvalidArgument("amplitude ratios must be finite".into()));
        }
        let b = 1.0 / (1.0 + a_over_b * a_over_b + c_over_b * c_over_b).sqrt();
        let (a, c) = (a_over_b * b, c_over_b * b);
        // renormalize against rounding so the strict constructor accepts it
        let n = (a * a + b * b + c * c).sqrt();
        Self::new(a / n, b / n, c / n, gamma1, gamma2)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub(crate) fn modes(&self) -> [Mode; 3] {
        [
            Mode { coef: ComplexValue::new(self.a, 0.0), nx: 0, ny: 0 },
            Mode { coef: ComplexValue::from_polar(self.b, -self.gamma1), nx: 1, ny: 0 },
            Mode { coef: ComplexValue::from_polar(self.c, -self.gamma2), nx: 0, ny: 1 },
        ]
    }

    /// Temporal period of every observable built from the state. The
    /// eigenenergy gaps are integers, so this is always 2π.
    pub fn period(&self) -> f64 {
        2.0 * PI
    }
}

/// Physicists' Hermite polynomial by upward recurrence.
pub fn hermite(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * f64::from(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Derivative `Hₙ' = 2n Hₙ₋₁`.
fn hermite_deriv(n: u32, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        2.0 * f64::from(n) * hermite(n - 1, x)
    }
}

pub fn eigenenergy(nx: u32, ny: u32) -> f64 {
    f64::from(nx) + f64::from(ny) + 1.0
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn normalization(nx: u32, ny: u32) -> f64 {
    1.0 / (PI * 2f64.powi((nx + ny) as i32) * factorial(nx) * factorial(ny)).sqrt()
}

/// Normalized real eigenfunction φ_{nx,ny}(x, y).
pub fn eigenfunction(nx: u32, ny: u32, x: f64, y: f64) -> f64 {
    normalization(nx, ny) * (-0.5 * (x * x + y * y)).exp() * hermite(nx, x) * hermite(ny, y)
}

/// Polynomial part `N Hₙₓ(x) Hₙᵧ(y)` of an eigenfunction and its gradient.
fn polynomial_part(nx: u32, ny: u32, x: f64, y: f64) -> (f64, f64, f64) {
    let n = normalization(nx, ny);
    let (hx, hy) = (hermite(nx, x), hermite(ny, y));
    (n * hx * hy, n * hermite_deriv(nx, x) * hy, n * hx * hermite_deriv(ny, y))
}

/// Gaussian-stripped wavefunction `P` with `ψ = e^{-r²/2} P`, plus `∇P`.
///
/// The Gaussian is real, so it drops out of `Im(∇ψ/ψ)`; working with `P`
/// keeps the velocity well conditioned far from the origin.
pub(crate) fn reduced_psi(
    state: &SuperpositionState,
    x: f64,
    y: f64,
    t: f64,
) -> (ComplexValue, ComplexValue, ComplexValue) {
    let mut p = ComplexValue::new(0.0, 0.0);
    let mut px = p;
    let mut py = p;
    for m in state.modes() {
        let c = m.coef * ComplexValue::from_polar(1.0, -eigenenergy(m.nx, m.ny) * t);
        let (v, dx, dy) = polynomial_part(m.nx, m.ny, x, y);
        p += c * v;
        px += c * dx;
        py += c * dy;
    }
    (p, px, py)
}

pub fn evaluate_psi(state: &SuperpositionState, x: f64, y: f64, t: f64) -> ComplexValue {
    state
        .modes()
        .iter()
        .map(|m| {
            m.coef
                * ComplexValue::from_polar(1.0, -eigenenergy(m.nx, m.ny) * t)
                * eigenfunction(m.nx, m.ny, x, y)
        })
        .sum()
}

/// Analytic gradient of ψ using `Hₙ' = 2n Hₙ₋₁` and the Gaussian product rule.
pub fn evaluate_grad_psi(state: &SuperpositionState, x: f64, y: f64, t: f64) -> ComplexGradient {
    let (p, px, py) = reduced_psi(state, x, y, t);
    let g = (-0.5 * (x * x + y * y)).exp();
    ComplexGradient {
        dx: (px - p * x) * g,
        dy: (py - p * y) * g,
    }
}
