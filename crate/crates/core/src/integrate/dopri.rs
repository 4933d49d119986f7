//! Dormand–Prince 5(4) with PI step control and Hairer's continuous
//! extension, over fixed-size states.

use super::IntegratorSettings;
use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Largest fraction of `ρ²` a single step may span (ρ = distance to vortex).
pub(crate) const VORTEX_STEP_FRACTION: f64 = 0.1;

/// An accepted step, with its continuous extension.
pub(crate) struct Step<const N: usize> {
    pub t_old: f64,
    pub h: f64,
    pub y_old: [f64; N],
    pub y_new: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t_new(&self) -> f64 {
        self.t_old + self.h
    }

    /// State at an intermediate time within the step.
    pub fn dense(&self, t: f64) -> [f64; N] {
        let th = (t - self.t_old) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Completed,
    Capture,
    StepLimit,
}

pub(crate) struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stop: Stop,
    /// Suggested size of the next step, for restarts.
    pub h_next: f64,
}

impl<const N: usize> Outcome<N> {
    pub fn into_result(self) -> Result<([f64; N], f64)> {
        match self.stop {
            Stop::Completed => Ok((self.y, self.h_next)),
            Stop::Capture => Err(Error::VortexCapture { t: self.t, last: point_of(&self.y) }),
            Stop::StepLimit => Err(Error::StepLimit { t: self.t, last: point_of(&self.y) }),
        }
    }
}

fn point_of<const N: usize>(y: &[f64; N]) -> crate::velocity::PlanePoint {
    crate::velocity::PlanePoint::new(y[0], y[1])
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// `proximity(t, y)` returns the distance to the nearest vortex, used for
/// both the capture test and the `ρ²` step cap. `observer` sees every
/// accepted step.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    proximity: impl Fn(f64, &[f64; N]) -> f64,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    h_init: Option<f64>,
    settings: &IntegratorSettings,
    mut observer: impl FnMut(&Step<N>),
) -> Outcome<N> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let span = (t1 - t0).abs();
    let stop_at = |t: f64, y: [f64; N], stop: Stop, h: f64| Outcome { t, y, stop, h_next: h };

    if proximity(t, &y) < settings.vortex_cutoff {
        return stop_at(t, y, Stop::Capture, 0.0);
    }
    if span == 0.0 {
        return stop_at(t, y, Stop::Completed, h_init.unwrap_or(0.0));
    }

    let cap = |t: f64, y: &[f64; N]| {
        let rho = proximity(t, y);
        settings.max_step.min(VORTEX_STEP_FRACTION * rho * rho)
    };

    let mut k1 = match rhs(t, &y) {
        Ok(k) => k,
        Err(_) => return stop_at(t, y, Stop::Capture, 0.0),
    };
    let mut h = h_init.unwrap_or(1e-3).min(cap(t, &y)).max(settings.min_step);
    let mut fac_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut steps: u64 = 0;

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            return stop_at(t, y, Stop::Completed, h);
        }
        steps += 1;
        if steps > settings.max_steps {
            return stop_at(t, y, Stop::StepLimit, h);
        }
        h = h.min(cap(t, &y));
        let last = h >= remaining;
        if last {
            h = remaining;
        } else if h < settings.min_step {
            return stop_at(t, y, Stop::StepLimit, h);
        }
        let hs = h * dir;

        let stages = (|| -> Result<_> {
            let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
            let k6 = rhs(
                t + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + hs, &y_new)?;
            Ok((k2, k3, k4, k5, k6, k7, y_new))
        })();

        let (k3, k4, k5, k6, k7, y_new) = match stages {
            Ok((_k2, k3, k4, k5, k6, k7, y_new)) => (k3, k4, k5, k6, k7, y_new),
            Err(_) => {
                // a stage landed on the vortex core: shrink and retry
                rejected_last = true;
                h *= 0.25;
                if h < settings.min_step {
                    return stop_at(t, y, Stop::Capture, h);
                }
                continue;
            }
        };

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            rejected_last = true;
            h *= 0.25;
            continue;
        }

        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);
            rejected_last = false;

            let step = Step {
                t_old: t,
                h: hs,
                y_old: y,
                y_new,
                rcont: dense_coefficients(&y, &y_new, hs, &k1, &k3, &k4, &k5, &k6, &k7),
            };
            observer(&step);

            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            if !last {
                h = h_new;
            }
            if proximity(t, &y) < settings.vortex_cutoff {
                return stop_at(t, y, Stop::Capture, h);
            }
        } else {
            rejected_last = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dense_coefficients<const N: usize>(
    y: &[f64; N],
    y_new: &[f64; N],
    h: f64,
    k1: &[f64; N],
    k3: &[f64; N],
    k4: &[f64; N],
    k5: &[f64; N],
    k6: &[f64; N],
    k7: &[f64; N],
) -> [[f64; N]; 5] {
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    r
}
