use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{map_jacobian, PlaneMap, DEFAULT_FD_STEP};
use crate::velocity::{PlanePoint, PlaneVector};

/// Band around `|trace| = 2` classified as parabolic.
pub const PARABOLIC_BAND: f64 = 1e-3;

/// Relative singular value of `J - I` below which a direction is treated
/// as null in the Newton step.
const SVD_CUTOFF: f64 = 1e-7;
/// `‖J - I‖` below finite-difference noise: no usable Newton direction.
const SINGULAR_NORM: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FixedPointKind {
    Saddle,
    Elliptic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eigenvalues {
    Real { values: [f64; 2] },
    Complex { re: f64, im: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub location: PlanePoint,
    /// Row-major Jacobian of the map at `location`.
    #[serde(serialize_with = "serialize_matrix")]
    pub jacobian: Matrix2<f64>,
    /// Real eigenvalues are ordered by decreasing modulus.
    pub eigenvalues: Eigenvalues,
    /// Unit eigenvectors matching `eigenvalues` (real case only).
    pub eigenvectors: Option<[PlaneVector; 2]>,
    pub classification: FixedPointKind,
    /// `|R(p) - p|`.
    pub residual: f64,
    pub iterations: usize,
}

fn serialize_matrix<S: serde::Serializer>(m: &Matrix2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&[m[(0, 0)], m[(0, 1)]])?;
    seq.serialize_element(&[m[(1, 0)], m[(1, 1)]])?;
    seq.end()
}

impl FixedPointRecord {
    pub fn trace(&self) -> f64 {
        self.jacobian.trace()
    }

    pub fn det(&self) -> f64 {
        self.jacobian.determinant()
    }

    /// `(λ_u, λ_s)` and their eigenvectors, for saddles.
    pub fn saddle_directions(&self) -> Option<((f64, PlaneVector), (f64, PlaneVector))> {
        match (self.classification, self.eigenvalues, self.eigenvectors) {
            (FixedPointKind::Saddle, Eigenvalues::Real { values }, Some(vecs)) => {
                Some(((values[0], vecs[0]), (values[1], vecs[1])))
            }
            _ => None,
        }
    }
}

/// Eigen-decomposition and classification of a 2×2 map Jacobian.
pub fn classify(jacobian: &Matrix2<f64>) -> (Eigenvalues, Option<[PlaneVector; 2]>, FixedPointKind) {
    let tr = jacobian.trace();
    let det = jacobian.determinant();
    let disc = tr * tr - 4.0 * det;
    let kind = if tr.abs() > 2.0 + PARABOLIC_BAND {
        FixedPointKind::Saddle
    } else if tr.abs() < 2.0 - PARABOLIC_BAND {
        FixedPointKind::Elliptic
    } else {
        FixedPointKind::Parabolic
    };
    if disc < 0.0 {
        return (Eigenvalues::Complex { re: tr / 2.0, im: (-disc).sqrt() / 2.0 }, None, kind);
    }
    let sq = disc.sqrt();
    // avoid cancellation in the smaller root
    let big = if tr >= 0.0 { (tr + sq) / 2.0 } else { (tr - sq) / 2.0 };
    let small = if big != 0.0 { det / big } else { 0.0 };
    let vec_for = |lam: f64| {
        let (a, b, c, d) = (jacobian[(0, 0)], jacobian[(0, 1)], jacobian[(1, 0)], jacobian[(1, 1)]);
        let v1 = PlaneVector::new(b, lam - a);
        let v2 = PlaneVector::new(lam - d, c);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let n = v.norm();
        if n == 0.0 {
            PlaneVector::new(1.0, 0.0)
        } else {
            (1.0 / n) * v
        }
    };
    (
        Eigenvalues::Real { values: [big, small] },
        Some([vec_for(big), vec_for(small)]),
        kind,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, fd_step: DEFAULT_FD_STEP }
    }
}

pub fn find_fixed_point<M: PlaneMap + ?Sized>(
    map: &M,
    guess: PlanePoint,
    newton_tol: f64,
    max_iter: usize,
) -> Result<FixedPointRecord> {
    find_fixed_point_with(map, guess, &NewtonOptions { tol: newton_tol, max_iter, ..Default::default() })
}

/// Damped Newton on `F(p) = R(p) - p` with a finite-difference Jacobian.
///
/// Steps are halved until `|F|` decreases. When `J - I` is rank deficient
/// (a circle of fixed points, say) the minimum-norm least-squares step is
/// used instead of the inverse.
pub fn find_fixed_point_with<M: PlaneMap + ?Sized>(
    map: &M,
    guess: PlanePoint,
    opts: &NewtonOptions,
) -> Result<FixedPointRecord> {
    let residual_at = |p: PlanePoint| -> Result<(PlaneVector, f64)> {
        let f = map.apply(p)? - p;
        Ok((f, f.norm()))
    };
    let mut p = guess;
    let (mut f, mut res) = residual_at(p)?;
    let mut iterations = 0;
    while res >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        iterations += 1;
        let a = map_jacobian(map, p, opts.fd_step)? - Matrix2::identity();
        if a.norm() < SINGULAR_NORM {
            return Err(Error::SingularJacobian { det: a.determinant() });
        }
        let rhs = Vector2::new(-f.vx, -f.vy);
        // singular values below finite-difference noise are dropped, which
        // gives the minimum-norm step when J - I is (nearly) rank deficient
        let svd = a.svd(true, true);
        let cutoff = SVD_CUTOFF * svd.singular_values.max();
        let dp = svd.solve(&rhs, cutoff).unwrap_or_else(|_| Vector2::zeros());
        let dp = PlaneVector::new(dp[0], dp[1]);

        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let trial = p + lam * dp;
            match residual_at(trial) {
                Ok((ft, rt)) if rt < res => {
                    accepted = Some((trial, ft, rt));
                    break;
                }
                _ => lam *= 0.5,
            }
        }
        match accepted {
            Some((np, nf, nr)) => {
                p = np;
                f = nf;
                res = nr;
            }
            None => return Err(Error::NoConvergence { iterations, residual: res }),
        }
    }
    let jacobian = map_jacobian(map, p, opts.fd_step)?;
    let (eigenvalues, eigenvectors, classification) = classify(&jacobian);
    Ok(FixedPointRecord {
        location: p,
        jacobian,
        eigenvalues,
        eigenvectors,
        classification,
        residual: res,
        iterations,
    })
}

/// Uniform grid of guesses over `[lo, hi]²`.
pub fn guess_grid(lo: f64, hi: f64, per_axis: usize) -> Vec<PlanePoint> {
    let n = per_axis.max(1);
    let at = |i: usize| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| PlanePoint::new(at(i), at(j)))).collect()
}

/// Outcome of one guess in a multi-start search.
#[derive(Debug, Clone)]
pub struct GuessOutcome {
    pub guess: PlanePoint,
    pub result: Result<FixedPointRecord>,
}

/// Runs Newton from every guess in parallel and returns, alongside the raw
/// per-guess outcomes, the distinct fixed points (merged within `dedup_tol`).
pub fn search_fixed_points<M: PlaneMap + ?Sized>(
    map: &M,
    guesses: &[PlanePoint],
    opts: &NewtonOptions,
    dedup_tol: f64,
) -> (Vec<FixedPointRecord>, Vec<GuessOutcome>) {
    let outcomes: Vec<GuessOutcome> = guesses
        .par_iter()
        .map(|&g| GuessOutcome { guess: g, result: find_fixed_point_with(map, g, opts) })
        .collect();
    let mut unique: Vec<FixedPointRecord> = Vec::new();
    for o in &outcomes {
        if let Ok(r) = &o.result {
            if unique.iter().all(|u| u.location.distance(r.location) > dedup_tol) {
                unique.push(r.clone());
            }
        }
    }
    (unique, outcomes)
}
