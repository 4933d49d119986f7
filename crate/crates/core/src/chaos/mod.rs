//! Period-map analysis: fixed points, invariant manifolds, homoclinic
//! crossings, Lyapunov exponents and the twist/transversality checks.

pub mod fixed_point;
pub mod lyapunov;
pub mod manifold;
pub mod properties;
pub mod scan;

pub use fixed_point::{
    classify, find_fixed_point, find_fixed_point_with, guess_grid, search_fixed_points, Eigenvalues, FixedPointKind,
    FixedPointRecord, GuessOutcome, NewtonOptions,
};
pub use lyapunov::{lyapunov_exponent, LyapunovResult, LyapunovStatus};
pub use manifold::{detect_homoclinic, trace_manifold, Branch, HomoclinicCrossing, ManifoldParams, ManifoldPolyline, Side, Stability};
pub use properties::{verify_property_a, verify_property_b, PropertyAReport, PropertyBReport};
pub use scan::{scan_transition, ScanParams, SeedExponent, StateSummary, DEFAULT_CHAOS_THRESHOLD};
