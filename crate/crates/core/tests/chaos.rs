use std::f64::consts::TAU;

use bohm_vortex::chaos::*;
use bohm_vortex::geometry::polyline_distance;
use bohm_vortex::integrate::{IntegratorSettings, PeriodMap, PlaneMap};
use bohm_vortex::pointvortex::{PeriodicVortexPath, PointVortexField};
use bohm_vortex::velocity::BohmField;
use bohm_vortex::wavefunction::SuperpositionState;
use bohm_vortex::PlanePoint;

fn state(a_over_b: f64) -> SuperpositionState {
    SuperpositionState::from_ratio(a_over_b, 3.876968, 2.684916).unwrap()
}

fn fig2b_saddle(field: &BohmField) -> FixedPointRecord {
    let map = PeriodMap::new(field, IntegratorSettings::for_jacobian());
    find_fixed_point(&map, PlanePoint::new(0.6, 0.75), 1e-10, 50).unwrap()
}

#[test]
fn fig2b_saddle_spectrum() {
    let field = BohmField::new(state(0.02175));
    let fp = fig2b_saddle(&field);
    assert_eq!(fp.classification, FixedPointKind::Saddle);
    assert!(fp.location.distance(PlanePoint::new(0.6, 0.75)) < 0.2);
    let Eigenvalues::Real { values: [l1, l2] } = fp.eigenvalues else { panic!("complex saddle") };
    assert!((l1 * l2 - 1.0).abs() < 1e-4);
    assert!(l1.abs() > 1.0 && l2.abs() < 1.0);
    assert!(fp.residual < 1e-9);
    // the fixed point maps to itself under the default-tolerance map too
    let map = PeriodMap::new(&field, IntegratorSettings::default());
    assert!(map.apply(fp.location).unwrap().distance(fp.location) < 1e-8);
}

#[test]
fn stationary_vortex_circle_of_fixed_points() {
    let f = PointVortexField::new(PeriodicVortexPath::stationary(PlanePoint::default(), TAU).unwrap());
    let map = PeriodMap::new(&f, IntegratorSettings::for_jacobian());
    let fp = find_fixed_point(&map, PlanePoint::new(0.98, 0.1), 1e-10, 50).unwrap();
    assert!(fp.residual < 1e-10);
    assert_eq!(fp.classification, FixedPointKind::Parabolic);
    assert!((fp.location.distance(PlanePoint::default()) - 1.0).abs() < 1e-6);
}

#[test]
fn fig2b_unstable_manifold_is_invariant() {
    let field = BohmField::new(state(0.02175));
    let fp = fig2b_saddle(&field);
    let map = PeriodMap::new(&field, IntegratorSettings::default());
    let params = ManifoldParams { max_arclength: 3.0, ..Default::default() };
    let branch = Branch { stability: Stability::Unstable, side: Side::Plus };
    let m = trace_manifold(&map, &fp, branch, &params).unwrap();
    assert!(m.arclength >= 3.0 - params.max_spacing, "{}", m.arclength);
    assert!(m.points[0].distance(fp.location) <= params.seed_delta * (1.0 + 1e-12));
    for (i, j) in m.segments() {
        assert!(m.points[i].distance(m.points[j]) <= params.max_spacing * (1.0 + 1e-9));
    }
    // images of points below the last two levels land on a fully traced level
    let top = *m.levels.last().unwrap();
    assert!(top >= 4);
    let inner: Vec<_> = m.points.iter().zip(&m.levels).filter(|(_, &l)| l + 2 <= top).map(|(p, _)| *p).collect();
    for p in &inner {
        let q = map.apply(*p).unwrap();
        assert!(polyline_distance(q, &m.points) < 2.0 * params.max_spacing);
    }
}

#[test]
fn stable_manifold_is_invariant_backward() {
    let field = BohmField::new(state(0.02175));
    let fp = fig2b_saddle(&field);
    let map = PeriodMap::new(&field, IntegratorSettings::default());
    let params = ManifoldParams { max_arclength: 1.5, ..Default::default() };
    let branch = Branch { stability: Stability::Stable, side: Side::Minus };
    let m = trace_manifold(&map, &fp, branch, &params).unwrap();
    let top = *m.levels.last().unwrap();
    assert!(top >= 4);
    let inner: Vec<_> = m.points.iter().zip(&m.levels).filter(|(_, &l)| l + 2 <= top).map(|(p, _)| *p).collect();
    for p in &inner {
        let q = map.apply_inverse(*p).unwrap();
        assert!(polyline_distance(q, &m.points) < 2.0 * params.max_spacing);
    }
}

#[test]
fn integrable_lyapunov_null() {
    let field = BohmField::new(state(0.0));
    let r = lyapunov_exponent(&field, PlanePoint::new(0.8, 0.0), 500.0 * TAU, TAU, &IntegratorSettings::default())
        .unwrap();
    assert_eq!(r.status, LyapunovStatus::Complete);
    assert!(r.per_unit_time.abs() < 1e-3, "{}", r.per_unit_time);
    assert!((r.per_period - r.per_unit_time * TAU).abs() < 1e-15);
}

/// In a developed chaotic sea the estimate converges in time and does not
/// depend on the renormalization interval. (At a/b = 0.17651 the sea is full
/// of sticky islands and single-seed estimates stay intermittent.)
#[test]
fn chaotic_lyapunov_consistency() {
    let field = BohmField::new(state(1.0));
    let s = IntegratorSettings::default();
    for seed in [PlanePoint::new(-1.0, 1.0), PlanePoint::new(1.0, 0.5)] {
        let short = lyapunov_exponent(&field, seed, 800.0 * TAU, TAU, &s).unwrap();
        let long = lyapunov_exponent(&field, seed, 1600.0 * TAU, TAU, &s).unwrap();
        let half = lyapunov_exponent(&field, seed, 1600.0 * TAU, TAU / 2.0, &s).unwrap();
        assert!(long.per_period > 0.1, "{}", long.per_period);
        assert!(((long.per_period - short.per_period) / long.per_period).abs() < 0.2);
        assert!(((half.per_period - long.per_period) / long.per_period).abs() < 0.1);
    }
}

#[test]
fn perturbed_twist_slope_close_to_stationary() {
    let s = IntegratorSettings::default();
    let radii = [0.15, 0.2, 0.3, 0.4, 0.5];
    let stationary = PeriodicVortexPath::stationary(PlanePoint::default(), TAU).unwrap();
    let ellipse = PeriodicVortexPath::ellipse_from_state(&state(0.0553)).unwrap();
    let a = verify_property_a(&stationary, &radii, &s).unwrap().slope;
    let b = verify_property_a(&ellipse, &radii, &s).unwrap().slope;
    assert!((a + 3.0).abs() < 0.2);
    assert!((a - b).abs() < 0.3, "{a} {b}");
}

#[test]
fn property_b_crossings_are_even() {
    let ellipse = PeriodicVortexPath::ellipse_from_state(&state(0.0553)).unwrap();
    for r in [0.25, 0.3, 0.5] {
        let rep = verify_property_b(&ellipse, r, &IntegratorSettings::default()).unwrap();
        assert!(!rep.degenerate);
        assert_eq!(rep.crossings % 2, 0, "r = {r}");
        assert!(rep.crossings >= 2);
    }
}
