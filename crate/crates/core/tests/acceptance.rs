//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! Run with `cargo test -p bohm-vortex --test acceptance`.

use std::f64::consts::TAU;
use std::io::Write;

use bohm_vortex::chaos::{
    detect_homoclinic, find_fixed_point, lyapunov_exponent, scan_transition, trace_manifold, verify_property_a,
    verify_property_b, Branch, ScanParams, FixedPointKind, FixedPointRecord, ManifoldParams, Side, Stability,
    DEFAULT_CHAOS_THRESHOLD,
};
use bohm_vortex::geometry::polyline_distance;
use bohm_vortex::integrate::{
    flow, PlaneMap, map_jacobian, stroboscopic_section, trace_closed_orbit, IntegratorSettings, PeriodMap, TrajectoryStatus,
    DEFAULT_FD_STEP,
};
use bohm_vortex::pointvortex::{PeriodicVortexPath, PointVortexField};
use bohm_vortex::velocity::{bohm_velocity, circulation, near_vortex_velocity, vortex_position, BohmField, ClosedContour};
use bohm_vortex::wavefunction::{evaluate_grad_psi, evaluate_psi, SuperpositionState};
use bohm_vortex::{PlanePoint, PlaneVector, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G1: f64 = 3.876968;
const G2: f64 = 2.684916;
const C4_PERIODS: usize = 1600;

fn state(a_over_b: f64) -> SuperpositionState {
    SuperpositionState::from_ratio(a_over_b, G1, G2).unwrap()
}

/// Written to the stderr handle directly so the line shows even when the
/// harness captures output of passing tests.
fn report(n: u32, name: &str, ok: bool, detail: String) {
    let line = format!("criterion {n} ({name}): {}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn polar(r: f64, th: f64) -> PlanePoint {
    PlanePoint::new(r * th.cos(), r * th.sin())
}

#[test]
fn c1_integrable_limit() {
    let field = BohmField::new(state(0.0));
    let settings = IntegratorSettings::default();
    let seeds: Vec<PlanePoint> = (0..20).map(|k| polar(0.15 + 0.055 * k as f64, 0.7 * k as f64)).collect();
    let periods = 200;
    let section = stroboscopic_section(&field, &seeds, periods, &settings).unwrap();
    let mut worst_dev = 0.0_f64;
    let mut complete = true;
    for s in &section.seeds {
        complete &= s.status == TrajectoryStatus::Completed && s.points.len() == periods + 1;
        let orbit = trace_closed_orbit(&field, s.seed, 1e-3, 500.0, &settings).unwrap();
        for p in &s.points {
            worst_dev = worst_dev.max(polyline_distance(*p, &orbit));
        }
    }
    let worst_lambda = seeds
        .iter()
        .map(|&s| lyapunov_exponent(&field, s, periods as f64 * TAU, TAU, &settings).unwrap().per_unit_time.abs())
        .fold(0.0_f64, f64::max);
    let ok = complete && worst_dev < 1e-4 && worst_lambda < 1e-3;
    report(1, "integrable limit", ok, format!("max deviation {worst_dev:.3e}, max |λ| {worst_lambda:.3e}/time"));
    assert!(ok);
}

/// Saddle near (0.6, 0.75) for the first ratio of the small-a/b family that
/// yields one.
fn fig2_saddle() -> Option<(f64, FixedPointRecord)> {
    let target = PlanePoint::new(0.6, 0.75);
    for ab in [0.02175, 0.01082, 0.0328, 0.0440] {
        let field = BohmField::new(state(ab));
        let map = PeriodMap::new(&field, IntegratorSettings::for_jacobian());
        if let Ok(r) = find_fixed_point(&map, target, 1e-10, 50) {
            if r.classification == FixedPointKind::Saddle && r.location.distance(target) < 0.2 && r.residual < 1e-9 {
                return Some((ab, r));
            }
        }
    }
    None
}

#[test]
fn c2_saddle_location() {
    let found = fig2_saddle();
    let detail = match &found {
        Some((ab, r)) => format!(
            "a/b = {ab}: saddle at ({:.6}, {:.6}), trace {:.4}, det {:.8}, residual {:.2e}",
            r.location.x,
            r.location.y,
            r.trace(),
            r.det(),
            r.residual
        ),
        None => "no saddle within 0.2 of (0.6, 0.75)".into(),
    };
    let ok = found.as_ref().is_some_and(|(_, r)| (r.det() - 1.0).abs() < 1e-4);
    report(2, "saddle location", ok, detail);
    assert!(ok);
}

#[test]
fn c3_homoclinic_transversality() {
    let (ab, fp) = fig2_saddle().expect("criterion 2 saddle");
    let field = BohmField::new(state(ab));
    let map = PeriodMap::new(&field, IntegratorSettings::default());
    let params = ManifoldParams { max_arclength: 6.0, ..Default::default() };
    let trace = |stability, side| trace_manifold(&map, &fp, Branch { stability, side }, &params).unwrap();
    let unstable = [trace(Stability::Unstable, Side::Plus), trace(Stability::Unstable, Side::Minus)];
    let stable = [trace(Stability::Stable, Side::Plus), trace(Stability::Stable, Side::Minus)];
    let mut best = 0.0_f64;
    let mut count = 0;
    for u in &unstable {
        for s in &stable {
            for c in detect_homoclinic(s, u, 1e-3) {
                count += 1;
                best = best.max(c.angle);
            }
        }
    }
    let ok = count >= 1 && best > 1e-3;
    report(
        3,
        "homoclinic transversality",
        ok,
        format!(
            "a/b = {ab}: {count} crossings, largest angle {best:.3e} rad; arclengths u {:.2}/{:.2}, s {:.2}/{:.2}",
            unstable[0].arclength, unstable[1].arclength, stable[0].arclength, stable[1].arclength
        ),
    );
    assert!(ok);
}

/// Regular orbits of the driven flow shear, so their finite-time exponent
/// decays only like `log(t)/t`; 1600 periods bring it well below the
/// threshold while chaotic seeds sit near 0.3 per period.
#[test]
fn c4_chaos_transition() {
    let mut seeds = Vec::new();
    for i in 0..6 {
        for j in 0..6 {
            seeds.push(PlanePoint::new(-1.2 + 0.48 * i as f64, -1.2 + 0.48 * j as f64));
        }
    }
    let states = [state(0.0), state(0.17651)];
    let rv = vortex_position(&states[1], 0.0).unwrap();
    seeds.retain(|p| p.distance(rv) > 0.05 && p.distance(PlanePoint::default()) > 0.05);
    let params = ScanParams { lyapunov_periods: C4_PERIODS, section_periods: 20, threshold: DEFAULT_CHAOS_THRESHOLD };
    let out = scan_transition(&states, &seeds, &params, &IntegratorSettings::default()).unwrap();
    let (regular, chaotic) = (&out[0], &out[1]);
    let ok = regular.chaotic_fraction == 0.0 && chaotic.chaotic_fraction > 0.1;
    report(
        4,
        "chaos transition",
        ok,
        format!(
            "threshold {DEFAULT_CHAOS_THRESHOLD}/period over {C4_PERIODS} periods, {} seeds: fraction {:.3} at a/b = 0, {:.3} at a/b = 0.17651",
            seeds.len(),
            regular.chaotic_fraction,
            chaotic.chaotic_fraction
        ),
    );
    assert!(ok);
}

#[test]
fn c5_circulation() {
    let bohm = BohmField::new(state(0.17651));
    let path = PeriodicVortexPath::ellipse_from_state(&state(0.0553)).unwrap();
    let pv = PointVortexField::new(path);
    let fields: [(&str, &dyn VelocityField); 2] = [("oscillator", &bohm), ("point vortex", &pv)];
    let mut worst = 0.0_f64;
    let mut spread = 0.0_f64;
    for (_, f) in fields {
        for t in [0.0, 0.7, 2.9] {
            let c = f.vortex_position(t).unwrap();
            let contours = [
                ClosedContour::circle(c, 0.1, 256).unwrap(),
                ClosedContour::circle(PlanePoint::new(c.x + 0.05, c.y - 0.03), 0.3, 256).unwrap(),
                ClosedContour::ellipse(PlanePoint::new(c.x - 0.02, c.y), 0.4, 0.15, 0.6, 256).unwrap(),
            ];
            let g: Vec<f64> = contours.iter().map(|k| circulation(f, k, t).unwrap()).collect();
            for v in &g {
                worst = worst.max((v - TAU).abs());
                spread = spread.max((v - g[0]).abs());
            }
        }
    }
    let ok = worst < 1e-4 && spread < 1e-4;
    report(5, "circulation", ok, format!("max |Γ - 2π| {worst:.2e}, max shape spread {spread:.2e}"));
    assert!(ok);
}

/// The point-vortex flow is incompressible, so its period map preserves area.
/// The Bohmian flow is not (`∇·v ≠ 0`); it transports `|ψ|²`, which is
/// `T₀`-periodic, so its period map preserves the measure `|ψ|² dA`:
/// `det J(p) · ρ(R(p)) / ρ(p) = 1`.
#[test]
fn c6_area_preservation() {
    let s = state(0.17651);
    let bohm = BohmField::new(s);
    let pv = PointVortexField::new(PeriodicVortexPath::ellipse_from_state(&state(0.0553)).unwrap());
    let rho = |p: PlanePoint| evaluate_psi(&s, p.x, p.y, 0.0).norm_sqr();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sample = || polar(rng.gen_range(0.4..1.0), rng.gen_range(0.0..TAU));
    let (mut pv_worst, mut bohm_worst, mut bohm_raw) = (0.0_f64, 0.0_f64, 0.0_f64);
    let pv_map = PeriodMap::new(&pv, IntegratorSettings::for_jacobian());
    let bohm_map = PeriodMap::new(&bohm, IntegratorSettings::for_jacobian());
    for _ in 0..20 {
        let p = sample();
        let det = map_jacobian(&pv_map, p, DEFAULT_FD_STEP).unwrap().determinant();
        pv_worst = pv_worst.max((det - 1.0).abs());
        let p = sample();
        let det = map_jacobian(&bohm_map, p, DEFAULT_FD_STEP).unwrap().determinant();
        let image = bohm_map.apply(p).unwrap();
        bohm_worst = bohm_worst.max((det * rho(image) / rho(p) - 1.0).abs());
        bohm_raw = bohm_raw.max((det - 1.0).abs());
    }
    let ok = pv_worst < 1e-5 && bohm_worst < 1e-5;
    report(
        6,
        "area preservation",
        ok,
        format!(
            "20 points each: point vortex max |det J - 1| {pv_worst:.2e}; oscillator max |det J ρ(R)/ρ - 1| {bohm_worst:.2e} (plain |det J - 1| up to {bohm_raw:.2e})"
        ),
    );
    assert!(ok);
}

#[test]
fn c7_twist_law() {
    let path = PeriodicVortexPath::stationary(PlanePoint::default(), TAU).unwrap();
    let field = PointVortexField::new(path.clone());
    let settings = IntegratorSettings::default();
    let r0 = 0.5;
    let start = PlanePoint::new(r0, 0.0);
    let end = flow(&field, start, 0.0, 100.0 * TAU, &settings).unwrap();
    let drift = (end.distance(PlanePoint::default()) - r0).abs();
    let mut rot_err = 0.0_f64;
    for r in [0.3, 0.5, 0.8] {
        let q = flow(&field, PlanePoint::new(r, 0.0), 0.0, TAU, &settings).unwrap();
        let expected = TAU / (r * r);
        let d = (q.y.atan2(q.x) - expected).rem_euclid(TAU);
        rot_err = rot_err.max(d.min(TAU - d));
    }
    let slope = verify_property_a(&path, &[0.1, 0.2, 0.3, 0.4, 0.5], &settings).unwrap().slope;
    let ok = drift < 1e-8 && rot_err < 1e-6 && (slope + 3.0).abs() < 0.2;
    report(
        7,
        "twist law",
        ok,
        format!("radius drift {drift:.2e}, rotation error {rot_err:.2e}, twist slope {slope:.4}"),
    );
    assert!(ok);
}

#[test]
fn c8_property_b() {
    let path = PeriodicVortexPath::ellipse_from_state(&state(0.0553)).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [0.2, 0.4] {
        let rep = verify_property_b(&path, r, &IntegratorSettings::default()).unwrap();
        let angle = rep.min_angle.unwrap_or(0.0);
        ok &= !rep.degenerate && rep.crossings >= 2 && rep.crossings % 2 == 0 && angle > 0.0;
        detail.push(format!("r = {r}: {} crossings, min angle {angle:.3e}", rep.crossings));
    }
    report(8, "transversal circle image", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn c9_physics_cross_checks() {
    let s = state(0.17651);
    let n = 512;
    let node = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let v = vortex_position(&s, t).unwrap();
            evaluate_psi(&s, v.x, v.y, t).norm()
        })
        .fold(0.0_f64, f64::max);

    let mut lin = 0.0_f64;
    for k in 0..16 {
        let t = 0.4 * k as f64;
        let rv = vortex_position(&s, t).unwrap();
        let w = evaluate_grad_psi(&s, rv.x, rv.y, t);
        let th = 0.9 * k as f64;
        let (x, y) = (rv.x + 1e-3 * th.cos(), rv.y + 1e-3 * th.sin());
        let full = bohm_velocity(&s, x, y, t).unwrap();
        let approx = near_vortex_velocity(w, rv, x, y).unwrap();
        lin = lin.max((full - approx).norm() / approx.norm());
    }

    let rho = |x: f64, y: f64, t: f64| evaluate_psi(&s, x, y, t).norm_sqr();
    let flux = |x: f64, y: f64, t: f64| -> PlaneVector { rho(x, y, t) * bohm_velocity(&s, x, y, t).unwrap() };
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cont = 0.0_f64;
    for _ in 0..50 {
        let (x, y, t) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(0.0..TAU));
        if vortex_position(&s, t).unwrap().distance(PlanePoint::new(x, y)) < 0.1 {
            continue;
        }
        let dt = (rho(x, y, t + h) - rho(x, y, t - h)) / (2.0 * h);
        let div = (flux(x + h, y, t).vx - flux(x - h, y, t).vx + flux(x, y + h, t).vy - flux(x, y - h, t).vy) / (2.0 * h);
        cont = cont.max((dt + div).abs());
    }
    let ok = node < 1e-10 && lin < 1e-2 && cont < 1e-4;
    report(
        9,
        "physics cross-checks",
        ok,
        format!("max |ψ| on path {node:.2e}, near-vortex rel. error {lin:.2e}, continuity residual {cont:.2e}"),
    );
    assert!(ok);
}
