//! C interface to `bohm-vortex`.
//!
//! Fields are opaque `BvField` handles created by one of the `bv_field_*_new`
//! constructors and released with `bv_field_free`. Every other function
//! returns a [`BvStatus`]; on failure `bv_last_error_message` describes the
//! most recent error on the calling thread. Output pointers are written only
//! on `BV_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bohm_vortex::chaos::{find_fixed_point_with, lyapunov_exponent, FixedPointKind, LyapunovStatus, NewtonOptions};
use bohm_vortex::integrate::{IntegratorSettings, PeriodMap, PlaneMap, DEFAULT_FD_STEP};
use bohm_vortex::pointvortex::{PeriodicVortexPath, PointVortexField};
use bohm_vortex::velocity::BohmField;
use bohm_vortex::wavefunction::SuperpositionState;
use bohm_vortex::{Error, PlanePoint, VelocityField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateState = 3,
    VortexProximity = 4,
    VortexCapture = 5,
    StepLimit = 6,
    StepUnderflow = 7,
    NoConvergence = 8,
    SingularJacobian = 9,
    /// The call panicked; the handle should be treated as unusable.
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvFixedPointKind {
    Saddle = 0,
    Elliptic = 1,
    Parabolic = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BvFixedPoint {
    pub x: f64,
    pub y: f64,
    /// Row-major Jacobian of the period map at the fixed point.
    pub jacobian: [f64; 4],
    pub trace: f64,
    pub det: f64,
    pub kind: i32,
    pub residual: f64,
    pub iterations: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BvLyapunov {
    pub per_unit_time: f64,
    pub per_period: f64,
    pub time_covered: f64,
    /// 0 when the trajectory stopped early and the estimate is partial.
    pub complete: i32,
}

/// Opaque field handle.
pub struct BvField {
    field: Box<dyn VelocityField>,
    settings: IntegratorSettings,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BvStatus {
    match e {
        Error::VortexProximity { .. } => BvStatus::VortexProximity,
        Error::DegenerateState(_) => BvStatus::DegenerateState,
        Error::InvalidArgument(_) => BvStatus::InvalidArgument,
        Error::VortexCapture { .. } => BvStatus::VortexCapture,
        Error::StepLimit { .. } => BvStatus::StepLimit,
        Error::StepUnderflow { .. } => BvStatus::StepUnderflow,
        Error::NoConvergence { .. } => BvStatus::NoConvergence,
        Error::SingularJacobian { .. } => BvStatus::SingularJacobian,
    }
}

/// Runs `f` with panics and library errors turned into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BvStatus, String)>) -> BvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            BvStatus::Internal
        }
    }
}

fn lib(e: Error) -> (BvStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BvStatus, String) {
    (BvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn field_ref<'a>(h: *const BvField) -> Result<&'a BvField, (BvStatus, String)> {
    h.as_ref().ok_or_else(|| null("field"))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (BvStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn new_field(out: *mut *mut BvField, field: Result<Box<dyn VelocityField>, Error>) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let field = field.map_err(lib)?;
        out.write(Box::into_raw(Box::new(BvField { field, settings: IntegratorSettings::default() })));
        Ok(())
    })
}

/// Oscillator superposition with amplitude ratios `a/b`, `c/b` and phases.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bv_field_oscillator_new(
    a_over_b: f64,
    c_over_b: f64,
    gamma1: f64,
    gamma2: f64,
    out: *mut *mut BvField,
) -> BvStatus {
    let field = SuperpositionState::from_ratios(a_over_b, c_over_b, gamma1, gamma2)
        .map(|s| Box::new(BohmField::new(s)) as Box<dyn VelocityField>);
    new_field(out, field)
}

/// Point vortex moving on `x = ax sin(γ₂ + 2πt/T)`, `y = ay sin(γ₁ + 2πt/T)`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bv_field_point_vortex_ellipse_new(
    amplitude_x: f64,
    amplitude_y: f64,
    gamma1: f64,
    gamma2: f64,
    period: f64,
    out: *mut *mut BvField,
) -> BvStatus {
    let field = PeriodicVortexPath::ellipse(amplitude_x, amplitude_y, gamma1, gamma2, period)
        .map(|p| Box::new(PointVortexField::new(p)) as Box<dyn VelocityField>);
    new_field(out, field)
}

/// Point vortex at rest at `(cx, cy)`; `period` sets the map period.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bv_field_stationary_vortex_new(cx: f64, cy: f64, period: f64, out: *mut *mut BvField) -> BvStatus {
    let field = PeriodicVortexPath::stationary(PlanePoint::new(cx, cy), period)
        .map(|p| Box::new(PointVortexField::new(p)) as Box<dyn VelocityField>);
    new_field(out, field)
}

/// # Safety
/// `field` must be null or a handle from a `bv_field_*_new` call that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn bv_field_free(field: *mut BvField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Sets the relative tolerance of the trajectory integrator (absolute
/// tolerance follows at 1% of it).
///
/// # Safety
/// `field` must be null or a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn bv_field_set_tolerance(field: *mut BvField, rel_tol: f64) -> BvStatus {
    guard(|| {
        let h = field.as_mut().ok_or_else(|| null("field"))?;
        let s = h.settings.with_tolerance(rel_tol);
        s.validate().map_err(lib)?;
        h.settings = s;
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle; `out` valid for one double.
#[no_mangle]
pub unsafe extern "C" fn bv_field_period(field: *const BvField, out: *mut f64) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        write_out(out, h.field.period(), "out")
    })
}

/// # Safety
/// `field` must be a live handle; outputs valid for one double each.
#[no_mangle]
pub unsafe extern "C" fn bv_velocity(field: *const BvField, x: f64, y: f64, t: f64, vx: *mut f64, vy: *mut f64) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        if vx.is_null() || vy.is_null() {
            return Err(null("output"));
        }
        let v = h.field.velocity(PlanePoint::new(x, y), t).map_err(lib)?;
        vx.write(v.vx);
        vy.write(v.vy);
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle; outputs valid for one double each.
#[no_mangle]
pub unsafe extern "C" fn bv_vortex_position(field: *const BvField, t: f64, x: *mut f64, y: *mut f64) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        if x.is_null() || y.is_null() {
            return Err(null("output"));
        }
        let p = h
            .field
            .vortex_position(t)
            .ok_or_else(|| (BvStatus::DegenerateState, "field has no single vortex at this time".to_string()))?;
        x.write(p.x);
        y.write(p.y);
        Ok(())
    })
}

/// Image of `(x, y)` under `iterates` applications of the period map.
///
/// # Safety
/// `field` must be a live handle; outputs valid for one double each.
#[no_mangle]
pub unsafe extern "C" fn bv_period_map(
    field: *const BvField,
    x: f64,
    y: f64,
    iterates: u32,
    out_x: *mut f64,
    out_y: *mut f64,
) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        if out_x.is_null() || out_y.is_null() {
            return Err(null("output"));
        }
        let map = PeriodMap::new(h.field.as_ref(), h.settings).iterated(iterates);
        let p = map.apply(PlanePoint::new(x, y)).map_err(lib)?;
        out_x.write(p.x);
        out_y.write(p.y);
        Ok(())
    })
}

/// Newton search for a fixed point of the period map from `(gx, gy)`.
/// Integration runs at least as tight as 1e-12 relative tolerance.
///
/// # Safety
/// `field` must be a live handle; `out` valid for one `BvFixedPoint`.
#[no_mangle]
pub unsafe extern "C" fn bv_fixed_point(
    field: *const BvField,
    gx: f64,
    gy: f64,
    tol: f64,
    max_iter: u32,
    out: *mut BvFixedPoint,
) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tight = IntegratorSettings::for_jacobian();
        let settings = IntegratorSettings {
            rel_tol: h.settings.rel_tol.min(tight.rel_tol),
            abs_tol: h.settings.abs_tol.min(tight.abs_tol),
            ..h.settings
        };
        let map = PeriodMap::new(h.field.as_ref(), settings);
        let opts = NewtonOptions { tol, max_iter: max_iter as usize, fd_step: DEFAULT_FD_STEP };
        let r = find_fixed_point_with(&map, PlanePoint::new(gx, gy), &opts).map_err(lib)?;
        let j = r.jacobian;
        out.write(BvFixedPoint {
            x: r.location.x,
            y: r.location.y,
            jacobian: [j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]],
            trace: j.trace(),
            det: j.determinant(),
            kind: match r.classification {
                FixedPointKind::Saddle => BvFixedPointKind::Saddle,
                FixedPointKind::Elliptic => BvFixedPointKind::Elliptic,
                FixedPointKind::Parabolic => BvFixedPointKind::Parabolic,
            } as i32,
            residual: r.residual,
            iterations: r.iterations as u32,
        });
        Ok(())
    })
}

/// Largest Lyapunov exponent from `(x, y)` over `periods` map periods,
/// renormalizing every `renorm_periods` periods. A trajectory that stops
/// early still returns `BV_STATUS_OK` with `complete = 0`.
///
/// # Safety
/// `field` must be a live handle; `out` valid for one `BvLyapunov`.
#[no_mangle]
pub unsafe extern "C" fn bv_lyapunov(
    field: *const BvField,
    x: f64,
    y: f64,
    periods: f64,
    renorm_periods: f64,
    out: *mut BvLyapunov,
) -> BvStatus {
    guard(|| {
        let h = field_ref(field)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let t0 = h.field.period();
        let r = lyapunov_exponent(h.field.as_ref(), PlanePoint::new(x, y), periods * t0, renorm_periods * t0, &h.settings)
            .map_err(lib)?;
        out.write(BvLyapunov {
            per_unit_time: r.per_unit_time,
            per_period: r.per_period,
            time_covered: r.time_covered,
            complete: i32::from(r.status == LyapunovStatus::Complete),
        });
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code, e.g. `"VORTEX_CAPTURE"`.
#[no_mangle]
pub extern "C" fn bv_status_name(status: BvStatus) -> *const c_char {
    let s: &'static CStr = match status {
        BvStatus::Ok => c"OK",
        BvStatus::NullPointer => c"NULL_POINTER",
        BvStatus::InvalidArgument => c"INVALID_ARGUMENT",
        BvStatus::DegenerateState => c"DEGENERATE_STATE",
        BvStatus::VortexProximity => c"VORTEX_PROXIMITY",
        BvStatus::VortexCapture => c"VORTEX_CAPTURE",
        BvStatus::StepLimit => c"STEP_LIMIT",
        BvStatus::StepUnderflow => c"STEP_UNDERFLOW",
        BvStatus::NoConvergence => c"NO_CONVERGENCE",
        BvStatus::SingularJacobian => c"SINGULAR_JACOBIAN",
        BvStatus::Internal => c"INTERNAL",
    };
    s.as_ptr()
}
