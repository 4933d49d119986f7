#ifndef BOHM_VORTEX_H
#define BOHM_VORTEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BvFixedPointKind {
  BV_FIXED_POINT_KIND_SADDLE = 0,
  BV_FIXED_POINT_KIND_ELLIPTIC = 1,
  BV_FIXED_POINT_KIND_PARABOLIC = 2,
} BvFixedPointKind;

typedef enum BvStatus {
  BV_STATUS_OK = 0,
  BV_STATUS_NULL_POINTER = 1,
  BV_STATUS_INVALID_ARGUMENT = 2,
  BV_STATUS_DEGENERATE_STATE = 3,
  BV_STATUS_VORTEX_PROXIMITY = 4,
  BV_STATUS_VORTEX_CAPTURE = 5,
  BV_STATUS_STEP_LIMIT = 6,
  BV_STATUS_STEP_UNDERFLOW = 7,
  BV_STATUS_NO_CONVERGENCE = 8,
  BV_STATUS_SINGULAR_JACOBIAN = 9,
  /*
   The call panicked; the handle should be treated as unusable.
   */
  BV_STATUS_INTERNAL = 10,
} BvStatus;

/*
 Opaque field handle.
 */
typedef struct BvField BvField;

typedef struct BvFixedPoint {
  double x;
  double y;
  /*
   Row-major Jacobian of the period map at the fixed point.
   */
  double jacobian[4];
  double trace;
  double det;
  int32_t kind;
  double residual;
  uint32_t iterations;
} BvFixedPoint;

typedef struct BvLyapunov {
  double per_unit_time;
  double per_period;
  double time_covered;
  /*
   0 when the trajectory stopped early and the estimate is partial.
   */
  int32_t complete;
} BvLyapunov;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Oscillator superposition with amplitude ratios `a/b`, `c/b` and phases.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
enum BvStatus bv_field_oscillator_new(double a_over_b,
                                      double c_over_b,
                                      double gamma1,
                                      double gamma2,
                                      struct BvField **out);

/*
 Point vortex moving on `x = ax sin(γ₂ + 2πt/T)`, `y = ay sin(γ₁ + 2πt/T)`.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
enum BvStatus bv_field_point_vortex_ellipse_new(double amplitude_x,
                                                double amplitude_y,
                                                double gamma1,
                                                double gamma2,
                                                double period,
                                                struct BvField **out);

/*
 Point vortex at rest at `(cx, cy)`; `period` sets the map period.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
enum BvStatus bv_field_stationary_vortex_new(double cx,
                                             double cy,
                                             double period,
                                             struct BvField **out);

/*
 # Safety
 `field` must be null or a handle from a `bv_field_*_new` call that has
 not been freed.
 */
void bv_field_free(struct BvField *field);

/*
 Sets the relative tolerance of the trajectory integrator (absolute
 tolerance follows at 1% of it).

 # Safety
 `field` must be null or a live handle not used concurrently.
 */
enum BvStatus bv_field_set_tolerance(struct BvField *field, double rel_tol);

/*
 # Safety
 `field` must be a live handle; `out` valid for one double.
 */
enum BvStatus bv_field_period(const struct BvField *field, double *out);

/*
 # Safety
 `field` must be a live handle; outputs valid for one double each.
 */
enum BvStatus bv_velocity(const struct BvField *field,
                          double x,
                          double y,
                          double t,
                          double *vx,
                          double *vy);

/*
 # Safety
 `field` must be a live handle; outputs valid for one double each.
 */
enum BvStatus bv_vortex_position(const struct BvField *field, double t, double *x, double *y);

/*
 Image of `(x, y)` under `iterates` applications of the period map.

 # Safety
 `field` must be a live handle; outputs valid for one double each.
 */
enum BvStatus bv_period_map(const struct BvField *field,
                            double x,
                            double y,
                            uint32_t iterates,
                            double *out_x,
                            double *out_y);

/*
 Newton search for a fixed point of the period map from `(gx, gy)`.
 Integration runs at least as tight as 1e-12 relative tolerance.

 # Safety
 `field` must be a live handle; `out` valid for one `BvFixedPoint`.
 */
enum BvStatus bv_fixed_point(const struct BvField *field,
                             double gx,
                             double gy,
                             double tol,
                             uint32_t max_iter,
                             struct BvFixedPoint *out);

/*
 Largest Lyapunov exponent from `(x, y)` over `periods` map periods,
 renormalizing every `renorm_periods` periods. A trajectory that stops
 early still returns `BV_STATUS_OK` with `complete = 0`.

 # Safety
 `field` must be a live handle; `out` valid for one `BvLyapunov`.
 */
enum BvStatus bv_lyapunov(const struct BvField *field,
                          double x,
                          double y,
                          double periods,
                          double renorm_periods,
                          struct BvLyapunov *out);

/*
 Message of the last failed call on this thread; empty if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *bv_last_error_message(void);

/*
 Static name of a status code, e.g. `"VORTEX_CAPTURE"`.
 */
const char *bv_status_name(enum BvStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOHM_VORTEX_H */
