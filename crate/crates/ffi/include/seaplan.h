#ifndef SEAPLAN_H
#define SEAPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SeaplanStatus {
  SEAPLAN_STATUS_OK = 0,
  SEAPLAN_STATUS_NULL_POINTER = 1,
  SEAPLAN_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The constraint set admits no velocity; a stop command was returned.
   */
  SEAPLAN_STATUS_INFEASIBLE = 3,
  /**
   * The ego already overlaps an inflated obstacle.
   */
  SEAPLAN_STATUS_CONFLICT = 4,
  SEAPLAN_STATUS_UNCOVERABLE = 5,
  /**
   * The solver stopped early; the best cover found is still returned.
   */
  SEAPLAN_STATUS_TIME_LIMIT = 6,
  SEAPLAN_STATUS_PARSE_ERROR = 7,
  SEAPLAN_STATUS_PANIC = 8,
} SeaplanStatus;

/**
 * Opaque circle cover.
 */
typedef struct SeaplanCover SeaplanCover;

/**
 * Opaque planner state.
 */
typedef struct SeaplanPlanner SeaplanPlanner;

/**
 * North/East vector.
 */
typedef struct SeaplanVec2 {
  double n;
  double e;
} SeaplanVec2;

/**
 * `{v : normal · (v − anchor) >= 0}`.
 */
typedef struct SeaplanHalfPlane {
  struct SeaplanVec2 normal;
  struct SeaplanVec2 anchor;
} SeaplanHalfPlane;

typedef struct SeaplanDisc {
  struct SeaplanVec2 center;
  double radius;
} SeaplanDisc;

/**
 * Vessel kinematics. Heading in degrees clockwise from North.
 */
typedef struct SeaplanVessel {
  struct SeaplanVec2 position;
  double heading_deg;
  double speed_mps;
  double radius_m;
} SeaplanVessel;

/**
 * A tracked target. `id` keys the encounter role kept between steps.
 */
typedef struct SeaplanTarget {
  uint64_t id;
  struct SeaplanVessel vessel;
} SeaplanTarget;

typedef struct SeaplanStepResult {
  struct SeaplanVec2 v_ref;
  struct SeaplanVec2 v_star;
  /**
   * Command after the acceleration limit.
   */
  struct SeaplanVec2 v_next;
  bool feasible;
  /**
   * Target and grounding constraints in force this step.
   */
  size_t n_active_constraints;
  /**
   * Wall-clock time of the projection (s).
   */
  double solve_time_s;
} SeaplanStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *seaplan_last_error(void);

/**
 * Library version, static storage.
 */
const char *seaplan_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void seaplan_string_free(char *s);

/**
 * Time and distance at closest approach of B relative to A.
 *
 * # Safety
 * Output pointers must be valid for writes.
 */
enum SeaplanStatus seaplan_tcpa_dcpa(struct SeaplanVec2 p_a,
                                     struct SeaplanVec2 v_a,
                                     struct SeaplanVec2 p_b,
                                     struct SeaplanVec2 v_b,
                                     double *out_tcpa_s,
                                     double *out_dcpa_m);

/**
 * Inscribed `n`-gon of the speed circle. Writes up to `cap` half-planes and
 * stores `n` in `out_len`; pass `cap = 0` to query the size.
 *
 * # Safety
 * `out` must be valid for `cap` writes; `out_len` for one.
 */
enum SeaplanStatus seaplan_speed_polygon(double v_max,
                                         size_t n,
                                         struct SeaplanHalfPlane *out,
                                         size_t cap,
                                         size_t *out_len);

/**
 * Closest point to `v_ref` inside every half-plane. Infeasible sets give
 * `SEAPLAN_STATUS_INFEASIBLE` and a zero vector.
 *
 * # Safety
 * `planes` must hold `n` elements; `out` must be valid for writes.
 */
enum SeaplanStatus seaplan_solve_projection(const struct SeaplanHalfPlane *planes,
                                            size_t n,
                                            struct SeaplanVec2 v_ref,
                                            struct SeaplanVec2 *out);

/**
 * Creates a planner. `config_json` may be null for defaults, or an object
 * with optional `planner`, `risk`, `uncertainty` and `colregs` members using
 * the scenario file layout. Returns null on error.
 *
 * # Safety
 * `config_json` must be null or a NUL-terminated string.
 */
struct SeaplanPlanner *seaplan_planner_new(const char *config_json);

/**
 * # Safety
 * `p` must be null or a live planner handle.
 */
void seaplan_planner_free(struct SeaplanPlanner *p);

/**
 * # Safety
 * `p` must be a live planner handle.
 */
enum SeaplanStatus seaplan_planner_set_goal(struct SeaplanPlanner *p, struct SeaplanVec2 goal);

/**
 * Replaces the shallow-water discs.
 *
 * # Safety
 * `p` must be a live planner handle and `discs` hold `n` elements.
 */
enum SeaplanStatus seaplan_planner_set_grounding(struct SeaplanPlanner *p,
                                                 const struct SeaplanDisc *discs,
                                                 size_t n);

/**
 * One planning step. Encounter roles are held per target id from the step a
 * target becomes a threat until it stops being one.
 *
 * Returns `SEAPLAN_STATUS_CONFLICT` when the ego overlaps an inflated
 * obstacle and `SEAPLAN_STATUS_INFEASIBLE` when no safe velocity exists; in
 * both cases `out` holds the braking command.
 *
 * # Safety
 * `p` must be a live planner handle, `ego` and `out` valid, `targets` hold
 * `n_targets` elements.
 */
enum SeaplanStatus seaplan_planner_step(struct SeaplanPlanner *p,
                                        const struct SeaplanVessel *ego,
                                        const struct SeaplanTarget *targets,
                                        size_t n_targets,
                                        struct SeaplanStepResult *out);

/**
 * Covers a polygon with circles. `config_json` may be null for defaults.
 * On `SEAPLAN_STATUS_OK` or `SEAPLAN_STATUS_TIME_LIMIT`, `*out` receives a
 * cover handle; otherwise it is set to null.
 *
 * # Safety
 * `vertices` must hold `n` elements; `out` must be valid for writes.
 */
enum SeaplanStatus seaplan_convexify(const struct SeaplanVec2 *vertices,
                                     size_t n,
                                     const char *config_json,
                                     double time_limit_s,
                                     struct SeaplanCover **out);

/**
 * # Safety
 * `c` must be null or a live cover handle.
 */
void seaplan_cover_free(struct SeaplanCover *c);

/**
 * Number of circles; 0 for null.
 *
 * # Safety
 * `c` must be null or a live cover handle.
 */
size_t seaplan_cover_len(const struct SeaplanCover *c);

/**
 * # Safety
 * `c` must be a live cover handle and `out` valid for writes.
 */
enum SeaplanStatus seaplan_cover_circle(const struct SeaplanCover *c,
                                        size_t i,
                                        struct SeaplanDisc *out);

/**
 * Share of covered area lying outside the polygon; NaN for null.
 *
 * # Safety
 * `c` must be null or a live cover handle.
 */
double seaplan_cover_spill_ratio(const struct SeaplanCover *c);

/**
 * # Safety
 * `c` must be null or a live cover handle.
 */
bool seaplan_cover_proven_optimal(const struct SeaplanCover *c);

/**
 * Cover as JSON, without timing. Free with [`seaplan_string_free`].
 *
 * # Safety
 * `c` must be null or a live cover handle.
 */
char *seaplan_cover_to_json(const struct SeaplanCover *c);

/**
 * Runs a scenario given as JSON and stores its metrics (without timing) as a
 * JSON string in `*out_metrics_json`. Relative `cover_file` paths resolve
 * against the working directory.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated string and `out_metrics_json`
 * valid for writes. Free the result with [`seaplan_string_free`].
 */
enum SeaplanStatus seaplan_simulate_json(const char *scenario_json, char **out_metrics_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEAPLAN_H */
