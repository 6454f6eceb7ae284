#ifndef FRANKA_IK_H
#define FRANKA_IK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Locked redundancy parameter, passed as an integer to `fik_solve`.
 */
typedef enum FikLock {
  FIK_LOCK_Q7 = 0,
  FIK_LOCK_Q6 = 1,
  FIK_LOCK_Q4 = 2,
  FIK_LOCK_SWIVEL = 3,
} FikLock;

typedef enum FikSingularity {
  FIK_SINGULARITY_NONE = 0,
  FIK_SINGULARITY_TYPE1 = 1,
  FIK_SINGULARITY_TYPE2 = 2,
} FikSingularity;

/*
 Result of a C API call.
 */
typedef enum FikStatus {
  FIK_STATUS_OK = 0,
  FIK_STATUS_NULL_POINTER = 1,
  /*
   Non-finite values, a non-orthonormal rotation or out-of-range options.
   */
  FIK_STATUS_INVALID_INPUT = 2,
  /*
   The swivel angle is undefined for this pose.
   */
  FIK_STATUS_SWIVEL_UNDEFINED = 3,
  FIK_STATUS_INDEX_OUT_OF_RANGE = 4,
  FIK_STATUS_INVALID_GEOMETRY = 5,
  /*
   Internal consistency check failed.
   */
  FIK_STATUS_INTERNAL = 6,
  FIK_STATUS_PANIC = 7,
} FikStatus;

/*
 Robot geometry.
 */
typedef struct FikGeometry FikGeometry;

/*
 Solutions of one query.
 */
typedef struct FikSolutionSet FikSolutionSet;

/*
 Emergency values used at singular poses.
 */
typedef struct FikOptions {
  /*
   q1 used at a type-1 singular shoulder when `use_emergency_q1` is set;
   otherwise q1 and q3 are reported as NaN there.
   */
  double emergency_q1;
  bool use_emergency_q1;
  /*
   q7 used when a q6 or q4 query hits a type-2 singularity.
   */
  double emergency_q7;
} FikOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failed call on this thread, or null. The
 pointer stays valid until the next call into this library on the same
 thread.
 */
const char *fik_last_error(void);

/*
 Default options: emergency q1 = pi/2, emergency q7 = 0.
 */
struct FikOptions fik_options_default(void);

/*
 Built-in Franka geometry. Never null.
 */
struct FikGeometry *fik_geometry_default(void);

/*
 Parses a geometry JSON document (keys d1, d3, d5, a4, a5, a7, dE, limits).

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FikStatus fik_geometry_from_json(const char *json, struct FikGeometry **out);

/*
 # Safety
 `geometry` must be null or a handle not yet freed.
 */
void fik_geometry_free(struct FikGeometry *geometry);

/*
 Solves a pose with the joint (or swivel angle) selected by `lock` fixed to
 `value`. An unreachable pose succeeds with an empty set.

 `geometry` and `options` may be null for the defaults. `rotation` holds 9
 doubles, `position` 3. `lock` is a `FikLock` value. On success `*out`
 receives a set to release with `fik_solution_set_free`.

 # Safety
 All non-null pointers must reference valid memory of the documented size.
 */
enum FikStatus fik_solve(const struct FikGeometry *geometry,
                         const double *rotation,
                         const double *position,
                         uint32_t lock,
                         double value,
                         const struct FikOptions *options,
                         struct FikSolutionSet **out);

/*
 Forward kinematics. Writes the end-effector rotation (9) and position (3);
 if `axes` is non-null it receives 42 doubles, direction then point for
 each of the seven joint axes.

 # Safety
 All non-null pointers must reference valid memory of the documented size.
 */
enum FikStatus fik_fk(const struct FikGeometry *geometry,
                      const double *q,
                      double *rotation,
                      double *position,
                      double *axes);

/*
 Number of solutions; 0 for a null set.

 # Safety
 `set` must be null or a live handle.
 */
size_t fik_solution_set_len(const struct FikSolutionSet *set);

/*
 Joint angles of solution `index` (7 doubles, NaN where undefined).

 # Safety
 `set` must be a live handle and `q` must hold 7 doubles.
 */
enum FikStatus fik_solution_set_joints(const struct FikSolutionSet *set, size_t index, double *q);

/*
 Bit `i` is set when joint `i + 1` of solution `index` is within its limits.

 # Safety
 `set` must be a live handle and `mask` writable.
 */
enum FikStatus fik_solution_set_limit_mask(const struct FikSolutionSet *set,
                                           size_t index,
                                           uint8_t *mask);

/*
 6x7 Jacobian of solution `index`, row-major, linear rows first, about the
 end-effector point in the base frame.

 # Safety
 `set` must be a live handle and `jacobian` must hold 42 doubles.
 */
enum FikStatus fik_solution_set_jacobian(const struct FikSolutionSet *set,
                                         size_t index,
                                         double *jacobian);

/*
 Singularity class of the query; `None` for a null set.

 # Safety
 `set` must be null or a live handle.
 */
enum FikSingularity fik_solution_set_singularity(const struct FikSolutionSet *set);

/*
 False when a type-2 pose forced the solver to ignore the locked value.

 # Safety
 `set` must be null or a live handle.
 */
bool fik_solution_set_param_honored(const struct FikSolutionSet *set);

/*
 # Safety
 `set` must be null or a handle not yet freed.
 */
void fik_solution_set_free(struct FikSolutionSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRANKA_IK_H */
