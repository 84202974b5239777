#ifndef SUBSTRUCT_H
#define SUBSTRUCT_H

/* Generated by cbindgen from substruct-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum substruct_status {
  /**
   * Success.
   */
  SUBSTRUCT_OK = 0,
  /**
   * A pointer was null or an argument out of range.
   */
  SUBSTRUCT_INVALID_ARGUMENT = 1,
  /**
   * A file could not be read or parsed.
   */
  SUBSTRUCT_IO_ERROR = 2,
  /**
   * A local problem or the coarse problem is singular.
   */
  SUBSTRUCT_SINGULAR = 3,
  /**
   * The iteration budget was exhausted before convergence.
   */
  SUBSTRUCT_NOT_CONVERGED = 4,
  /**
   * An unexpected internal failure; see substruct_last_error.
   */
  SUBSTRUCT_INTERNAL = 5,
} substruct_status;

/**
 * Corner selection strategy.
 */
typedef enum substruct_algorithm {
  SUBSTRUCT_ALGORITHM_FULL = 0,
  SUBSTRUCT_ALGORITHM_MINIMAL = 1,
  SUBSTRUCT_ALGORITHM_EDGE = 2,
} substruct_algorithm;

/**
 * Face selection rule: three corners per face component, two, or pick
 * from the mesh dimension.
 */
typedef enum substruct_dim_mode {
  SUBSTRUCT_DIM_MODE_AUTO = 0,
  SUBSTRUCT_DIM_MODE_3D = 1,
  SUBSTRUCT_DIM_MODE_2D = 2,
} substruct_dim_mode;

/**
 * Governing equation.
 */
typedef enum substruct_pde {
  SUBSTRUCT_PDE_LAPLACE = 0,
  SUBSTRUCT_PDE_ELASTICITY = 1,
} substruct_pde;

/**
 * Coarse constraint modes: corners, optionally with edge and face averages.
 */
typedef enum substruct_constraints {
  SUBSTRUCT_CONSTRAINTS_C = 0,
  SUBSTRUCT_CONSTRAINTS_CE = 1,
  SUBSTRUCT_CONSTRAINTS_CF = 2,
  SUBSTRUCT_CONSTRAINTS_CEF = 3,
} substruct_constraints;

/**
 * Opaque corner set handle.
 */
typedef struct substruct_corners substruct_corners;

/**
 * Opaque mesh-plus-partition handle.
 */
typedef struct substruct_problem substruct_problem;

/**
 * Solve outcome in plain C types.
 */
typedef struct substruct_solve_report {
  uint64_t iterations;
  bool converged;
  double kappa_est;
  uint64_t n_corners;
  uint64_t n_coarse_dofs;
  double t_setup;
  double t_coarse_factorization;
  double t_pcg;
} substruct_solve_report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *substruct_last_error(void);

/**
 * Load a problem from a mesh JSON file and a partition file (one
 * subdomain id per element line). When `renumber_gaps` is true, empty
 * subdomain ids are compacted instead of rejected.
 *
 * # Safety
 * `mesh_path` and `part_path` must be NUL-terminated strings and `out`
 * a valid destination pointer.
 */
enum substruct_status substruct_problem_from_files(const char *mesh_path,
                                                   const char *part_path,
                                                   bool renumber_gaps,
                                                   struct substruct_problem **out);

/**
 * Load a mesh file and partition it internally into `nparts` subdomains
 * by recursive coordinate bisection.
 *
 * # Safety
 * `mesh_path` must be a NUL-terminated string and `out` a valid
 * destination pointer.
 */
enum substruct_status substruct_problem_from_mesh(const char *mesh_path,
                                                  uint32_t nparts,
                                                  struct substruct_problem **out);

/**
 * Built-in regular grid fixture: `cells[axis]` elements per subdomain and
 * `subs[axis]` subdomains per axis, `dim` entries each.
 *
 * # Safety
 * `cells` and `subs` must point to `dim` readable entries and `out` must
 * be a valid destination pointer.
 */
enum substruct_status substruct_problem_structured(uint32_t dim,
                                                   const uint32_t *cells,
                                                   const uint32_t *subs,
                                                   struct substruct_problem **out);

/**
 * Built-in beam fixture whose two subdomains share a two-piece interface.
 *
 * # Safety
 * `out` must be a valid destination pointer.
 */
enum substruct_status substruct_problem_wedged_beam(struct substruct_problem **out);

/**
 * # Safety
 * `problem` must come from a `substruct_problem_*` constructor and not
 * have been freed already. Passing null is a no-op.
 */
void substruct_problem_free(struct substruct_problem *problem);

/**
 * Interface statistics: glob counts per kind plus the interface size.
 *
 * # Safety
 * `problem` must be a live handle; count pointers may be null when a
 * value is not wanted.
 */
enum substruct_status substruct_classify_counts(const struct substruct_problem *problem,
                                                uint64_t *faces,
                                                uint64_t *edges,
                                                uint64_t *vertices,
                                                uint64_t *interface_nodes);

/**
 * Select the basic corner set, optionally augmented by `extra_corners`
 * random interface nodes drawn with `seed`.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid destination pointer.
 */
enum substruct_status substruct_select(const struct substruct_problem *problem,
                                       enum substruct_algorithm algorithm,
                                       enum substruct_dim_mode dim_mode,
                                       bool detect_components,
                                       uint64_t extra_corners,
                                       uint64_t seed,
                                       struct substruct_corners **out);

/**
 * Number of corners in the set; 0 for a null handle.
 *
 * # Safety
 * `corners` must be a live handle or null.
 */
uint64_t substruct_corners_len(const struct substruct_corners *corners);

/**
 * Copy the corner node ids (ascending) into `buf`.
 *
 * # Safety
 * `buf` must be valid for `len` writes; `len` must be at least
 * `substruct_corners_len(corners)`.
 */
enum substruct_status substruct_corners_copy(const struct substruct_corners *corners,
                                             uint64_t *buf,
                                             uint64_t len);

/**
 * # Safety
 * `corners` must come from [`substruct_select`] and not have been freed
 * already. Passing null is a no-op.
 */
void substruct_corners_free(struct substruct_corners *corners);

/**
 * Assemble, reduce to the interface, build the BDDC preconditioner for
 * the given corner set and constraint mode, and solve by PCG.
 *
 * Elasticity uses `young` and `poisson`; Laplace ignores them. Returns
 * `SUBSTRUCT_SINGULAR` when a local problem or the coarse problem has a
 * mechanism and `SUBSTRUCT_NOT_CONVERGED` when `maxit` is exhausted (the
 * report is still filled in that case).
 *
 * # Safety
 * `problem` and `corners` must be live handles and `report` a valid
 * destination pointer.
 */
enum substruct_status substruct_solve(const struct substruct_problem *problem,
                                      const struct substruct_corners *corners,
                                      enum substruct_pde pde,
                                      double young,
                                      double poisson,
                                      enum substruct_constraints mode,
                                      double tol,
                                      uint64_t maxit,
                                      struct substruct_solve_report *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBSTRUCT_H */
