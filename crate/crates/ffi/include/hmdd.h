/* C API of the hmdd solver library.
 *
 * Maintained by hand; the Rust test suite of the hmdd-ffi crate checks that
 * the declarations here stay in sync with the implementation.
 *
 * Conventions:
 *   - Every function returns an HmddStatus; results go through out pointers.
 *   - HmddMesh / HmddSolution are opaque handles released with the matching
 *     *_free function; freeing NULL is a no-op.
 *   - hmdd_last_error() returns a thread-local message for the last failing
 *     call on the calling thread (static storage, do not free).
 *   - Handles are immutable after creation and safe for concurrent reads.
 */
#ifndef HMDD_H
#define HMDD_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum HmddStatus {
  HMDD_STATUS_OK = 0,
  HMDD_STATUS_NULL_POINTER = 1,
  HMDD_STATUS_INVALID_ARGUMENT = 2,
  HMDD_STATUS_GEOMETRY = 3,
  HMDD_STATUS_SINGULAR = 4,
  HMDD_STATUS_RESIDUAL = 5,
  HMDD_STATUS_IO = 6,
  HMDD_STATUS_INTERNAL = 7,
} HmddStatus;

enum {
  HMDD_GEOMETRY_SQUARE = 0,
  HMDD_GEOMETRY_ANNULUS = 1,
};

enum {
  HMDD_SOLVER_FULL = 0,
  HMDD_SOLVER_CONDENSED = 1,
};

/* Error norms and metadata of one solved benchmark case. */
typedef struct HmddErrorReport {
  uint32_t level;
  uint32_t order;
  uint32_t n_dofs;
  uint32_t _reserved;
  double tau;
  double h;
  double residual;  /* relative residual of the linear solve */
  double e_u;       /* L2 error of the primal variable */
  double e_q;       /* L2 error of the flux */
  double e_div;     /* L2 error of the flux divergence */
  double j_qn;      /* L2(skeleton) norm of the normal flux jump */
  double j_u;       /* L2(skeleton) norm of the projected trace jump */
  double e_mu;      /* L2(skeleton) error of the hybrid variable */
  double e_mean_mu; /* |{projected traces} - mu_h| on the skeleton */
  double e_mean_u;  /* |{u - projected traces}| on the skeleton */
  double norm_q;    /* L2 norm of the discrete flux */
} HmddErrorReport;

typedef struct HmddMesh HmddMesh;
typedef struct HmddSolution HmddSolution;

/* kappa/source callback: must be a pure function of (x, y), thread-safe. */
typedef double (*HmddScalarFn)(double x, double y);

/* Version string of the library; static storage, do not free. */
const char *hmdd_version(void);

/* Message of the last failing call on this thread. */
const char *hmdd_last_error(void);

/* Benchmark meshes: the two-patch unit square or the radius-2 disk with the
 * interface on the unit circle, refined `level` times. */
HmddStatus hmdd_mesh_create(int geometry, uint32_t level, HmddMesh **out_mesh);
void hmdd_mesh_free(HmddMesh *mesh);
HmddStatus hmdd_mesh_cell_count(const HmddMesh *mesh, uint32_t *out);
HmddStatus hmdd_mesh_skeleton_facet_count(const HmddMesh *mesh, uint32_t *out);
HmddStatus hmdd_mesh_width(const HmddMesh *mesh, double *out);
HmddStatus hmdd_mesh_write(const HmddMesh *mesh, const char *path);

/* Solve the stabilized hybrid mixed system with callbacks for kappa and the
 * source; tau >= 0 is the stabilization parameter. */
HmddStatus hmdd_solve(const HmddMesh *mesh, uint32_t order, double tau,
                      HmddScalarFn kappa, HmddScalarFn source, int solver,
                      HmddSolution **out_solution);
void hmdd_solution_free(HmddSolution *solution);
HmddStatus hmdd_solution_eval_u(const HmddSolution *solution, double x,
                                double y, double *out);
HmddStatus hmdd_solution_dof_count(const HmddSolution *solution,
                                   uint32_t *out);

/* One benchmark case end to end: mesh, solve, error norms against the
 * geometry's built-in reference solution. */
HmddStatus hmdd_run_case(int geometry, uint32_t level, uint32_t order,
                         double tau, int solver, HmddErrorReport *out_report);

#ifdef __cplusplus
}
#endif

#endif /* HMDD_H */
