#ifndef GRIDLOSS_H
#define GRIDLOSS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_UTF8 = 2,
  GL_STATUS_IO = 3,
  GL_STATUS_PARSE = 4,
  GL_STATUS_VALIDATION = 5,
  GL_STATUS_NOT_FOUND = 6,
  GL_STATUS_INVALID_ARGUMENT = 7,
  GL_STATUS_SINGULAR_JACOBIAN = 8,
  GL_STATUS_BUFFER_TOO_SMALL = 9,
  GL_STATUS_PANIC = 10,
} GlStatus;

/**
 * Opaque parsed and validated network.
 */
typedef struct GlNetwork GlNetwork;

/**
 * Opaque load-flow result with its loss analysis.
 */
typedef struct GlSolution GlSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *gl_last_error_message(void);

/**
 * Parse and validate a case file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GlStatus gl_network_from_file(const char *path, struct GlNetwork **out);

/**
 * Parse and validate case-file text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GlStatus gl_network_from_string(const char *text, struct GlNetwork **out);

/**
 * The bundled IEEE 30-bus case.
 *
 * # Safety
 * `out` must be writable.
 */
enum GlStatus gl_network_ieee30(struct GlNetwork **out);

/**
 * # Safety
 * `network` must be null or a handle from this library not yet freed.
 */
void gl_network_free(struct GlNetwork *network);

/**
 * Number of buses; 0 for a null handle.
 *
 * # Safety
 * `network` must be null or a live handle.
 */
size_t gl_network_bus_count(const struct GlNetwork *network);

/**
 * Number of branches; 0 for a null handle.
 *
 * # Safety
 * `network` must be null or a live handle.
 */
size_t gl_network_branch_count(const struct GlNetwork *network);

/**
 * New network with a strategy applied, e.g. `load-share:from=5,to=4,frac=0.15`,
 * `q-inject:bus=30,mvar=1.0` or `tap:from=4,to=12,tap=1.0`.
 *
 * # Safety
 * `network` must be a live handle, `spec` NUL-terminated, `out` writable.
 */
enum GlStatus gl_network_apply_strategy(const struct GlNetwork *network,
                                        const char *spec,
                                        struct GlNetwork **out);

/**
 * Newton-Raphson load flow. A non-converged result is still returned with
 * `GL_STATUS_OK`; check [`gl_solution_converged`].
 *
 * # Safety
 * `network` must be a live handle and `out` writable.
 */
enum GlStatus gl_solve(const struct GlNetwork *network,
                       double tolerance,
                       size_t max_iterations,
                       bool enforce_q_limits,
                       struct GlSolution **out);

/**
 * # Safety
 * `solution` must be null or a handle from this library not yet freed.
 */
void gl_solution_free(struct GlSolution *solution);

/**
 * # Safety
 * `solution` must be null or a live handle.
 */
bool gl_solution_converged(const struct GlSolution *solution);

/**
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t gl_solution_iterations(const struct GlSolution *solution);

/**
 * Copy voltage magnitudes (pu) and angles (radians) in bus order into
 * caller buffers of at least `len` entries. Either buffer may be null.
 *
 * # Safety
 * Non-null buffers must hold `len` doubles.
 */
enum GlStatus gl_solution_voltages(const struct GlSolution *solution,
                                   double *v_mag,
                                   double *v_ang,
                                   size_t len);

/**
 * Total real (MW) and series reactive (MVAR) branch losses.
 *
 * # Safety
 * `solution` must be a live handle; non-null outputs must be writable.
 */
enum GlStatus gl_solution_losses(const struct GlSolution *solution,
                                 double *p_loss_mw,
                                 double *q_loss_mvar);

/**
 * GA optimal power flow with the default IEEE 30-bus control set and the
 * given seed, population size and generation count. Writes the best real
 * loss in MW (infinity if no candidate converged).
 *
 * # Safety
 * `network` must be a live handle and `best_loss_mw` writable.
 */
enum GlStatus gl_run_opf(const struct GlNetwork *network,
                         uint64_t seed,
                         size_t population_size,
                         size_t max_generations,
                         double *best_loss_mw);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDLOSS_H */
