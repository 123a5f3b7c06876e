#ifndef ELASTINET_H
#define ELASTINET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  EN_STATUS_OK = 0,
  EN_STATUS_NULL_POINTER = 1,
  EN_STATUS_INVALID_UTF8 = 2,
  EN_STATUS_PARSE = 3,
  EN_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Outputs were written but the optimizer did not meet its tolerances.
   */
  EN_STATUS_NOT_CONVERGED = 5,
  EN_STATUS_PANIC = 6,
} EnStatus;

typedef enum {
  EN_VERDICT_REGULAR = 0,
  EN_VERDICT_DEGENERATE = 1,
  EN_VERDICT_INADMISSIBLE = 2,
} EnVerdict;

/**
 * Angled graph.
 */
typedef struct EnGraph EnGraph;

/**
 * Network (graph plus one polyline or collapsed point per edge).
 */
typedef struct EnNetwork EnNetwork;

typedef struct {
  size_t samples;
  size_t max_iter;
  size_t restarts;
  uint64_t seed;
  double tol_c;
  double tol_g;
} EnMinimizeOptions;

typedef struct {
  double energy;
  double closure_residual;
  size_t iterations;
  size_t degenerate_edges;
  EnVerdict verdict;
  bool converged;
  bool suspicious;
} EnMinimizeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success. Valid until the next call.
 */
const char *en_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void en_string_free(char *s);

/**
 * Parses a graph document; a network document yields its graph.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
EnStatus en_graph_from_json(const char *json, EnGraph **out);

/**
 * # Safety
 * `g` must come from this library or be null.
 */
void en_graph_free(EnGraph *g);

/**
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
EnStatus en_graph_num_edges(const EnGraph *g, size_t *out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
EnStatus en_network_from_json(const char *json, EnNetwork **out);

/**
 * # Safety
 * `n` must come from this library or be null.
 */
void en_network_free(EnNetwork *n);

/**
 * # Safety
 * `n` must be a live handle; `out` must be writable. Release the string with `en_string_free`.
 */
EnStatus en_network_to_json(const EnNetwork *n, char **out);

/**
 * `α ∫k² + β·length` summed over the edges.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
EnStatus en_network_energy(const EnNetwork *n, double alpha, double beta, double *out);

/**
 * `tangent_tol` compares tangents measured on the polylines with the assigned directions.
 *
 * # Safety
 * `n` must be a live handle; `out` must be writable.
 */
EnStatus en_network_classify(const EnNetwork *n, double tangent_tol, EnVerdict *out);

/**
 * # Safety
 * `n` must be a live handle; `out` must be writable. Release the string with `en_string_free`.
 */
EnStatus en_network_render_svg(const EnNetwork *n, double px_per_unit, char **out);

EnMinimizeOptions en_minimize_options_default(void);

/**
 * Minimizes the relaxed energy. `opts` and `summary` may be null; on `NotConverged` the best
 * iterate is still returned.
 *
 * # Safety
 * `g` must be a live handle; `network` must be writable; non-null pointers must be valid.
 */
EnStatus en_minimize_relaxed(const EnGraph *g,
                             double alpha,
                             double beta,
                             const EnMinimizeOptions *opts,
                             EnNetwork **network,
                             EnMinimizeSummary *summary);

/**
 * Minimizes `α ∫k²` with the edge lengths fixed (`num_lengths` must equal the edge count).
 *
 * # Safety
 * `lengths` must point to `num_lengths` doubles; other pointers as for `en_minimize_relaxed`.
 */
EnStatus en_minimize_fixed_length(const EnGraph *g,
                                  const double *lengths,
                                  size_t num_lengths,
                                  double alpha,
                                  const EnMinimizeOptions *opts,
                                  EnNetwork **network,
                                  EnMinimizeSummary *summary);

/**
 * Train-track curve joining `(0,0)` to `(b,h)` with horizontal end tangents.
 *
 * # Safety
 * `out` must be writable.
 */
EnStatus en_train_tracks(double h, size_t half, EnNetwork **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELASTINET_H */
