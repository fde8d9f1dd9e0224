#ifndef WSBMF_H
#define WSBMF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum WsbmfStatus {
  WSBMF_STATUS_OK = 0,
  WSBMF_STATUS_NULL_POINTER = 1,
  WSBMF_STATUS_INVALID_ARGUMENT = 2,
  WSBMF_STATUS_INPUT_ERROR = 3,
  WSBMF_STATUS_SOLVER_ERROR = 4,
  WSBMF_STATUS_BUFFER_TOO_SMALL = 5,
  WSBMF_STATUS_PANIC = 6,
} WsbmfStatus;

typedef struct WsbmfGraph WsbmfGraph;

typedef struct WsbmfResult WsbmfResult;

// Solver settings; obtain defaults from [`wsbmf_config_default`].
typedef struct WsbmfConfig {
  size_t communities;
  size_t restarts;
  uint64_t seed;
  double gamma;
  size_t c1_iters;
  size_t c2_iters;
  size_t threshold_grid;
} WsbmfConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *wsbmf_last_error(void);

struct WsbmfConfig wsbmf_config_default(size_t communities);

// Builds a graph from `n_edges` `(delta, gamma)` index pairs laid out flat.
enum WsbmfStatus wsbmf_graph_new(size_t n_delta,
                                 size_t n_gamma,
                                 const size_t *edges,
                                 size_t n_edges,
                                 struct WsbmfGraph **out);

// Parses edge-list text (`delta_id gamma_id` per line, `#` comments).
enum WsbmfStatus wsbmf_graph_from_edgelist(const char *text, struct WsbmfGraph **out);

// The bundled 18 × 14 women/events network.
enum WsbmfStatus wsbmf_graph_women(struct WsbmfGraph **out);

size_t wsbmf_graph_n_delta(const struct WsbmfGraph *graph);

size_t wsbmf_graph_n_gamma(const struct WsbmfGraph *graph);

size_t wsbmf_graph_n_edges(const struct WsbmfGraph *graph);

void wsbmf_graph_free(struct WsbmfGraph *graph);

enum WsbmfStatus wsbmf_detect(const struct WsbmfGraph *graph,
                              const struct WsbmfConfig *config,
                              struct WsbmfResult **out);

// Detection with existence and absence constraints, each given as flat
// pairs of global node indices from the same part.
enum WsbmfStatus wsbmf_detect_with_priors(const struct WsbmfGraph *graph,
                                          const struct WsbmfConfig *config,
                                          const size_t *existence,
                                          size_t n_existence,
                                          const size_t *absence,
                                          size_t n_absence,
                                          struct WsbmfResult **out);

size_t wsbmf_result_n_nodes(const struct WsbmfResult *result);

size_t wsbmf_result_communities(const struct WsbmfResult *result);

// Copies the n × c binary membership matrix, row-major, into `buf`.
enum WsbmfStatus wsbmf_result_binary(const struct WsbmfResult *result, uint8_t *buf, size_t len);

// Copies the n × c continuous membership matrix, row-major, into `buf`.
enum WsbmfStatus wsbmf_result_continuous(const struct WsbmfResult *result, double *buf, size_t len);

// Objective of the selected restart; NaN for a null handle.
double wsbmf_result_objective(const struct WsbmfResult *result);

double wsbmf_result_density(const struct WsbmfResult *result);

double wsbmf_result_threshold(const struct WsbmfResult *result);

// Serializes the cover as JSON; release the string with [`wsbmf_string_free`].
enum WsbmfStatus wsbmf_result_to_json(const struct WsbmfResult *result, char **out);

void wsbmf_result_free(struct WsbmfResult *result);

void wsbmf_string_free(char *s);

// NMI between two label arrays of length `n`.
enum WsbmfStatus wsbmf_nmi(const size_t *truth, const size_t *found, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSBMF_H */
