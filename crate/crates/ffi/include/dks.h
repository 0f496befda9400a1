#ifndef DKS_H
#define DKS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DksExecutor {
  DKS_EXECUTOR_AUTO = 0,
  DKS_EXECUTOR_QUANTUM = 1,
  DKS_EXECUTOR_EMULATOR = 2,
} DksExecutor;

typedef enum DksStatus {
  DKS_STATUS_OK = 0,
  DKS_STATUS_NULL_POINTER = 1,
  DKS_STATUS_INVALID_INPUT = 2,
  DKS_STATUS_CAPACITY = 3,
  DKS_STATUS_GENERATION = 4,
  DKS_STATUS_PARSE = 5,
  DKS_STATUS_IO = 6,
  DKS_STATUS_INTERNAL = 7,
} DksStatus;

/**
 * Opaque graph handle.
 */
typedef struct DksGraph DksGraph;

typedef struct DksSearchSummary {
  uint64_t subset;
  uint32_t edges;
  uint64_t oracle_calls;
  uint32_t attempts;
  uint32_t levels;
  /**
   * 1 when the statevector simulator ran, 0 for the emulator.
   */
  uint32_t simulated;
} DksSearchSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `dks_*` call on the same thread.
 */
const char *dks_last_error(void);

/**
 * Builds a graph on `n` vertices from `num_edges` pairs stored flat in
 * `edges` (`edges[2i]`, `edges[2i + 1]`).
 *
 * # Safety
 * `edges` must point to `2 * num_edges` readable values (it may be null
 * when `num_edges` is 0) and `out` must be writable.
 */
enum DksStatus dks_graph_new(uint32_t n,
                             const uint32_t *edges,
                             size_t num_edges,
                             struct DksGraph **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DksStatus dks_graph_erdos_renyi(uint32_t n, double p, uint64_t seed, struct DksGraph **out);

/**
 * Reads a graph in edge-list format.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum DksStatus dks_graph_read(const char *path, struct DksGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from a `dks_graph_*` constructor and not be freed twice.
 */
void dks_graph_free(struct DksGraph *g);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uint32_t dks_graph_num_vertices(const struct DksGraph *g);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t dks_graph_num_edges(const struct DksGraph *g);

/**
 * Number of edges induced by `subset`.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum DksStatus dks_edge_count(const struct DksGraph *g, uint64_t subset, uint32_t *out);

/**
 * Exhaustive densest k-subgraph; ties go to the numerically smallest mask.
 *
 * # Safety
 * `g` must be a live handle; `subset` and `edges` must be writable.
 */
enum DksStatus dks_brute_force(const struct DksGraph *g,
                               uint32_t k,
                               uint64_t *subset,
                               uint32_t *edges);

/**
 * Adaptive Grover search for a densest k-subgraph, certified with the given
 * confidence. `max_qubits` of 0 selects the default simulator limit.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum DksStatus dks_search(const struct DksGraph *g,
                          uint32_t k,
                          double confidence,
                          uint64_t seed,
                          enum DksExecutor executor,
                          uint32_t max_qubits,
                          struct DksSearchSummary *out);

/**
 * Static version string.
 */
const char *dks_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DKS_H */
