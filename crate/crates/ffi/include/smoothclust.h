#ifndef SMOOTHCLUST_H
#define SMOOTHCLUST_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum SmcStatus {
  SMC_STATUS_OK = 0,
  // A required pointer argument was null.
  SMC_STATUS_NULL_POINTER = 1,
  // A parameter was out of range or inconsistent with the inputs.
  SMC_STATUS_INVALID_ARGUMENT = 2,
  // Inputs broke a structural precondition (shape, symmetry, sign).
  SMC_STATUS_CONTRACT_VIOLATION = 3,
  // A factorization or eigensolver failed.
  SMC_STATUS_NUMERICAL = 4,
  SMC_STATUS_IO = 5,
  SMC_STATUS_PARSE = 6,
  // An internal panic was caught at the boundary.
  SMC_STATUS_PANIC = 7,
} SmcStatus;

// Symmetric nonnegative affinity graph.
typedef struct SmcAffinity SmcAffinity;

// Row-per-sample feature matrix.
typedef struct SmcMatrix SmcMatrix;

// Settings for `smc_run_flsr` and `smc_run_ftrr`.
typedef struct SmcFitOptions {
  double alpha;
  // Filter order.
  uint32_t k;
  // Entries kept per affinity row; used by FTRR only.
  size_t p;
  double epsilon;
  size_t max_iter;
  // Filter the previous representation instead of the raw features.
  bool filter_previous;
  bool zero_diag;
} SmcFitOptions;

// Convergence information of a fit.
typedef struct SmcFitSummary {
  size_t iterations;
  bool converged;
  double final_residual;
} SmcFitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread, or null.
//
// The pointer stays valid until the next call into this library from the
// same thread.
const char *smc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *smc_version(void);

// Copies a row-major `rows x cols` array into a new matrix handle.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
enum SmcStatus smc_matrix_new(const double *data, size_t rows, size_t cols, struct SmcMatrix **out);

// Releases a matrix handle; null is ignored.
//
// # Safety
// `m` must come from this library and not have been freed.
void smc_matrix_free(struct SmcMatrix *m);

// Row count, or 0 for null.
//
// # Safety
// `m` must be null or a live handle.
size_t smc_matrix_rows(const struct SmcMatrix *m);

// Column count, or 0 for null.
//
// # Safety
// `m` must be null or a live handle.
size_t smc_matrix_cols(const struct SmcMatrix *m);

// Writes the matrix row-major into `out`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle and `out` must hold `len` writable doubles.
enum SmcStatus smc_matrix_copy(const struct SmcMatrix *m, double *out, size_t len);

// Builds an affinity graph from a row-major `n x n` weight array.
//
// # Safety
// `weights` must point to `n * n` readable doubles; `out` must be writable.
enum SmcStatus smc_affinity_new(const double *weights, size_t n, struct SmcAffinity **out);

// Releases an affinity handle; null is ignored.
//
// # Safety
// `w` must come from this library and not have been freed.
void smc_affinity_free(struct SmcAffinity *w);

// Node count, or 0 for null.
//
// # Safety
// `w` must be null or a live handle.
size_t smc_affinity_size(const struct SmcAffinity *w);

// Writes the `n x n` weights row-major into `out`, which holds `len` doubles.
//
// # Safety
// `w` must be a live handle and `out` must hold `len` writable doubles.
enum SmcStatus smc_affinity_copy(const struct SmcAffinity *w, double *out, size_t len);

// Gaussian kNN graph over the rows of `x`.
//
// # Safety
// `x` must be a live handle; `out` must be writable.
enum SmcStatus smc_knn_affinity(const struct SmcMatrix *x,
                                size_t neighbors,
                                struct SmcAffinity **out);

// Applies `(I - L/2)^k` on the graph `w` to every column of `x`.
//
// # Safety
// `w` and `x` must be live handles; `out` must be writable.
enum SmcStatus smc_filter(const struct SmcAffinity *w,
                          const struct SmcMatrix *x,
                          uint32_t k,
                          struct SmcMatrix **out);

// One-shot LSR affinity `(|Z| + |Z^T|) / 2`.
//
// # Safety
// `x` must be a live handle; `out` must be writable.
enum SmcStatus smc_lsr_affinity(const struct SmcMatrix *x, double alpha, struct SmcAffinity **out);

// alpha 0.01, k 1, p 0 (must be set for FTRR), default stopping rule.
struct SmcFitOptions smc_fit_options_default(void);

// Alternating graph filtering and LSR until the affinity settles.
//
// # Safety
// `x` and `options` must be valid; `out` must be writable; `summary` may be null.
enum SmcStatus smc_run_flsr(const struct SmcMatrix *x,
                            const struct SmcFitOptions *options,
                            struct SmcAffinity **out,
                            struct SmcFitSummary *summary);

// `smc_run_flsr` followed by keeping the `p` largest entries per row.
//
// # Safety
// `x` and `options` must be valid; `out` must be writable; `summary` may be null.
enum SmcStatus smc_run_ftrr(const struct SmcMatrix *x,
                            const struct SmcFitOptions *options,
                            struct SmcAffinity **out,
                            struct SmcFitSummary *summary);

// Spectral clustering of `w` into `g` groups; writes `len == n` labels.
//
// # Safety
// `w` must be a live handle and `labels` must hold `len` writable entries.
enum SmcStatus smc_cluster(const struct SmcAffinity *w,
                           size_t g,
                           uint64_t seed,
                           size_t restarts,
                           size_t *labels,
                           size_t len);

// Clustering accuracy under the best one-to-one label mapping.
//
// # Safety
// `pred` and `truth` must hold `n` entries; `out` must be writable.
enum SmcStatus smc_accuracy(const size_t *pred, const size_t *truth, size_t n, double *out);

// Normalized mutual information.
//
// # Safety
// `pred` and `truth` must hold `n` entries; `out` must be writable.
enum SmcStatus smc_nmi(const size_t *pred, const size_t *truth, size_t n, double *out);

// Purity.
//
// # Safety
// `pred` and `truth` must hold `n` entries; `out` must be writable.
enum SmcStatus smc_purity(const size_t *pred, const size_t *truth, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHCLUST_H */
