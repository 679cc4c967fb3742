#ifndef SPARSE_CTRL_H
#define SPARSE_CTRL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SclStatus {
  SCL_STATUS_OK = 0,
  SCL_STATUS_NULL_POINTER = 1,
  SCL_STATUS_INVALID_PARAMETER = 2,
  SCL_STATUS_CAPACITY = 3,
  SCL_STATUS_NUMERICAL = 4,
  SCL_STATUS_MODEL_ASSUMPTION = 5,
  SCL_STATUS_MATCHING_FAILED = 6,
  SCL_STATUS_PARSE = 7,
  SCL_STATUS_IO = 8,
  SCL_STATUS_BUFFER_TOO_SMALL = 9,
  SCL_STATUS_PANIC = 10,
} SclStatus;

typedef enum SclFamilyKind {
  SCL_FAMILY_KIND_UNCONSTRAINED = 0,
  SCL_FAMILY_KIND_PIECEWISE = 1,
  SCL_FAMILY_KIND_BLOCK = 2,
} SclFamilyKind;

typedef enum SclGraphModel {
  SCL_GRAPH_MODEL_ER_UNDIRECTED = 0,
  SCL_GRAPH_MODEL_ER_DIRECTED = 1,
  SCL_GRAPH_MODEL_POWER_LAW = 2,
} SclGraphModel;

typedef enum SclStrategy {
  SCL_STRATEGY_AUTO = 0,
  SCL_STRATEGY_EXHAUSTIVE = 1,
  SCL_STRATEGY_UNCONSTRAINED_SHORTCUT = 2,
  SCL_STRATEGY_SAMPLED = 3,
} SclStrategy;

/**
 * Admissible support family.
 */
typedef struct SclFamily SclFamily;

/**
 * State matrix of a system with identity input matrix.
 */
typedef struct SclSystem SclSystem;

typedef struct SclVerdict {
  bool controllable;
  bool cond_a;
  bool cond_b;
  /**
   * A sampled search found no witness; not a proof of failure.
   */
  bool inconclusive;
  /**
   * Length of the witness support, 0 when there is none.
   */
  size_t witness_len;
  /**
   * Smallest singular value over the eigenvalue tests, NaN if none ran.
   */
  double min_eigen_margin;
  /**
   * Smallest singular value certifying the witness, NaN if none.
   */
  double cond_b_margin;
} SclVerdict;

typedef struct SclBound {
  double q;
  double raw_q;
  bool valid;
} SclBound;

typedef struct SclEstimate {
  size_t controllable_count;
  size_t trials;
  double p_hat;
  double ci_low;
  double ci_high;
} SclEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *scl_last_error(void);

/**
 * Creates a structured family. `m` is the piece count or block length and is
 * ignored for unconstrained families.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SclStatus scl_family_new(enum SclFamilyKind kind,
                              size_t n,
                              size_t s,
                              size_t m,
                              struct SclFamily **out);

/**
 * Creates an explicit family from `count` sets of `s` 0-based indices each,
 * stored contiguously in `indices`.
 *
 * # Safety
 * `indices` must point to `count * s` readable values and `out` must be writable.
 */
enum SclStatus scl_family_explicit(size_t n,
                                   size_t s,
                                   const size_t *indices,
                                   size_t count,
                                   struct SclFamily **out);

/**
 * # Safety
 * `family` must be null or a handle from this library that has not been freed.
 */
void scl_family_free(struct SclFamily *family);

/**
 * Number of members.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
enum SclStatus scl_family_size(const struct SclFamily *family, uint64_t *out);

/**
 * Number of distinct `t`-subsets of members.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
enum SclStatus scl_family_q(const struct SclFamily *family, size_t t, uint64_t *out);

/**
 * Wraps an `n × n` row-major state matrix.
 *
 * # Safety
 * `phi` must point to `n * n` readable values and `out` must be writable.
 */
enum SclStatus scl_system_from_dense(size_t n, const double *phi, struct SclSystem **out);

/**
 * Samples a graph with uniform node weights and wraps its row-normalized
 * matrix. `param` is `p` for the ER models and the exponent for power law.
 * The draw matches trial `trial_index` of an experiment seeded with `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SclStatus scl_system_sample(enum SclGraphModel model,
                                 size_t n,
                                 double param,
                                 uint64_t seed,
                                 size_t trial_index,
                                 struct SclSystem **out);

/**
 * # Safety
 * `system` must be null or a live handle.
 */
void scl_system_free(struct SclSystem *system);

/**
 * State dimension, 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
size_t scl_system_dim(const struct SclSystem *system);

/**
 * Copies the state matrix row-major into `buf`, which holds `len` values.
 *
 * # Safety
 * `system` must be a live handle and `buf` must have room for `len` values.
 */
enum SclStatus scl_system_matrix(const struct SclSystem *system, double *buf, size_t len);

/**
 * Tests sparse controllability. `draws` and `sample_seed` are used only by
 * the sampled strategy. When `witness` is non-null it receives up to
 * `witness_cap` 0-based indices of the witness support; a witness longer than
 * `witness_cap` gives `BufferTooSmall` with `out` still filled in.
 *
 * # Safety
 * `system` and `family` must be live handles, `out` writable, and `witness`
 * either null or valid for `witness_cap` writes.
 */
enum SclStatus scl_check(const struct SclSystem *system,
                         const struct SclFamily *family,
                         enum SclStrategy kind,
                         size_t draws,
                         uint64_t sample_seed,
                         struct SclVerdict *out,
                         size_t *witness,
                         size_t witness_cap);

/**
 * Probability lower bound; `directed` selects the directed-graph formula.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
enum SclStatus scl_bound(const struct SclFamily *family,
                         bool directed,
                         double p,
                         double big_c,
                         double small_c,
                         struct SclBound *out);

/**
 * Monte Carlo estimate of the probability that a random graph of the given
 * model is controllable with the family.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
enum SclStatus scl_estimate_probability(enum SclGraphModel model,
                                        double param,
                                        const struct SclFamily *family,
                                        size_t trials,
                                        uint64_t seed,
                                        struct SclEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_CTRL_H */
