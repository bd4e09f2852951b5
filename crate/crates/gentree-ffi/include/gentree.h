#ifndef GENTREE_H
#define GENTREE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call through the C interface.
 */
typedef enum GentreeStatus {
  GENTREE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  GENTREE_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: family name, pattern, jumps or UTF-8.
   */
  GENTREE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The requested size is not realized by the family's walk.
   */
  GENTREE_STATUS_INFEASIBLE = 3,
  /**
   * The output buffer is too small; the needed length is reported.
   */
  GENTREE_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A size cap or step budget was exceeded.
   */
  GENTREE_STATUS_RESOURCE = 5,
  /**
   * An internal consistency check failed or the library panicked.
   */
  GENTREE_STATUS_INTERNAL = 6,
} GentreeStatus;

/**
 * Which constant to read from a [`GentreePatternStats`].
 */
typedef enum GentreeConstant {
  GENTREE_CONSTANT_MU = 0,
  GENTREE_CONSTANT_RHO = 1,
  GENTREE_CONSTANT_NU = 2,
  GENTREE_CONSTANT_BETA2 = 3,
  GENTREE_CONSTANT_GAMMA2 = 4,
} GentreeConstant;

/**
 * Limit-theorem constants of one pattern.
 */
typedef struct GentreePatternStats GentreePatternStats;

/**
 * Uniform sampler of members of one size with its own random stream.
 */
typedef struct GentreeSampler GentreeSampler;

/**
 * Closed interval as returned through the C interface.
 */
typedef struct GentreeInterval {
  double lo;
  double hi;
} GentreeInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *gentree_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gentree_version(void);

/**
 * # Safety
 * `s` must come from a gentree function returning a string, and must
 * not have been freed.
 */
void gentree_string_free(char *s);

/**
 * Tilting parameters `t` and `p` of the family's step law.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `t` and `p` must be valid
 * for writes.
 */
enum GentreeStatus gentree_solve_pq(const char *family, double *t, double *p);

/**
 * Number of members of size `n`, from the label recursion.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `count` must be valid for
 * writes.
 */
enum GentreeStatus gentree_level_count(const char *family, size_t n, uint64_t *count);

/**
 * Number of consecutive occurrences of a pattern in a permutation, both
 * given as arrays of values `1..=len`.
 *
 * # Safety
 * `pattern` and `perm` must point to `pattern_len` and `perm_len`
 * readable values; `count` must be valid for writes.
 */
enum GentreeStatus gentree_c_occ(const uint32_t *pattern,
                                 size_t pattern_len,
                                 const uint32_t *perm,
                                 size_t perm_len,
                                 size_t *count);

/**
 * Pattern induced by colored jumps such as `"-2,+1B,+1T"`.
 *
 * # Safety
 * `family` and `jumps` must be NUL-terminated strings; `out` must hold
 * `cap` values; `written` must be valid for writes.
 */
enum GentreeStatus gentree_pat(const char *family,
                               const char *jumps,
                               uint32_t *out,
                               size_t cap,
                               size_t *written);

/**
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be valid for
 * writes. On success `*out` owns a sampler to be released with
 * [`gentree_sampler_free`].
 */
enum GentreeStatus gentree_sampler_new(const char *family,
                                       size_t size,
                                       uint64_t seed,
                                       struct GentreeSampler **out);

/**
 * Draws the next permutation into `out`, which must hold the sampler's
 * size.
 *
 * # Safety
 * `sampler` must come from [`gentree_sampler_new`]; `out` must hold
 * `cap` values; `written` must be valid for writes.
 */
enum GentreeStatus gentree_sampler_next(struct GentreeSampler *sampler,
                                        uint32_t *out,
                                        size_t cap,
                                        size_t *written);

/**
 * # Safety
 * `sampler` must come from [`gentree_sampler_new`] and not have been
 * freed; null is ignored.
 */
void gentree_sampler_free(struct GentreeSampler *sampler);

/**
 * # Safety
 * `family` must be a NUL-terminated string, `pattern` must point to
 * `len` readable values and `out` must be valid for writes. On success
 * `*out` owns the result, released with [`gentree_pattern_stats_free`].
 */
enum GentreeStatus gentree_pattern_stats_new(const char *family,
                                             const uint32_t *pattern,
                                             size_t len,
                                             int64_t truncation,
                                             struct GentreePatternStats **out);

/**
 * # Safety
 * `stats` must come from [`gentree_pattern_stats_new`]; `out` must be
 * valid for writes.
 */
enum GentreeStatus gentree_pattern_stats_get(const struct GentreePatternStats *stats,
                                             enum GentreeConstant which,
                                             struct GentreeInterval *out);

/**
 * JSON form of the constants; release with [`gentree_string_free`].
 * Returns null on failure.
 *
 * # Safety
 * `stats` must come from [`gentree_pattern_stats_new`].
 */
char *gentree_pattern_stats_to_json(const struct GentreePatternStats *stats);

/**
 * # Safety
 * `stats` must come from [`gentree_pattern_stats_new`] and not have
 * been freed; null is ignored.
 */
void gentree_pattern_stats_free(struct GentreePatternStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENTREE_H */
