/* C interface for the subshift analysis library. */

#pragma once

/* Generated with cbindgen:0.26.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every C-ABI call.
 */
typedef enum SubshiftStatus {
  /**
   * The call succeeded and out-parameters are valid.
   */
  SUBSHIFT_STATUS_OK = 0,
  /**
   * Rule text, a word, or a tail specification failed to parse.
   */
  SUBSHIFT_STATUS_PARSE_ERROR = 1,
  /**
   * A null pointer, bad UTF-8, or a parameter outside its domain.
   */
  SUBSHIFT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The index cutoff or a scan limit was reached before a decision.
   */
  SUBSHIFT_STATUS_SATURATED = 3,
  /**
   * An explicit node or expansion budget was exhausted.
   */
  SUBSHIFT_STATUS_BUDGET_EXCEEDED = 4,
  /**
   * A panic crossed the boundary; the library state is still usable.
   */
  SUBSHIFT_STATUS_INTERNAL_ERROR = 5,
} SubshiftStatus;

/**
 * Opaque analysis handle: a substitution plus its factor index.
 */
typedef struct SubshiftSystem SubshiftSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Never null; empty
 * before the first failure. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *subshift_last_error_message(void);

/**
 * Builds a system from rule text (`a -> image`, one rule per line or
 * `/`-separated). `max_len` is the exact-language cutoff; factor queries are
 * answered exactly up to it. On success the handle must be released with
 * `subshift_system_free`.
 *
 * # Safety
 * `rules` must be a valid NUL-terminated string; `out` must point to
 * writable storage for one pointer.
 */
enum SubshiftStatus subshift_system_new(const char *rules,
                                        size_t max_len,
                                        struct SubshiftSystem **out);

/**
 * Releases a system handle. Null is a no-op.
 *
 * # Safety
 * `sys` must be a pointer returned by `subshift_system_new` that has not
 * been freed, or null.
 */
void subshift_system_free(struct SubshiftSystem *sys);

/**
 * Releases a string returned through any `char**` out-parameter. Null is a
 * no-op.
 *
 * # Safety
 * `s` must be a string returned by this library that has not been freed, or
 * null.
 */
void subshift_string_free(char *s);

/**
 * Full structural report as JSON: alphabet, primitivity, markedness,
 * 2-fullness, aperiodicity evidence, Perron data, power-free bound, and
 * recognizability length.
 *
 * # Safety
 * `sys` must be a live system handle; `out_json` must point to writable
 * storage for one pointer.
 */
enum SubshiftStatus subshift_analyze_json(const struct SubshiftSystem *sys, char **out_json);

/**
 * Factor complexity `p(n)`: the number of distinct length-`n` factors.
 * Fails with `Saturated` when `n` exceeds the index cutoff.
 *
 * # Safety
 * `sys` must be a live system handle; `out` must point to writable storage
 * for one value.
 */
enum SubshiftStatus subshift_complexity(const struct SubshiftSystem *sys, size_t n, size_t *out);

/**
 * Depth of a sampled word: the length of its longest prefix that is a
 * factor, provided the next letter already leaves the language. Returns
 * `Saturated` when the whole sample is a factor or the first exit lies
 * beyond the index cutoff.
 *
 * # Safety
 * `sys` must be a live system handle; `word` a valid NUL-terminated string;
 * `out` writable storage for one value.
 */
enum SubshiftStatus subshift_delta(const struct SubshiftSystem *sys, const char *word, size_t *out);

/**
 * All ways of writing a word as S H(core) P, as JSON, with the uniqueness
 * verdict.
 *
 * # Safety
 * `sys` must be a live system handle; `word` a valid NUL-terminated string;
 * `out_json` writable storage for one pointer.
 */
enum SubshiftStatus subshift_desubstitute_json(const struct SubshiftSystem *sys,
                                               const char *word,
                                               char **out_json);

/**
 * Accident profile of `H^level(x)` as JSON: accident times, gaps, depths,
 * bispecial witnesses. The tail specification accepts `BLOCK^inf`,
 * `PREFIX|BLOCK^inf`, `fixed:LETTER`, `PREFIX|fixed:LETTER`, and
 * `random:LEN` (driven by `seed`).
 *
 * # Safety
 * `sys` must be a live system handle; `tail` a valid NUL-terminated string;
 * `out_json` writable storage for one pointer.
 */
enum SubshiftStatus subshift_accidents_json(const struct SubshiftSystem *sys,
                                            const char *tail,
                                            uint32_t level,
                                            size_t horizon,
                                            uint64_t seed,
                                            char **out_json);

/**
 * One renormalization iterate `R^m V(x)` for the power potential
 * `1 / delta^alpha`, using the deep profiler when the substitution supports
 * it and the index-backed one otherwise.
 *
 * # Safety
 * `sys` must be a live system handle; `tail` a valid NUL-terminated string;
 * `out` writable storage for one value.
 */
enum SubshiftStatus subshift_renormalize(const struct SubshiftSystem *sys,
                                         const char *tail,
                                         double alpha,
                                         uint32_t m,
                                         uint64_t seed,
                                         double *out);

/**
 * Closed-form limit of the renormalization iterates on the Thue-Morse
 * system for a tail with `delta(x) = p`. Fails for `p < 2`.
 *
 * # Safety
 * `out` must point to writable storage for one value.
 */
enum SubshiftStatus subshift_thue_morse_u(size_t p, double *out);

/**
 * Freezing certificate as JSON for the cylinder of a non-factor word `wj`
 * with freeness cutoff `n`, at inverse temperature `beta`, with return
 * words truncated at `n_max` and free excursions at `l_max`. The JSON
 * carries the verdict, the truncated operator value, and the tail bound.
 *
 * # Safety
 * `sys` must be a live system handle; `wj` a valid NUL-terminated string;
 * `out_json` writable storage for one pointer.
 */
enum SubshiftStatus subshift_freeze_json(const struct SubshiftSystem *sys,
                                         const char *wj,
                                         size_t n,
                                         double beta,
                                         size_t n_max,
                                         size_t l_max,
                                         char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus
