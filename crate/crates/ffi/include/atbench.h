/* C ABI for the atbench library.
 *
 * Every fallible function returns an AtbStatus; on failure a thread-local
 * message is available through atb_last_error() until the next failing call
 * on the same thread. Cache handles are opaque and must be released with
 * atb_cache_free().
 */

#ifndef ATBENCH_H
#define ATBENCH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct AtbCache AtbCache;

typedef enum AtbStatus {
  ATB_OK = 0,
  /* A required pointer argument was null. */
  ATB_NULL_ARGUMENT = 1,
  /* Arguments were malformed (bad UTF-8, unknown name, out of range). */
  ATB_INVALID_ARGUMENT = 2,
  /* The file could not be read or written. */
  ATB_IO = 3,
  /* The cache exists but fails validation. */
  ATB_DATA = 4,
  /* The computation itself failed (degenerate space, optimizer error). */
  ATB_RUNTIME = 5,
  /* A panic was caught at the boundary. */
  ATB_INTERNAL = 6,
} AtbStatus;

/* Version of the library as a static string. */
const char *atb_version(void);

/* Message of the last error on this thread, or NULL. */
const char *atb_last_error(void);

/* Loads and validates a cache file into a new handle. */
AtbStatus atb_cache_load(const char *path, AtbCache **out);

/* Generates a synthetic cache; kind is "bowl", "rugged", or
 * "uniform_random". */
AtbStatus atb_cache_synth(const char *kind, uint32_t dims,
                          uint32_t points_per_dim, uint64_t seed,
                          AtbCache **out);

/* Writes the cache to a file in the documented JSON format. */
AtbStatus atb_cache_write(const AtbCache *cache, const char *path);

/* Releases a cache handle. NULL is ignored. */
void atb_cache_free(AtbCache *cache);

/* Structural counts and statistics. */
AtbStatus atb_cache_cartesian_size(const AtbCache *cache, uint64_t *out);
AtbStatus atb_cache_constrained_size(const AtbCache *cache, uint64_t *out);
AtbStatus atb_cache_dimension_count(const AtbCache *cache, uint32_t *out);
AtbStatus atb_cache_optimum(const AtbCache *cache, double *out);
AtbStatus atb_cache_median(const AtbCache *cache, double *out);
AtbStatus atb_cache_mean_eval_cost(const AtbCache *cache, double *out);

/* Time budget at which the analytic random-search baseline closes `cutoff`
 * of the median-to-optimum distance. */
AtbStatus atb_compute_budget(const AtbCache *cache, double cutoff,
                             double *out);

/* Runs `repeats` seeded runs of the algorithm ("name[,key=value...]") and
 * returns the aggregate performance score and its 95% confidence
 * half-width. Pass 0 grid_points for the default grid; out pointers may be
 * NULL to skip an output. */
AtbStatus atb_run_score(const AtbCache *cache, const char *algorithm,
                        uint32_t repeats, uint64_t master_seed, double cutoff,
                        uint32_t grid_points, double *out_score,
                        double *out_ci_half_width);

#ifdef __cplusplus
}
#endif

#endif /* ATBENCH_H */
