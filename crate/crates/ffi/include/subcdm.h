/* C interface for the subcdm swarm decision-making simulator. */

#ifndef SUBCDM_H
#define SUBCDM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SubcdmStatus {
  SUBCDM_STATUS_OK = 0,
  SUBCDM_STATUS_NULL_POINTER = 1,
  SUBCDM_STATUS_INVALID_UTF8 = 2,
  SUBCDM_STATUS_INVALID_CONFIG = 3,
  SUBCDM_STATUS_RUN_FAILED = 4,
} SubcdmStatus;

/**
 * Opaque simulation configuration.
 */
typedef struct SubcdmConfig SubcdmConfig;

/**
 * Opaque end-of-run summary.
 */
typedef struct SubcdmSummary SubcdmSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message text of the last error on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *subcdm_last_error(void);

/**
 * Static description of a status code.
 */
const char *subcdm_status_str(enum SubcdmStatus status);

/**
 * Library version string.
 */
const char *subcdm_version(void);

/**
 * New configuration with the published experimental defaults. Free with
 * `subcdm_config_free`.
 */
struct SubcdmConfig *subcdm_config_new(void);

/**
 * # Safety
 * `cfg` must be a pointer from `subcdm_config_new`, not yet freed.
 */
void subcdm_config_free(struct SubcdmConfig *cfg);

/**
 * Sets one configuration field by its TOML key, e.g.
 * `subcdm_config_set(cfg, "strategy", "distributed")` or
 * `subcdm_config_set(cfg, "black_fraction", "0.40")`.
 *
 * # Safety
 * `cfg` must be a live config handle; `key` and `value` must be
 * NUL-terminated strings.
 */
enum SubcdmStatus subcdm_config_set(struct SubcdmConfig *cfg, const char *key, const char *value);

/**
 * Runs one simulation with the given seed. On success `*out` owns a summary
 * handle; free it with `subcdm_summary_free`.
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a valid pointer slot.
 */
enum SubcdmStatus subcdm_run(const struct SubcdmConfig *cfg,
                             uint64_t seed,
                             struct SubcdmSummary **out);

/**
 * # Safety
 * `summary` must be a pointer from `subcdm_run`, not yet freed.
 */
void subcdm_summary_free(struct SubcdmSummary *summary);

/**
 * Whether the swarm converged: 1 yes, 0 no, -1 on a null handle.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
int subcdm_summary_converged(const struct SubcdmSummary *summary);

/**
 * The decision: 0 black, 1 white, -1 undecided.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
int subcdm_summary_decision(const struct SubcdmSummary *summary);

/**
 * Seconds until the convergence hold completed; NaN if it never did.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
double subcdm_summary_convergence_time_s(const struct SubcdmSummary *summary);

/**
 * Median decision-maker count over the trailing steady window.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
double subcdm_summary_steady_subset_size(const struct SubcdmSummary *summary);

/**
 * Spatial autocorrelation of the dwell-time field; NaN when undefined.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
double subcdm_summary_morans_i(const struct SubcdmSummary *summary);

/**
 * Accuracy outcome: 1 correct, 0 incorrect, -1 undecided.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
int subcdm_summary_correct(const struct SubcdmSummary *summary);

/**
 * Ticks executed before the run ended.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
uint64_t subcdm_summary_ticks(const struct SubcdmSummary *summary);

/**
 * Total messages queued by all robots.
 *
 * # Safety
 * `summary` must be a live summary handle or null.
 */
uint64_t subcdm_summary_messages_sent(const struct SubcdmSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBCDM_H */
