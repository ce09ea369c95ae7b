/* Minimal C consumer: configure a small run, execute it, print the summary.
 *
 * Build (after `cargo build --release -p subcdm-ffi`):
 *   cc demo.c -I../include ../../../target/release/libsubcdm_ffi.a \
 *      -lpthread -ldl -lm -o demo
 */
#include <stdio.h>

#include "subcdm.h"

int main(void) {
    SubcdmConfig *cfg = subcdm_config_new();
    if (subcdm_config_set(cfg, "strategy", "distributed") != SUBCDM_STATUS_OK ||
        subcdm_config_set(cfg, "n_robots", "30") != SUBCDM_STATUS_OK ||
        subcdm_config_set(cfg, "arena_side_m", "4.0") != SUBCDM_STATUS_OK ||
        subcdm_config_set(cfg, "max_duration_s", "300") != SUBCDM_STATUS_OK) {
        fprintf(stderr, "config error: %s\n", subcdm_last_error());
        subcdm_config_free(cfg);
        return 1;
    }

    SubcdmSummary *summary = NULL;
    SubcdmStatus status = subcdm_run(cfg, 42, &summary);
    if (status != SUBCDM_STATUS_OK) {
        fprintf(stderr, "run failed (%s): %s\n", subcdm_status_str(status),
                subcdm_last_error());
        subcdm_config_free(cfg);
        return 1;
    }

    printf("converged=%d decision=%d time=%.1fs subset=%.1f correct=%d\n",
           subcdm_summary_converged(summary),
           subcdm_summary_decision(summary),
           subcdm_summary_convergence_time_s(summary),
           subcdm_summary_steady_subset_size(summary),
           subcdm_summary_correct(summary));

    subcdm_summary_free(summary);
    subcdm_config_free(cfg);
    return 0;
}
