/* qaforge C API: opaque handles + error codes over the batch QA-synthesis
 * pipeline. All returned strings are heap-allocated JSON; release them with
 * qaforge_string_free. Thread safety: one qaforge_ctx per thread. */
#ifndef QAFORGE_H
#define QAFORGE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qaforge_status {
    QAFORGE_OK = 0,
    QAFORGE_ERR_INVALID_ARG = 1,
    QAFORGE_ERR_CONFIG = 2,
    QAFORGE_ERR_IO = 3,
    QAFORGE_ERR_BACKEND = 4,
    QAFORGE_ERR_STAGE_FAILED = 5,
    QAFORGE_ERR_CONFIG_DRIFT = 6,
    QAFORGE_ERR_INTERNAL = 7
} qaforge_status;

typedef struct qaforge_ctx qaforge_ctx;

/* Library version, static storage; do not free. */
const char* qaforge_version(void);

/* Last error message on the calling thread, static storage; do not free. */
const char* qaforge_last_error(void);

/* Validates config_json without side effects. On success *out_normalized
 * (optional) receives the normalized config; on QAFORGE_ERR_CONFIG it
 * receives a JSON array of per-key error messages. */
qaforge_status qaforge_validate_config(const char* config_json, char** out_normalized);

/* Creates a pipeline context from a config; NULL on failure (see
 * qaforge_last_error). mock_seed < 0 keeps the config's backend; >= 0
 * forces the deterministic mock backend with that seed. */
qaforge_ctx* qaforge_ctx_new(const char* config_json, long long mock_seed);

void qaforge_ctx_free(qaforge_ctx* ctx);

/* Run id of the context's pipeline (free with qaforge_string_free). */
char* qaforge_run_id(qaforge_ctx* ctx);

/* Executes one stage: ingest, decontam, annotate, probe, synth, refine,
 * decontam_post, analyze, blend. *out_summary (optional) receives the
 * stage summary JSON. */
qaforge_status qaforge_run_stage(qaforge_ctx* ctx, const char* stage, char** out_summary);

/* Executes all remaining stages in order, skipping completed ones.
 * *out_summary (optional) receives {stage: summary}. */
qaforge_status qaforge_run_pipeline(qaforge_ctx* ctx, char** out_summary);

/* Resolved execution plan without running anything. */
qaforge_status qaforge_dry_run(qaforge_ctx* ctx, char** out_plan);

void qaforge_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QAFORGE_H */
