/* critbubble C API: experiment runner for weighted critical-exponent
 * variational problems.  All state lives behind opaque handles; every
 * function returns a status code and the last error message is retrievable
 * per thread via cb_last_error(). */
#ifndef CRITBUBBLE_H
#define CRITBUBBLE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cb_status {
    CB_OK = 0,
    CB_ERROR_INVALID_ARGUMENT = 1,
    CB_ERROR_PARSE = 2,
    CB_ERROR_REGIME = 3,   /* quantity undefined in this (n,k) regime */
    CB_ERROR_NUMERIC = 4,
    CB_ERROR_IO = 5,
    CB_ERROR_INTERNAL = 6
} cb_status;

typedef struct cb_config cb_config;   /* parsed key=value experiment config */
typedef struct cb_result cb_result;   /* finished run: JSON payload (+ CSV) */

const char* cb_version(void);
const char* cb_status_name(cb_status status);

/* thread-local message for the most recent failure */
const char* cb_last_error(void);

/* configs ------------------------------------------------------------- */
cb_status cb_config_create(cb_config** out);
cb_status cb_config_parse_text(const char* text, cb_config** out);
cb_status cb_config_parse_file(const char* path, cb_config** out);
cb_status cb_config_set(cb_config* cfg, const char* key, const char* value);
/* returns NULL when the key is unset; pointer lives as long as the config */
const char* cb_config_get(const cb_config* cfg, const char* key);
void cb_config_free(cb_config* cfg);

/* runs ----------------------------------------------------------------- */
cb_status cb_run(const cb_config* cfg, cb_result** out);
/* deterministic result payload (no timestamps) */
const char* cb_result_json(const cb_result* result);
/* CSV payload for tabular experiments, NULL otherwise */
const char* cb_result_csv(const cb_result* result);
/* full run record as stored in the cache (timestamps, version) */
const char* cb_result_record_json(const cb_result* result);
int cb_result_from_cache(const cb_result* result);
void cb_result_free(cb_result* result);

/* threshold bisection over lambda; predicate is "slope-sign" or "achieved" */
cb_status cb_bisect_threshold(const cb_config* cfg, double lambda_lo,
                              double lambda_hi, const char* predicate,
                              double* out_lambda);

#ifdef __cplusplus
}
#endif

#endif /* CRITBUBBLE_H */
