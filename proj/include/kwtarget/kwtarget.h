#ifndef KWTARGET_KWTARGET_H_
#define KWTARGET_KWTARGET_H_

/*
 * C interface to the keyword targeting library.
 *
 * Every function returns a kwt_status. On failure, kwt_last_error() returns
 * a JSON object {"error": {"code": ..., "message": ..., ...}} describing the
 * most recent failure on the calling thread. Strings returned through char**
 * out-parameters are owned by the caller and released with kwt_string_free.
 * Configurations and results cross the boundary as JSON text.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KWT_API __declspec(dllexport)
#else
#define KWT_API __attribute__((visibility("default")))
#endif

typedef enum kwt_status {
  KWT_OK = 0,
  KWT_NOT_POSITIVE_DEFINITE = 1,
  KWT_INVALID_DOF = 2,
  KWT_EMPTY_COMPLEMENT = 3,
  KWT_OUT_OF_RANGE = 4,
  KWT_NEGATIVE_INPUT = 5,
  KWT_DIVERGENT_CHAIN = 6,
  KWT_EMPTY_AD_GROUP = 7,
  KWT_MISSING_POSTERIOR = 8,
  KWT_INSUFFICIENT_SCENARIOS = 9,
  KWT_INFEASIBLE = 10,
  KWT_NO_FEASIBLE_SOLUTION = 11,
  KWT_TOO_LARGE = 12,
  KWT_PARSE_ERROR = 13,
  KWT_VALIDATION_ERROR = 14,
  KWT_EMPTY_DATASET = 15,
  KWT_INVALID_ARGUMENT = 16,
  KWT_IO = 17,
  KWT_INTERNAL = 18
} kwt_status;

typedef struct kwt_dataset kwt_dataset;
typedef struct kwt_posterior kwt_posterior;

KWT_API const char* kwt_version(void);
KWT_API const char* kwt_status_name(kwt_status status);
/* Nonzero when the status stems from bad input rather than a runtime fault. */
KWT_API int kwt_status_is_validation(kwt_status status);
KWT_API const char* kwt_last_error(void);
KWT_API void kwt_string_free(char* s);

/* Datasets in the comma-separated performance-log format. */
KWT_API kwt_status kwt_dataset_load(const char* path, kwt_dataset** out);
KWT_API kwt_status kwt_dataset_parse(const char* text, kwt_dataset** out);
KWT_API kwt_status kwt_dataset_save(const kwt_dataset* ds, const char* path);
KWT_API kwt_status kwt_dataset_serialize(const kwt_dataset* ds, char** out);
KWT_API kwt_status kwt_dataset_summary(const kwt_dataset* ds, char** out_json);
KWT_API size_t kwt_dataset_record_count(const kwt_dataset* ds);
KWT_API void kwt_dataset_free(kwt_dataset* ds);

/* Seeded synthetic campaign; spec_json may be NULL for defaults. The ground
 * truth (per ad-group means and covariances) is returned as JSON. */
KWT_API kwt_status kwt_synthesize(const char* spec_json, kwt_dataset** out,
                                  char** out_truth_json);

/* Gibbs estimation of every ad-group. config_json keys: iterations, burn_in,
 * thinning, seed, epsilon, threads. */
KWT_API kwt_status kwt_estimate(const kwt_dataset* ds, const char* config_json,
                                kwt_posterior** out);
KWT_API kwt_status kwt_posterior_save(const kwt_posterior* post, const char* path);
KWT_API kwt_status kwt_posterior_serialize(const kwt_posterior* post, char** out);
/* The dataset the posterior was estimated from is needed to rebuild each
 * ad-group's keyword rows. */
KWT_API kwt_status kwt_posterior_load(const char* path, const kwt_dataset* ds,
                                      kwt_posterior** out);
KWT_API size_t kwt_posterior_adgroup_count(const kwt_posterior* post);
KWT_API void kwt_posterior_free(kwt_posterior* post);

/* Runs the configured strategies over the budget sweep. config_json keys:
 * budgets, alpha, t, eval_t, seed, node_limit, bound_tolerance, tau,
 * strategies. Returns a JSON array of reports. */
KWT_API kwt_status kwt_run(const kwt_dataset* ds, const kwt_posterior* post,
                           const char* config_json, char** out_reports_json);

/* Collates a JSON array of reports into figure-style CSV tables, returned as
 * a JSON object mapping file name to content. */
KWT_API kwt_status kwt_report_collate(const char* reports_json, char** out_tables_json);

/* File name under which a single report JSON object is stored. */
KWT_API kwt_status kwt_report_file_name(const char* report_json, char** out_name);

/* Solver-versus-exhaustive-search comparison on small random instances.
 * config_json keys: instances, min_keywords, max_keywords, t, alpha, seed. */
KWT_API kwt_status kwt_oracle(const char* config_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif  /* KWTARGET_KWTARGET_H_ */
