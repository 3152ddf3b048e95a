#ifndef EFFMED_EFFMED_H
#define EFFMED_EFFMED_H

/* C interface to the effmed library. Every call returns an effmed_status;
 * on failure the message is available from effmed_last_error() on the same
 * thread. Strings returned through char** are owned by the caller and
 * released with effmed_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(EFFMED_BUILDING)
#define EFFMED_API __attribute__((visibility("default")))
#else
#define EFFMED_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum effmed_status {
  EFFMED_OK = 0,
  EFFMED_ERR_INVALID_ARGUMENT = 1,
  EFFMED_ERR_DOMAIN = 2,
  EFFMED_ERR_SINGULAR = 3,
  EFFMED_ERR_NOT_CONVERGED = 4,
  EFFMED_ERR_SATURATED = 5,
  EFFMED_ERR_IO = 6,
  EFFMED_ERR_INTERNAL = 7
} effmed_status;

typedef struct effmed_scenario effmed_scenario;
typedef struct effmed_config effmed_config;
typedef struct effmed_micro effmed_micro;
typedef struct effmed_field effmed_field;
typedef struct effmed_report effmed_report;

EFFMED_API const char* effmed_version(void);
EFFMED_API const char* effmed_status_name(effmed_status s);
/* Message of the last failed call on this thread; "" after a success. */
EFFMED_API const char* effmed_last_error(void);
EFFMED_API void effmed_string_free(char* s);
/* OpenMP thread count for subsequent calls; k <= 0 keeps the default. */
EFFMED_API effmed_status effmed_set_threads(int k);

/* Scenarios */
EFFMED_API effmed_status effmed_scenario_load(const char* path, effmed_scenario** out);
EFFMED_API effmed_status effmed_scenario_parse(const char* json, effmed_scenario** out);
EFFMED_API effmed_status effmed_scenario_to_json(const effmed_scenario* s, char** out);
EFFMED_API effmed_status effmed_scenario_set_seed(effmed_scenario* s, uint64_t seed);
EFFMED_API size_t effmed_scenario_sweep_count(const effmed_scenario* s);
EFFMED_API size_t effmed_scenario_sweep_value(const effmed_scenario* s, size_t k);
EFFMED_API int effmed_scenario_replicates(const effmed_scenario* s);
/* Paths from the scenario's "output" block; "" when unset. */
EFFMED_API const char* effmed_scenario_csv_path(const effmed_scenario* s);
EFFMED_API const char* effmed_scenario_report_path(const effmed_scenario* s);
EFFMED_API void effmed_scenario_free(effmed_scenario* s);

/* Configurations */
EFFMED_API effmed_status effmed_config_generate(const effmed_scenario* s, size_t n, int replicate, effmed_config** out);
EFFMED_API effmed_status effmed_config_parse(const char* json, effmed_config** out);
EFFMED_API effmed_status effmed_config_to_json(const effmed_config* c, char** out);
EFFMED_API size_t effmed_config_count(const effmed_config* c);
EFFMED_API double effmed_config_radius(const effmed_config* c);
/* Writes 3 * count doubles. */
EFFMED_API effmed_status effmed_config_centers(const effmed_config* c, double* xyz);
EFFMED_API void effmed_config_free(effmed_config* c);

/* Separation hypotheses. density_json is a density record or one of the
 * names "unit_cube", "unit_ball". */
EFFMED_API effmed_status effmed_hypothesis_report(const effmed_config* c, const char* density_json, double c1, char** out_json);

/* Perforated-domain solve with the scenario's problem, source and options. */
EFFMED_API effmed_status effmed_micro_solve(const effmed_scenario* s, const effmed_config* c, effmed_micro** out);
EFFMED_API effmed_status effmed_micro_to_json(const effmed_micro* m, char** out);
/* 1 for scalar problems, 3 for Stokes. */
EFFMED_API int effmed_micro_components(const effmed_micro* m);
/* points: 3 * count doubles; values: components * count doubles. */
EFFMED_API effmed_status effmed_micro_evaluate(const effmed_micro* m, size_t count, const double* points, double* values);
EFFMED_API void effmed_micro_free(effmed_micro* m);

/* Effective (homogenized) solution for the scenario. */
EFFMED_API effmed_status effmed_field_solve(const effmed_scenario* s, effmed_field** out);
EFFMED_API effmed_status effmed_field_parse(const char* json, effmed_field** out);
EFFMED_API effmed_status effmed_field_to_json(const effmed_field* f, char** out);
EFFMED_API int effmed_field_components(const effmed_field* f);
EFFMED_API effmed_status effmed_field_evaluate(const effmed_field* f, size_t count, const double* points, double* values);
EFFMED_API void effmed_field_free(effmed_field* f);

/* Convergence sweeps. Stage failures are recorded in the report. */
EFFMED_API effmed_status effmed_converge(const effmed_scenario* s, effmed_report** out);
EFFMED_API effmed_status effmed_report_csv(const effmed_report* r, char** out);
EFFMED_API effmed_status effmed_report_to_json(const effmed_report* r, char** out);
/* 1 when any row failed. */
EFFMED_API int effmed_report_partial(const effmed_report* r);
EFFMED_API void effmed_report_free(effmed_report* r);

/* Kernel-sum benchmark as CSV. direct_cutoff = 0 and repeats = 0 pick defaults. */
EFFMED_API effmed_status effmed_bench(const size_t* ns, size_t n_count, const double* thetas, size_t theta_count,
                                      size_t direct_cutoff, int repeats, uint64_t seed, char** csv);

#ifdef __cplusplus
}
#endif

#endif
