#ifndef THETADIM_H
#define THETADIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TD_API __declspec(dllexport)
#else
#define TD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum td_status {
  TD_OK = 0,
  TD_ERR_EMPTY_SET = 1,
  TD_ERR_DOMAIN = 2,
  TD_ERR_RANGE = 3,
  TD_ERR_RESOLUTION = 4,
  TD_ERR_CONFIG = 5,
  TD_ERR_OVER_LIMIT = 6,
  TD_ERR_NON_BRACKETED = 7,
  TD_ERR_DEGENERATE_SCALE = 8,
  TD_ERR_NOT_IMPLEMENTED = 9,
  TD_ERR_ZERO_ENERGY = 10,
  TD_ERR_IO = 11,
  TD_ERR_PRECONDITION = 12,
  TD_ERR_INVALID_ARGUMENT = 13,
  TD_ERR_INTERNAL = 99
} td_status;

typedef struct td_set td_set;
typedef struct td_measure td_measure;

TD_API const char* td_version(void);
TD_API const char* td_status_name(td_status status);
/* Message of the last failed call on this thread ("" when none). */
TD_API const char* td_last_error(void);
/* Strings returned through char** out-parameters are owned by the caller. */
TD_API void td_string_free(char* s);

/* Sets. spec_json: {"kind": "cube" | "point" | "pattern" | "sequence" |
   "rotated-sequence" | "sequence-interval" | "file", "d", "depth", "p",
   "pattern", "point", "path", "terms"}. A path of "-" saves to stdout. */
TD_API td_status td_set_generate(const char* spec_json, td_set** out);
TD_API td_status td_set_load(const char* path, td_set** out);
/* indices: count * dim cell indices at `depth`, row-major. */
TD_API td_status td_set_from_leaves(int dim, int depth, const uint64_t* indices, size_t count,
                                    td_set** out);
TD_API td_status td_set_save(const td_set* set, const char* path, const char* comment);
TD_API td_status td_set_truncate(const td_set* set, int depth, td_set** out);
TD_API td_status td_set_info(const td_set* set, int* dim, int* depth, size_t* leaves);
TD_API td_status td_set_level_count(const td_set* set, int level, size_t* count);
TD_API td_status td_set_dyadic_dimension(const td_set* set, double* value);
TD_API void td_set_free(td_set* set);

/* Covering and estimation. options_json (nullable): {"mode": "regression" |
   "liminf" | "limsup", "epsilon", "upper_slack", "s_tolerance",
   "max_iterations", "sensitivity", "jobs"}. An empty schedule (NULL or n = 0)
   selects the default schedule for each theta. */
TD_API td_status td_cover_cost(const td_set* set, double s, double theta, double delta,
                               double* cost, size_t* cover_size);
/* Writes at most `capacity` scales; `count` always receives the full length. */
TD_API td_status td_default_schedule(int dim, int depth, double theta, double* out,
                                     size_t capacity, size_t* count);
TD_API td_status td_estimate(const td_set* set, double theta, const double* schedule,
                             size_t schedule_len, const char* options_json, char** result_json);
TD_API td_status td_sweep(const td_set* set, const double* thetas, size_t theta_count,
                          const double* schedule, size_t schedule_len, const char* options_json,
                          char** result_json);

/* Measures. cap_rule: "rescale" (NULL) or "uniform-reset". report_json
   (nullable) receives the trace summary, the cap/chain audit and the ball
   profile. */
TD_API td_status td_frostman_build(const td_set* set, double t, double alpha, double theta,
                                   double delta, const char* cap_rule, td_measure** out,
                                   char** report_json);
TD_API td_status td_measure_uniform(const td_set* set, td_measure** out);
TD_API td_status td_measure_load(const char* path, td_measure** out);
TD_API td_status td_measure_save(const td_measure* mu, const char* path, const char* comment);
TD_API td_status td_measure_info(const td_measure* mu, int* dim, int* depth, size_t* leaves,
                                 double* total_mass);
TD_API td_status td_measure_coarsen(const td_measure* mu, int level, td_measure** out);
TD_API void td_measure_free(td_measure* mu);

/* Kernels: phi^s_{r,theta} times dist^-weight_m. */
TD_API td_status td_energy(const td_measure* mu, double r, double theta, double s, int weight_m,
                           int jobs, double* value);
TD_API td_status td_capacity_lower_bound(const td_measure* mu, double r, double theta, double s,
                                         int jobs, double* value);

/* Slicing. direction_json: {"kind": "axis", "normal_axis": k, "d": d} |
   {"kind": "line", "angle": a} | {"kind": "sample", "d": d, "seed": s}.
   With offsets == NULL, offset_count generic offsets are used. */
TD_API td_status td_slice_scan(const td_set* set, double theta, const char* direction_json,
                               const double* offsets, size_t offset_count,
                               const double* schedule, size_t schedule_len, double tolerance,
                               const char* options_json, char** result_json);

/* Studies: "cp-calibration", "frostman-audit", "lower-bound". Writes
   report.json and the CSV tables into out_dir when it is not NULL. */
TD_API td_status td_study_run(const char* name, const char* config_json, const char* out_dir,
                              int* passed, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
