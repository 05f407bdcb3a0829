/*
 * Copyright 2026 The sigdyn Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/*
 * C interface to the sigdyn library.
 *
 * Every function returns a sigdyn_status. On failure a description of the
 * most recent error on the calling thread is available from
 * sigdyn_last_error() until the next call on that thread. Status values
 * match the exit codes of the command-line tool.
 *
 * Scenario handles are opaque, immutable after load apart from the explicit
 * setters, and may be shared between threads for read-only calls.
 */

#ifndef SIGDYN_SIGDYN_H
#define SIGDYN_SIGDYN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SIGDYN_BUILDING_LIBRARY)
#    define SIGDYN_API __declspec(dllexport)
#  else
#    define SIGDYN_API __declspec(dllimport)
#  endif
#else
#  define SIGDYN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sigdyn_status {
  SIGDYN_OK = 0,
  SIGDYN_ERROR_VALIDATION = 1,
  SIGDYN_ERROR_RUNTIME = 2,
  SIGDYN_ERROR_CAPACITY = 3
} sigdyn_status;

typedef enum sigdyn_metric {
  SIGDYN_METRIC_SUBSTITUTION = 0,
  SIGDYN_METRIC_WASSERSTEIN = 1
} sigdyn_metric;

typedef struct sigdyn_scenario sigdyn_scenario;

SIGDYN_API const char* sigdyn_version(void);
SIGDYN_API const char* sigdyn_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
SIGDYN_API void sigdyn_string_free(char* s);

SIGDYN_API sigdyn_status sigdyn_scenario_load(const char* path, sigdyn_scenario** out);
/* base_dir resolves relative matrix paths; may be NULL. */
SIGDYN_API sigdyn_status sigdyn_scenario_parse(const char* json_text, const char* base_dir,
                                               sigdyn_scenario** out);
SIGDYN_API void sigdyn_scenario_free(sigdyn_scenario* scenario);

SIGDYN_API sigdyn_status sigdyn_scenario_set_seed(sigdyn_scenario* scenario, uint64_t seed);
SIGDYN_API sigdyn_status sigdyn_scenario_set_threads(sigdyn_scenario* scenario, unsigned threads);
SIGDYN_API sigdyn_status sigdyn_scenario_set_paths(sigdyn_scenario* scenario, uint64_t paths);

/* Number of populations K; writes the lexicographic index to csv_path when
 * it is not NULL. */
SIGDYN_API sigdyn_status sigdyn_enumerate(const sigdyn_scenario* scenario, const char* csv_path,
                                          uint64_t* states);

/* Writes the transition matrix (binary when out_path ends in ".bin", CSV
 * otherwise) and "<out_path>.json". distance_computations may be NULL. */
SIGDYN_API sigdyn_status sigdyn_build_matrix(const sigdyn_scenario* scenario, const char* out_path,
                                             uint64_t* states, uint64_t* distance_computations);

/* Contractivity report as JSON text. */
SIGDYN_API sigdyn_status sigdyn_certify(const sigdyn_scenario* scenario, char** report_json);

/* Runs the ensemble and writes its files into out_dir. summary_json may be
 * NULL. */
SIGDYN_API sigdyn_status sigdyn_simulate(const sigdyn_scenario* scenario, const char* out_dir,
                                         uint64_t dump_trajectories, char** summary_json);

SIGDYN_API sigdyn_status sigdyn_optimum(const sigdyn_scenario* scenario, double resolution,
                                        double* fraction, double* value);

/* Earth Mover's Distance between two integer histograms over the policy
 * weights `omegas` (sorted, in [0,1]). */
SIGDYN_API sigdyn_status sigdyn_emd(const int64_t* eta, const int64_t* gamma, const double* omegas,
                                    size_t policies, sigdyn_metric metric, double* distance);

#ifdef __cplusplus
}
#endif

#endif /* SIGDYN_SIGDYN_H */
