#ifndef WSN_SCHED_H
#define WSN_SCHED_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Scheduling algorithm selector.
typedef enum WsnAlgorithm {
  WSN_ALG_GABAS = 0,
  WSN_ALG_LMPF = 1,
  WSN_ALG_LMSF = 2,
  WSN_ALG_LTSF = 3,
  WSN_ALG_FCFS = 4,
  WSN_ALG_SJF = 5,
} WsnAlgorithm;

// Demand aggregation mode for multiply requested points.
typedef enum WsnMode {
  WSN_MODE_SHARED = 0,
  WSN_MODE_UNSHARED = 1,
} WsnMode;

// Status code returned by every fallible function.
typedef enum WsnStatus {
  WSN_OK = 0,
  WSN_ERR_NULL_ARGUMENT = 1,
  WSN_ERR_INVALID_UTF8 = 2,
  WSN_ERR_PARSE = 3,
  WSN_ERR_GENERATION = 4,
  WSN_ERR_INVALID_ARGUMENT = 5,
  WSN_ERR_RUN = 6,
  WSN_ERR_INTERNAL = 7,
} WsnStatus;

// Opaque topology handle.
typedef struct WsnTopology WsnTopology;

// Opaque workload handle.
typedef struct WsnWorkload WsnWorkload;

// Per-run metrics, filled by `wsn_run`.
typedef struct WsnMetrics {
  uint64_t makespan;
  double avg_waiting;
  double avg_turnaround;
  double success_rate;
  uint64_t rejected_count;
} WsnMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread. Caller frees with
// `wsn_string_free`. Null when no error has been recorded.
char *wsn_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer previously returned by this library and
// not yet freed.
void wsn_string_free(char *s);

// Generates a topology with the default capacity constants.
//
// # Safety
// `out` must be a valid pointer to write a handle to.
enum WsnStatus wsn_topology_generate(int64_t width,
                                     int64_t height,
                                     uintptr_t points,
                                     uintptr_t sensors,
                                     uintptr_t bases,
                                     uint64_t seed,
                                     struct WsnTopology **out);

// Parses a topology from its JSON form.
//
// # Safety
// `json` must be a valid C string; `out` must be valid for writes.
enum WsnStatus wsn_topology_from_json(const char *json, struct WsnTopology **out);

// Serializes a topology to JSON. Caller frees with `wsn_string_free`.
//
// # Safety
// `topology` must be a live handle.
char *wsn_topology_to_json(const struct WsnTopology *topology);

// Releases a topology handle.
//
// # Safety
// `topology` must be null or a live handle; it is invalid afterwards.
void wsn_topology_free(struct WsnTopology *topology);

// Generates a workload against a topology with default rate tables.
//
// # Safety
// `topology` must be a live handle; `out` must be valid for writes.
enum WsnStatus wsn_workload_generate(const struct WsnTopology *topology,
                                     uintptr_t app_count,
                                     uint32_t batch_count,
                                     uint64_t seed,
                                     struct WsnWorkload **out);

// Parses a workload from its JSON form.
//
// # Safety
// `json` must be a valid C string; `out` must be valid for writes.
enum WsnStatus wsn_workload_from_json(const char *json, struct WsnWorkload **out);

// Serializes a workload to JSON. Caller frees with `wsn_string_free`.
//
// # Safety
// `workload` must be a live handle.
char *wsn_workload_to_json(const struct WsnWorkload *workload);

// Releases a workload handle.
//
// # Safety
// `workload` must be null or a live handle; it is invalid afterwards.
void wsn_workload_free(struct WsnWorkload *workload);

// Builds a schedule with the chosen algorithm and simulates it. `seed`
// drives the genetic algorithm; the ordering policies ignore it.
//
// # Safety
// `topology` and `workload` must be live handles; `metrics` must be valid
// for writes.
enum WsnStatus wsn_run(const struct WsnTopology *topology,
                       const struct WsnWorkload *workload,
                       enum WsnAlgorithm algorithm,
                       enum WsnMode mode,
                       uint64_t seed,
                       struct WsnMetrics *metrics);

// Exact multiway number partitioning: minimal largest partition sum of
// `numbers` split into `k` parts.
//
// # Safety
// `numbers` must point to `count` readable values; `out` must be valid
// for writes.
enum WsnStatus wsn_mnp_optimal(const uint64_t *numbers,
                               uintptr_t count,
                               uintptr_t k,
                               uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSN_SCHED_H */
