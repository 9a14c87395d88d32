/* C interface to the streamemu library. All handles are opaque; every
 * function that can fail returns an se_status and leaves a message for
 * se_last_error() on the calling thread. */
#ifndef STREAMEMU_H
#define STREAMEMU_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(STREAMEMU_BUILDING)
#    define SE_API __declspec(dllexport)
#  else
#    define SE_API __declspec(dllimport)
#  endif
#else
#  define SE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum se_status {
  SE_OK = 0,
  SE_INVALID_ARGUMENT = 1,
  SE_CONTRACT_VIOLATION = 2,
  SE_ITERATION_CAP_EXCEEDED = 3,
  SE_ATOMLESS_DISTRIBUTION = 4,
  SE_TIE_DETECTED = 5,
  SE_INVALID_HORIZON = 6,
  SE_DUPLICATE_SCORE = 7,
  SE_INFEASIBLE_POOL = 8,
  SE_INVALID_REGIME = 9,
  SE_INVALID_SHAPE = 10,
  SE_INCOMPLETE_POOL = 11,
  SE_TOO_LARGE_TO_ENUMERATE = 12,
  SE_INSUFFICIENT_SAMPLES = 13,
  SE_TRIAL_FAILURE = 14,
  SE_CONFIG_ERROR = 15,
  SE_INTERNAL_ERROR = 99
} se_status;

typedef struct se_config se_config;
typedef struct se_report se_report;

SE_API const char* se_version(void);
SE_API const char* se_status_name(se_status status);
/* Message of the last failing call on this thread; "" if none. */
SE_API const char* se_last_error(void);

SE_API se_config* se_config_create(void);
SE_API void se_config_free(se_config* config);
SE_API se_status se_config_set(se_config* config, const char* key, const char* value);
/* key=value lines; '#' starts a comment line. */
SE_API se_status se_config_load_text(se_config* config, const char* text);
SE_API se_status se_config_load_file(se_config* config, const char* path);
/* Resolved value of a key (default when unset). The pointer stays valid
 * until the next call on the same config. */
SE_API se_status se_config_get(se_config* config, const char* key, const char** value);

/* Commands: equiv-test, iter-bench, secretary-table, lowerbound-demo.
 * On SE_OK *report owns the CSV text. */
SE_API se_status se_run(const char* command, const se_config* config, se_report** report);
SE_API const char* se_report_text(const se_report* report);
SE_API size_t se_report_length(const se_report* report);
/* 1 if any row of the report has status FAIL. */
SE_API int se_report_failed(const se_report* report);
SE_API void se_report_free(se_report* report);

SE_API se_status se_secretary_threshold(uint64_t n, uint64_t* threshold);
SE_API se_status se_secretary_success_probability(uint64_t n, double* probability);

#ifdef __cplusplus
}
#endif

#endif
