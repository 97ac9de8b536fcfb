#pragma once

/* C interface of the semidecay library.
 *
 * Every function returns an sd_status; on failure the thread-local message
 * from sd_last_error() names the offending argument or field. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_free function. Strings returned by accessors live as long as the handle.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SD_API __declspec(dllexport)
#else
#define SD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sd_status {
  SD_OK = 0,
  SD_ERR_INVALID_ARGUMENT = 1,
  SD_ERR_DIMENSION_MISMATCH = 2,
  SD_ERR_DOMAIN = 3,
  SD_ERR_HYPOTHESIS = 4,
  SD_ERR_UNSUPPORTED = 5,
  SD_ERR_UNBOUNDED_TRUNCATION = 6,
  SD_ERR_DIVERGENCE = 7,
  SD_ERR_PARSE = 8,
  SD_ERR_IO = 9,
  SD_ERR_INTERNAL = 10
} sd_status;

typedef enum sd_verdict {
  SD_VERDICT_PASS = 0,
  SD_VERDICT_ESTIMATE = 1,
  SD_VERDICT_HYPOTHESIS_FAILED = 2
} sd_verdict;

typedef struct sd_operator sd_operator;
typedef struct sd_params sd_params;
typedef struct sd_report sd_report;

SD_API const char* sd_version(void);
/* Message of the last failed call on this thread; "" when none. */
SD_API const char* sd_last_error(void);
SD_API const char* sd_status_name(sd_status status);
/* 0 restores the hardware default. */
SD_API sd_status sd_set_workers(unsigned workers);

/* ---- operators ---- */

/* role: "T", "S", "S1", "S2" or "D" of an operator-spec document. */
SD_API sd_status sd_operator_from_json(const char* json_text, const char* role, sd_operator** out);
SD_API sd_status sd_operator_load(const char* path, const char* role, sd_operator** out);
/* Row-major rows x cols matrix; imag may be NULL. */
SD_API sd_status sd_operator_dense(const double* real, const double* imag, size_t rows, size_t cols,
                                   sd_operator** out);
/* Symbol strings as in operator specs ("one_minus_inv_j", "inv_j_pow:0.5", ...);
 * space_exponent 0 means the sup norm (c_0). */
SD_API sd_status sd_operator_diagonal(const char* symbol, double space_exponent, sd_operator** out);
SD_API void sd_operator_free(sd_operator* op);

/* Length of describe text including the terminator goes to *needed; the text
 * is copied when capacity allows. */
SD_API sd_status sd_operator_describe(const sd_operator* op, char* buffer, size_t capacity, size_t* needed);
SD_API sd_status sd_operator_norm(const sd_operator* op, double* value, double* error);
/* ||left T^n right||; left and right may be NULL. */
SD_API sd_status sd_power_norm(const sd_operator* T, const sd_operator* left, const sd_operator* right, long long n,
                               double* value);
/* ||left R(lambda,T)^k right||; left and right may be NULL. */
SD_API sd_status sd_resolvent_norm(const sd_operator* T, const sd_operator* left, const sd_operator* right,
                                   double lambda_re, double lambda_im, int k, double* value);
/* y = op x on n complex entries given as separate real and imaginary arrays. */
SD_API sd_status sd_operator_apply(const sd_operator* op, const double* x_re, const double* x_im, size_t n,
                                   double* y_re, double* y_im);

/* ---- analyses ---- */

SD_API sd_status sd_params_create(sd_params** out);
/* Keys are the CLI flag names without dashes ("op", "k", "alpha", "n-max", ...). */
SD_API sd_status sd_params_set(sd_params* params, const char* key, const char* value);
SD_API void sd_params_free(sd_params* params);

/* Number of subcommands and the name at an index. */
SD_API size_t sd_command_count(void);
SD_API const char* sd_command_name(size_t index);

/* Runs one analysis. A failed hypothesis is a report with verdict
 * SD_VERDICT_HYPOTHESIS_FAILED, not an error status. */
SD_API sd_status sd_run(const char* command, const sd_params* params, sd_report** out);
SD_API sd_verdict sd_report_verdict(const sd_report* report);
SD_API const char* sd_report_label(const sd_report* report);
/* Report body without the header. */
SD_API const char* sd_report_json(const sd_report* report);
SD_API const char* sd_report_profile_csv(const sd_report* report);
/* "" when the command emits no plot data. */
SD_API const char* sd_report_plotdata_csv(const sd_report* report);
/* report.json, profile.csv and plotdata.csv; timestamp NULL means now. */
SD_API sd_status sd_report_write(const sd_report* report, const char* directory, const char* timestamp);
SD_API void sd_report_free(sd_report* report);

#ifdef __cplusplus
}
#endif
