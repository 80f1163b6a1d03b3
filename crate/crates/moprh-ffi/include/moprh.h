/* C interface to the moprh verification library.
 * Generated by cbindgen; do not edit by hand. */

#ifndef MOPRH_H
#define MOPRH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Error codes returned by every fallible entry point.
 */
typedef enum MoprhStatus {
  MoprhStatus_Ok = 0,
  /**
   * null pointer, non-UTF-8 string, or index out of range
   */
  MoprhStatus_InvalidArgument = 1,
  /**
   * config rejected (unknown fields, bad dimensions, unknown preset, ...)
   */
  MoprhStatus_Config = 2,
  /**
   * the numerical run itself failed (regularity, decay, singular pivot, ...)
   */
  MoprhStatus_Compute = 3,
  /**
   * writing report files failed
   */
  MoprhStatus_Io = 4,
  /**
   * internal panic caught at the boundary
   */
  MoprhStatus_Internal = 5,
} MoprhStatus;

/**
 * Opaque run result: the report plus the config it was produced from.
 */
typedef struct MoprhReport MoprhReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run the verification suites for a JSON experiment config.
 * On success `*out` owns the report; release it with `moprh_report_free`.
 */
enum MoprhStatus moprh_run_json(const char *config_json, int jobs, struct MoprhReport **out);

/**
 * Run a builtin preset (see `moprh_preset_config_json` for the config it expands to).
 */
enum MoprhStatus moprh_run_preset(const char *name, int jobs, struct MoprhReport **out);

/**
 * Expand a builtin preset into its JSON config (caller frees with `moprh_string_free`).
 */
enum MoprhStatus moprh_preset_config_json(const char *name, char **out);

/**
 * 1 if every gating identity passed, 0 otherwise, -1 on a null handle.
 */
int moprh_report_all_pass(const struct MoprhReport *report);

/**
 * Number of identity records in the report (0 on a null handle).
 */
uintptr_t moprh_report_record_count(const struct MoprhReport *report);

/**
 * Residual and pass flag of record `index`; either out-pointer may be null.
 */
enum MoprhStatus moprh_report_record(const struct MoprhReport *report,
                                     uintptr_t index,
                                     double *residual,
                                     int *pass);

/**
 * Full report as JSON (caller frees with `moprh_string_free`).
 */
enum MoprhStatus moprh_report_to_json(const struct MoprhReport *report, char **out);

/**
 * Write report.json plus the CSV tables into `dir` (created if missing).
 */
enum MoprhStatus moprh_report_write_files(const struct MoprhReport *report, const char *dir);

/**
 * Release a report handle. Null is a no-op.
 */
void moprh_report_free(struct MoprhReport *report);

/**
 * Release a string returned by this library. Null is a no-op.
 */
void moprh_string_free(char *s);

/**
 * Static library version string; do not free.
 */
const char *moprh_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MOPRH_H */
