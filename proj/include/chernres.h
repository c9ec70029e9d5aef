/* C interface of the chernres library: scenarios in, JSON/CSV reports out.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * _free function. Strings returned by accessors stay valid until the handle
 * they came from is freed. On failure a function returns a nonzero status and
 * chernres_last_error() describes the problem for the calling thread. */
#ifndef CHERNRES_H
#define CHERNRES_H

#include <stddef.h>

#if defined(CHERNRES_BUILDING_LIBRARY)
#define CHERNRES_API __attribute__((visibility("default")))
#else
#define CHERNRES_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chernres_status {
  CHERNRES_OK = 0,
  CHERNRES_INVALID_ARGUMENT = 1, /* null pointer, unknown suite, bad option */
  CHERNRES_INVALID_SCENARIO = 2, /* syntax, unknown keys, constraint violations */
  CHERNRES_IO = 3,               /* file could not be read or written */
  CHERNRES_NUMERICAL = 4,        /* singular point, order exhaustion, ... */
  CHERNRES_INTERNAL = 5
} chernres_status;

typedef struct chernres_scenario chernres_scenario;
typedef struct chernres_report chernres_report;

typedef struct chernres_run_options {
  unsigned seed;          /* sampling seed of the verification suites */
  int threads;            /* 0: CHERNRES_THREADS or all cores */
  double tolerance_scale; /* multiplies every tolerance */
  const double* ladder;   /* epsilon ladder override, decreasing; NULL keeps the scenario's */
  size_t ladder_len;
  const char* cutoff;     /* "exp" or "log"; NULL keeps the scenario's */
} chernres_run_options;

CHERNRES_API const char* chernres_version(void);
CHERNRES_API const char* chernres_last_error(void);
CHERNRES_API void chernres_run_options_init(chernres_run_options* opt);

CHERNRES_API chernres_status chernres_scenario_load(const char* path, chernres_scenario** out);
CHERNRES_API chernres_status chernres_scenario_parse(const char* text, chernres_scenario** out);
CHERNRES_API void chernres_scenario_free(chernres_scenario* s);
CHERNRES_API const char* chernres_scenario_name(const chernres_scenario* s);
CHERNRES_API int chernres_scenario_dim(const chernres_scenario* s);
/* Normalized scenario document with defaults filled in. */
CHERNRES_API const char* chernres_scenario_canonical(const chernres_scenario* s);

CHERNRES_API chernres_status chernres_run(const chernres_scenario* s, const chernres_run_options* opt, chernres_report** out);
/* suite: algebra, cech, connections, vanishing, transgression or all. */
CHERNRES_API chernres_status chernres_verify(const chernres_scenario* s, const char* suite, const chernres_run_options* opt,
                                             chernres_report** out);
CHERNRES_API chernres_status chernres_oracle(const chernres_scenario* s, const chernres_run_options* opt, chernres_report** out);

CHERNRES_API void chernres_report_free(chernres_report* r);
CHERNRES_API const char* chernres_report_json(const chernres_report* r);
/* Ladders as CSV; only run reports have rows. */
CHERNRES_API const char* chernres_report_csv(const chernres_report* r);
/* 1 when every check passed, 0 otherwise. */
CHERNRES_API int chernres_report_passed(const chernres_report* r);
/* Writes report.json and ladders.csv into dir, creating it if needed. */
CHERNRES_API chernres_status chernres_report_write(const chernres_report* r, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
