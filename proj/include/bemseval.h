/* C interface to the bemseval library.
 *
 * Every function returns a bemseval_status. On failure the message of the
 * most recent error on the calling thread is available from
 * bemseval_last_error(). Handles are opaque and must be released with their
 * matching close function. Strings returned by the library stay valid until
 * the owning handle is closed or the next call on the same handle.
 */
#ifndef BEMSEVAL_H
#define BEMSEVAL_H

#include <stddef.h>

#if defined(_WIN32)
#define BEMSEVAL_API __declspec(dllexport)
#else
#define BEMSEVAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bemseval_status {
  BEMSEVAL_OK = 0,
  BEMSEVAL_E_INVALID_ARGUMENT = 1,
  BEMSEVAL_E_CONFIG = 2,
  BEMSEVAL_E_IO = 3,
  BEMSEVAL_E_PARSE = 4,
  BEMSEVAL_E_ORDERING = 5,
  BEMSEVAL_E_CADENCE = 6,
  BEMSEVAL_E_SCHEMA = 7,
  BEMSEVAL_E_CONFLICT = 8,
  BEMSEVAL_E_PRECONDITION = 9,
  BEMSEVAL_E_DOMAIN = 10,
  BEMSEVAL_E_COVERAGE = 11,
  BEMSEVAL_E_INSUFFICIENT_DATA = 12,
  BEMSEVAL_E_INSUFFICIENT_CANDIDATES = 13,
  BEMSEVAL_E_UNDEFINED_RATIO = 14,
  BEMSEVAL_E_FORMAT = 15,
  BEMSEVAL_E_RUBRIC_VIOLATION = 16,
  BEMSEVAL_E_TRANSPORT = 17,
  BEMSEVAL_E_PROTOCOL = 18,
  BEMSEVAL_E_REPLAY_MISS = 19,
  BEMSEVAL_E_REVIEW_LOCK = 20,
  BEMSEVAL_E_INTERNAL = 99
} bemseval_status;

typedef enum bemseval_stage {
  BEMSEVAL_STAGE_POTENTIAL = 0,
  BEMSEVAL_STAGE_ANALYZE = 1,
  BEMSEVAL_STAGE_STATS = 2,
  BEMSEVAL_STAGE_PIPELINE = 3
} bemseval_stage;

typedef enum bemseval_flag_kind {
  BEMSEVAL_FLAG_APPLIANCE = 0,
  BEMSEVAL_FLAG_STRATEGY = 1
} bemseval_flag_kind;

BEMSEVAL_API const char* bemseval_version(void);
BEMSEVAL_API const char* bemseval_status_string(bemseval_status status);
/* Message of the last failure on this thread; "" when none. */
BEMSEVAL_API const char* bemseval_last_error(void);
/* Nonzero when the status stems from bad configuration or input files. */
BEMSEVAL_API int bemseval_status_is_validation(bemseval_status status);

/* ---- pipeline ---------------------------------------------------------- */

typedef struct bemseval_pipeline bemseval_pipeline;

BEMSEVAL_API bemseval_status bemseval_pipeline_open(const char* config_path,
                                                    bemseval_pipeline** out);
BEMSEVAL_API void bemseval_pipeline_close(bemseval_pipeline* p);

BEMSEVAL_API bemseval_status bemseval_pipeline_set_output_dir(bemseval_pipeline* p,
                                                              const char* dir);
/* store may be NULL to disable replay. strict != 0 forbids network access. */
BEMSEVAL_API bemseval_status bemseval_pipeline_set_replay(bemseval_pipeline* p, const char* store,
                                                          int strict);

BEMSEVAL_API bemseval_status bemseval_pipeline_validate(bemseval_pipeline* p, bemseval_stage stage);
/* Validates, then runs. *incomplete (may be NULL) is set to 1 when some
 * judge-derived value could not be obtained and was written as NA. */
BEMSEVAL_API bemseval_status bemseval_pipeline_run(bemseval_pipeline* p, bemseval_stage stage,
                                                   int* incomplete);

/* Warnings and output paths of the most recent run. */
BEMSEVAL_API size_t bemseval_pipeline_warning_count(const bemseval_pipeline* p);
BEMSEVAL_API const char* bemseval_pipeline_warning(const bemseval_pipeline* p, size_t index);
BEMSEVAL_API size_t bemseval_pipeline_output_count(const bemseval_pipeline* p);
BEMSEVAL_API const char* bemseval_pipeline_output(const bemseval_pipeline* p, size_t index);

/* ---- conclusion verdict review ----------------------------------------- */

typedef struct bemseval_verdict bemseval_verdict;

typedef struct bemseval_rates {
  int appliances_matched;
  int strategies_matched;
  double appliance_identification_rate;
  double strategy_alignment_rate;
  double overall_alignment;
} bemseval_rates;

BEMSEVAL_API bemseval_status bemseval_verdict_open(const char* path, bemseval_verdict** out);
BEMSEVAL_API void bemseval_verdict_close(bemseval_verdict* v);

BEMSEVAL_API const char* bemseval_verdict_session(const bemseval_verdict* v);
/* "unreviewed", "confirmed" or "corrected". */
BEMSEVAL_API const char* bemseval_verdict_status(const bemseval_verdict* v);
BEMSEVAL_API int bemseval_verdict_scored(const bemseval_verdict* v);
BEMSEVAL_API bemseval_status bemseval_verdict_get_flag(const bemseval_verdict* v,
                                                       bemseval_flag_kind kind, const char* key,
                                                       int* match);

/* Stages an edit; nothing changes until bemseval_verdict_commit_review. */
BEMSEVAL_API bemseval_status bemseval_verdict_set_flag(bemseval_verdict* v, bemseval_flag_kind kind,
                                                       const char* key, int match);
/* Applies staged edits (none = confirm). Reviewed verdicts need force != 0. */
BEMSEVAL_API bemseval_status bemseval_verdict_commit_review(bemseval_verdict* v, const char* note,
                                                            int force);
BEMSEVAL_API bemseval_status bemseval_verdict_rates(const bemseval_verdict* v, bemseval_rates* out);
/* path may be NULL to overwrite the file the verdict was opened from. */
BEMSEVAL_API bemseval_status bemseval_verdict_save(const bemseval_verdict* v, const char* path);

/* ---- numeric primitives ------------------------------------------------ */

/* groups: k arrays of values, sizes[i] values each. */
BEMSEVAL_API bemseval_status bemseval_kruskal_wallis(const double* const* groups,
                                                     const size_t* sizes, size_t k, double* h,
                                                     int* df, double* p);
BEMSEVAL_API bemseval_status bemseval_mann_whitney(const double* a, size_t na, const double* b,
                                                   size_t nb, double* u, double* p, int* exact);
BEMSEVAL_API bemseval_status bemseval_rank_biserial(const double* a, size_t na, const double* b,
                                                    size_t nb, double* r);
BEMSEVAL_API bemseval_status bemseval_bonferroni(double p, int m, double* adjusted);
BEMSEVAL_API bemseval_status bemseval_chi2_sf(double x, int df, double* p);
/* factors and weights hold 4 values; weights may be NULL for equal weights. */
BEMSEVAL_API bemseval_status bemseval_scale_confidence(const double* factors,
                                                       const double* weights, double* confidence);

#ifdef __cplusplus
}
#endif

#endif /* BEMSEVAL_H */
