#ifndef DEVIAN_H
#define DEVIAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by every fallible function.
 */
typedef enum DevianStatus {
  DEVIAN_STATUS_OK = 0,
  DEVIAN_STATUS_NULL_POINTER = 1,
  DEVIAN_STATUS_INVALID_ARGUMENT = 2,
  DEVIAN_STATUS_NON_FINITE_INPUT = 3,
  DEVIAN_STATUS_DIMENSION_MISMATCH = 4,
  DEVIAN_STATUS_RANK_DEFICIENT = 5,
  DEVIAN_STATUS_TOO_FEW_ROWS = 6,
  DEVIAN_STATUS_LEVERAGE_ONE = 7,
  DEVIAN_STATUS_ZERO_VARIANCE = 8,
  DEVIAN_STATUS_SIMULATION_DEGENERATE = 9,
  DEVIAN_STATUS_INSUFFICIENT_SAMPLES = 10,
  DEVIAN_STATUS_FINGERPRINT_MISMATCH = 11,
  DEVIAN_STATUS_BUFFER_TOO_SMALL = 12,
  DEVIAN_STATUS_INTERNAL = 13,
} DevianStatus;

/**
 * Opaque design matrix (intercept included).
 */
typedef struct DevianDesign DevianDesign;

/**
 * Opaque simulated null law of the maximum studentized residual.
 */
typedef struct DevianDistribution DevianDistribution;

/**
 * Opaque least-squares fit.
 */
typedef struct DevianModel DevianModel;

/**
 * Opaque detection result.
 */
typedef struct DevianReport DevianReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *devian_last_error_message(void);

/**
 * Builds an `nrows × (npredictors + 1)` design, prepending the intercept.
 */
enum DevianStatus devian_design_new(const double *predictors,
                                    size_t nrows,
                                    size_t npredictors,
                                    struct DevianDesign **out);

void devian_design_free(struct DevianDesign *design);

size_t devian_design_nrows(const struct DevianDesign *design);

/**
 * Columns including the intercept.
 */
size_t devian_design_ncols(const struct DevianDesign *design);

enum DevianStatus devian_design_leverages(const struct DevianDesign *design,
                                          double *out,
                                          size_t len);

enum DevianStatus devian_model_fit(const struct DevianDesign *design,
                                   const double *response,
                                   size_t len,
                                   struct DevianModel **out);

void devian_model_free(struct DevianModel *model);

enum DevianStatus devian_model_coefficients(const struct DevianModel *model,
                                            double *out,
                                            size_t len);

/**
 * Externally studentized residuals via the deletion identities.
 */
enum DevianStatus devian_model_studentized_residuals(const struct DevianModel *model,
                                                     double *out,
                                                     size_t len);

/**
 * Externally studentized residuals by explicit leave-one-out refits.
 */
enum DevianStatus devian_studentized_residuals_oracle(const struct DevianDesign *design,
                                                      const double *response,
                                                      size_t response_len,
                                                      double *out,
                                                      size_t len);

enum DevianStatus devian_zscore_last(const double *series, size_t len, double *out);

/**
 * Tabulates the null law with `nsim` draws. `oracle != 0` selects the
 * leave-one-out refit path. The result does not depend on `workers`.
 */
enum DevianStatus devian_simulate(const struct DevianDesign *design,
                                  size_t nsim,
                                  uint64_t seed,
                                  size_t workers,
                                  int32_t oracle,
                                  struct DevianDistribution **out);

void devian_distribution_free(struct DevianDistribution *dist);

size_t devian_distribution_nsim(const struct DevianDistribution *dist);

/**
 * Copies the sorted simulated statistics.
 */
enum DevianStatus devian_distribution_samples(const struct DevianDistribution *dist,
                                              double *out,
                                              size_t len);

enum DevianStatus devian_distribution_quantile(const struct DevianDistribution *dist,
                                               double alpha,
                                               double *out);

enum DevianStatus devian_distribution_quantile_standard_error(const struct DevianDistribution *dist,
                                                              double alpha,
                                                              double *out);

enum DevianStatus devian_distribution_p_value(const struct DevianDistribution *dist,
                                              double t_obs,
                                              double *out);

enum DevianStatus devian_detect(const struct DevianModel *model,
                                const struct DevianDistribution *dist,
                                double alpha,
                                struct DevianReport **out);

void devian_report_free(struct DevianReport *report);

/**
 * Observed statistic; NaN for a null handle.
 */
double devian_report_t_obs(const struct DevianReport *report);

double devian_report_threshold(const struct DevianReport *report);

double devian_report_p_value(const struct DevianReport *report);

size_t devian_report_outlier_count(const struct DevianReport *report);

/**
 * Copies the 0-based indices of flagged observations, ascending.
 */
enum DevianStatus devian_report_outliers(const struct DevianReport *report,
                                         size_t *out,
                                         size_t len);

/**
 * JSON rendering of the report; release with [`devian_string_free`].
 */
enum DevianStatus devian_report_to_json(const struct DevianReport *report, char **out);

void devian_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEVIAN_H */
