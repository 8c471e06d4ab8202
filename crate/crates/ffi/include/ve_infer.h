#ifndef VE_INFER_H
#define VE_INFER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum VeStatus {
  VE_STATUS_OK = 0,
  // A required pointer argument was null.
  VE_STATUS_NULL_POINTER = 1,
  // An argument lies outside the mathematical domain.
  VE_STATUS_DOMAIN = 2,
  // Structurally invalid input (bad counts, malformed JSON, ...).
  VE_STATUS_INVALID_INPUT = 3,
  // A numerical routine failed.
  VE_STATUS_NUMERICAL = 4,
  // A Rust panic was caught.
  VE_STATUS_PANIC = 5,
} VeStatus;

typedef enum VeMomentMode {
  VE_MOMENT_MODE_CORRECTED = 0,
  VE_MOMENT_MODE_PAPER_COMPAT = 1,
} VeMomentMode;

typedef enum VeVarianceN {
  VE_VARIANCE_N_PER_COHORT = 0,
  VE_VARIANCE_N_APPENDIX_NV = 1,
} VeVarianceN;

// Opaque set of retained posterior draws.
typedef struct VeChain VeChain;

// Opaque trial data.
typedef struct VeTrialData VeTrialData;

typedef struct VeGammaPrior {
  double a_v;
  double b_v;
  double a_c;
  double b_c;
} VeGammaPrior;

typedef struct VeMcmcConfig {
  uint32_t chains;
  uint64_t iterations;
  uint64_t burn_in;
  uint64_t seed;
  double target_acceptance;
  double initial_step;
} VeMcmcConfig;

typedef struct VeLikelihood {
  enum VeMomentMode moment_mode;
  enum VeVarianceN variance_n;
} VeLikelihood;

typedef struct VeDraw {
  uint32_t chain;
  uint64_t iteration;
  double lambda_v;
  double lambda_c;
  double ve;
  double log_posterior;
} VeDraw;

// Posterior summary of VE (fractions, not percent).
typedef struct VeSummary {
  uint64_t draws;
  double mean;
  double median;
  double sd;
  double ci_lo;
  double ci_hi;
  // NaN when undefined.
  double ess;
  double r_hat;
  bool r_hat_defined;
} VeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null if none. The pointer
// stays valid until the next failing call on the same thread.
const char *ve_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ve_version(void);

// Creates validated trial data.
//
// # Safety
// `out` must be valid for a pointer write.
enum VeStatus ve_trial_data_new(uint64_t n_v,
                                uint64_t n_c,
                                double s_v,
                                double s_c,
                                uint64_t x_v,
                                uint64_t x_c,
                                double d,
                                struct VeTrialData **out);

// Loads a built-in dataset by name (e.g. `"pfizer-c4591001-interim"`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` valid for a pointer write.
enum VeStatus ve_trial_data_builtin(const char *name, struct VeTrialData **out);

// # Safety
// `data` must be null or a pointer from `ve_trial_data_*`, not yet freed.
void ve_trial_data_free(struct VeTrialData *data);

// θ = s_v(1-VE) / (s_v(1-VE) + s_c).
//
// # Safety
// `out` must be valid for a write.
enum VeStatus ve_theta_from_ve(double ve, double s_v, double s_c, double *out);

// Inverse of [`ve_theta_from_ve`].
//
// # Safety
// `out` must be valid for a write.
enum VeStatus ve_ve_from_theta(double theta, double s_v, double s_c, double *out);

// Equal-tail VE credible interval from the conditional method with a
// Beta(a, b) prior on θ.
//
// # Safety
// `data` must be a live handle; `lo` and `hi` valid for writes.
enum VeStatus ve_conditional_interval(const struct VeTrialData *data,
                                      double a,
                                      double b,
                                      double level,
                                      double *lo,
                                      double *hi);

// Plug-in estimate `1 - (x_v/s_v)/(x_c/s_c)`.
//
// # Safety
// `data` must be a live handle; `out` valid for a write.
enum VeStatus ve_irr_point_estimate(const struct VeTrialData *data, double *out);

// Default Gamma priors from a VE guess in [0, 1) and a control-arm rate.
//
// # Safety
// `out` must be valid for a write.
enum VeStatus ve_elicit_priors(double ve_hat, double lambda_c_hat, struct VeGammaPrior *out);

// Prior mean of VE; a domain error when `a_c <= 1`.
//
// # Safety
// `prior` must point to a `VeGammaPrior`; `out` valid for a write.
enum VeStatus ve_prior_mean_ve(const struct VeGammaPrior *prior, double *out);

// Mean and variance of per-participant follow-up `min(T, C)`. In
// paper-compatible mode the variance may be negative.
//
// # Safety
// `mean` and `variance` must be valid for writes.
enum VeStatus ve_surveillance_moments(double lambda,
                                      double d,
                                      enum VeMomentMode mode,
                                      double *mean,
                                      double *variance);

// Default sampler settings.
struct VeMcmcConfig ve_mcmc_config_default(void);

// Samples the full-model posterior.
//
// # Safety
// `data` must be a live handle; `prior`, `cfg`, `lik` valid pointers; `out`
// valid for a pointer write.
enum VeStatus ve_sample_posterior(const struct VeTrialData *data,
                                  const struct VeGammaPrior *prior,
                                  const struct VeMcmcConfig *cfg,
                                  const struct VeLikelihood *lik,
                                  struct VeChain **out);

// Number of retained draws (all chains), 0 for a null handle.
//
// # Safety
// `chain` must be null or a live handle.
uint64_t ve_chain_len(const struct VeChain *chain);

// Copies draw `index` (ordered by chain, then iteration).
//
// # Safety
// `chain` must be a live handle; `out` valid for a write.
enum VeStatus ve_chain_draw(const struct VeChain *chain, uint64_t index, struct VeDraw *out);

// Summarizes the VE draws at credible `level`.
//
// # Safety
// `chain` must be a live handle; `out` valid for a write.
enum VeStatus ve_chain_summarize(const struct VeChain *chain, double level, struct VeSummary *out);

// # Safety
// `chain` must be null or a handle from [`ve_sample_posterior`], not yet freed.
void ve_chain_free(struct VeChain *chain);

// Runs a JSON analysis request (same format as the CLI) and returns the JSON
// report. Free the result with [`ve_string_free`].
//
// # Safety
// `request` must be a NUL-terminated string; `out` valid for a pointer write.
enum VeStatus ve_analyze_json(const char *request, char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void ve_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VE_INFER_H */
