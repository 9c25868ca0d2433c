#ifndef EVTCURE_H
#define EVTCURE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum EvtcureStatus {
  EVTCURE_STATUS_OK = 0,
  EVTCURE_STATUS_NULL_POINTER = 1,
  EVTCURE_STATUS_INVALID_INPUT = 2,
  EVTCURE_STATUS_DEGENERATE = 3,
  EVTCURE_STATUS_NUMERICAL_FAILURE = 4,
  EVTCURE_STATUS_PANIC = 5,
} EvtcureStatus;

// Opaque survival sample.
typedef struct EvtcureSample EvtcureSample;

// Corrected estimate for one `y`.
typedef struct EvtcureEstimate {
  double p_hat_y;
  // NaN when the correction is undefined.
  double y_gamma_hat;
  // Nonzero when the estimate fell back to the plateau.
  int32_t fallback_used;
} EvtcureEstimate;

// Result of the bootstrap selection of `y`.
typedef struct EvtcureSelection {
  double y_star;
  struct EvtcureEstimate estimate;
  double p_hat_n;
  double bootstrap_mean;
} EvtcureSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a sample from `len` times and event flags (nonzero = event).
//
// # Safety
// `times` and `events` must point to `len` readable values; `out` must be
// writable. Free the result with [`evtcure_sample_free`].
enum EvtcureStatus evtcure_sample_new(const double *times,
                                      const int32_t *events,
                                      size_t len,
                                      struct EvtcureSample **out);

// Releases a sample. Null is ignored.
//
// # Safety
// `sample` must come from [`evtcure_sample_new`] and not be used afterwards.
void evtcure_sample_free(struct EvtcureSample *sample);

// # Safety
// `sample` must be a live handle and `out` writable.
enum EvtcureStatus evtcure_sample_len(const struct EvtcureSample *sample, size_t *out);

// Kaplan-Meier estimate of the distribution function at the largest
// observed time.
//
// # Safety
// `sample` must be a live handle and `out` writable.
enum EvtcureStatus evtcure_plateau(const struct EvtcureSample *sample, double *out);

// Kaplan-Meier distribution function at `t` (right-continuous).
//
// # Safety
// `sample` must be a live handle and `out` writable.
enum EvtcureStatus evtcure_km_evaluate(const struct EvtcureSample *sample, double t, double *out);

// Corrected estimate from the three curve levels `F(τ)`, `F(yτ)`, `F(y²τ)`.
//
// # Safety
// `out` must be writable.
enum EvtcureStatus evtcure_corrected_estimate(double f_tau,
                                              double f_y_tau,
                                              double f_y2_tau,
                                              double y,
                                              struct EvtcureEstimate *out);

// Bootstrap selection of `y` over `grid`.
//
// # Safety
// `sample` must be a live handle, `grid` must point to `grid_len` values and
// `out` must be writable.
enum EvtcureStatus evtcure_select_y_star(const struct EvtcureSample *sample,
                                         const double *grid,
                                         size_t grid_len,
                                         size_t n_bootstrap,
                                         uint64_t seed,
                                         struct EvtcureSelection *out);

// Plug-in asymptotic variance of the corrected estimate at `y`.
//
// # Safety
// `sample` must be a live handle and `out` writable.
enum EvtcureStatus evtcure_sigma2_plugin(const struct EvtcureSample *sample, double y, double *out);

// Wald interval `p ± z·sqrt(σ²/n)`.
//
// # Safety
// `lower` and `upper` must be writable.
enum EvtcureStatus evtcure_wald_interval(double p_hat,
                                         double sigma2,
                                         size_t n,
                                         double level,
                                         double *lower,
                                         double *upper);

// Maps `len` times through `t -> 1/(tau0 - t)` into `out`.
//
// # Safety
// `times` must be readable and `out` writable for `len` values.
enum EvtcureStatus evtcure_psi_transform(const double *times, size_t len, double tau0, double *out);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library on the same thread.
const char *evtcure_last_error_message(void);

// Library version as a static nul-terminated string.
const char *evtcure_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVTCURE_H */
