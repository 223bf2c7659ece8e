#ifndef KERR_ESTIMATION_H
#define KERR_ESTIMATION_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KerrStatus {
  KERR_STATUS_OK = 0,
  KERR_STATUS_NULL_POINTER = 1,
  KERR_STATUS_INVALID_PARAMS = 2,
  KERR_STATUS_NON_CONVERGENCE = 3,
  KERR_STATUS_NUMERICAL_FAILURE = 4,
  KERR_STATUS_INVALID_COVARIANCE = 5,
  KERR_STATUS_VANISHING_SIGNAL = 6,
  KERR_STATUS_CONFIG_ERROR = 7,
  KERR_STATUS_OUT_OF_RANGE = 8,
  KERR_STATUS_PANIC = 99,
} KerrStatus;

typedef enum KerrEngine {
  KERR_ENGINE_AUTO = 0,
  KERR_ENGINE_ONE_PHOTON = 1,
  KERR_ENGINE_GENERAL = 2,
  KERR_ENGINE_LINEAR_CAVITY = 3,
  /**
   * Dense Lindblad steady state with the suggested truncation.
   */
  KERR_ENGINE_ORACLE = 4,
} KerrEngine;

typedef enum KerrObservable {
  KERR_OBSERVABLE_P = 0,
  KERR_OBSERVABLE_Q = 1,
  KERR_OBSERVABLE_P_SQUARED = 2,
  KERR_OBSERVABLE_Q_SQUARED = 3,
} KerrObservable;

/**
 * ν = 1 (`Figure`) or ν = Tγ (`Budget`).
 */
typedef enum KerrBudgetMode {
  KERR_BUDGET_MODE_FIGURE = 0,
  KERR_BUDGET_MODE_BUDGET = 1,
} KerrBudgetMode;

/**
 * Exact state of the decaying number superposition at one time.
 */
typedef struct KerrDecaySnapshot KerrDecaySnapshot;

/**
 * Steady-state normally ordered moments ⟨a†ˡaᵏ⟩, l + k ≤ 4.
 */
typedef struct KerrMomentTable KerrMomentTable;

/**
 * Model parameters; zero fields disable the corresponding term.
 */
typedef struct KerrParams {
  double omega_c;
  double omega_p;
  double delta;
  double chi;
  double gamma;
  double kappa;
  double omega_drive;
  double lambda_drive;
} KerrParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message (NUL-terminated, truncated to `len`) and
 * returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t kerr_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `params` must point to a valid struct; `out` must be writable.
 */
enum KerrStatus kerr_moments_new(const struct KerrParams *params,
                                 enum KerrEngine engine_kind,
                                 struct KerrMomentTable **out);

/**
 * ⟨a†ˡaᵏ⟩ as real and imaginary parts.
 *
 * # Safety
 * `table` must come from [`kerr_moments_new`]; `re`, `im` must be writable.
 */
enum KerrStatus kerr_moments_get(const struct KerrMomentTable *table,
                                 size_t l,
                                 size_t k,
                                 double *re,
                                 double *im);

/**
 * # Safety
 * `table` must come from [`kerr_moments_new`]; `out` must be writable.
 */
enum KerrStatus kerr_moments_photon_number(const struct KerrMomentTable *table, double *out);

/**
 * # Safety
 * `table` must be null or come from [`kerr_moments_new`], and not be used afterwards.
 */
void kerr_moments_free(struct KerrMomentTable *table);

/**
 * Steady-state Gaussian QFI with respect to χ.
 *
 * # Safety
 * `params` must be valid; `out` writable.
 */
enum KerrStatus kerr_gaussian_qfi(const struct KerrParams *params,
                                  enum KerrEngine engine_kind,
                                  double *out);

/**
 * Homodyne error propagation δχ for observable `obs`; infinite when the signal vanishes.
 *
 * # Safety
 * `params` must be valid; `out` writable.
 */
enum KerrStatus kerr_error_propagation(const struct KerrParams *params,
                                       enum KerrEngine engine_kind,
                                       enum KerrObservable obs,
                                       enum KerrBudgetMode mode,
                                       double total_time,
                                       double *out);

/**
 * Eigenvalue λ_{m,μ} of the lab-frame Kerr Liouvillian.
 *
 * # Safety
 * `params` must be valid; `re`, `im` writable.
 */
enum KerrStatus kerr_liouvillian_eigenvalue(int64_t m,
                                            uint64_t mu,
                                            const struct KerrParams *params,
                                            double *re,
                                            double *im);

/**
 * # Safety
 * `params` must be valid; `out` writable.
 */
enum KerrStatus kerr_decay_snapshot_new(size_t n,
                                        const struct KerrParams *params,
                                        double t,
                                        struct KerrDecaySnapshot **out);

/**
 * Population ρ_jj, 0 ≤ j ≤ 2N.
 *
 * # Safety
 * `s` must come from [`kerr_decay_snapshot_new`]; `out` writable.
 */
enum KerrStatus kerr_decay_snapshot_population(const struct KerrDecaySnapshot *s,
                                               size_t j,
                                               double *out);

/**
 * Coherence ρ_{2N,0}.
 *
 * # Safety
 * `s` must come from [`kerr_decay_snapshot_new`]; `re`, `im` writable.
 */
enum KerrStatus kerr_decay_snapshot_coherence(const struct KerrDecaySnapshot *s,
                                              double *re,
                                              double *im);

/**
 * Number of populations, 2N + 1.
 *
 * # Safety
 * `s` must come from [`kerr_decay_snapshot_new`].
 */
size_t kerr_decay_snapshot_len(const struct KerrDecaySnapshot *s);

/**
 * # Safety
 * `s` must be null or come from [`kerr_decay_snapshot_new`], and not be used afterwards.
 */
void kerr_decay_snapshot_free(struct KerrDecaySnapshot *s);

/**
 * QFI of the decaying superposition at time t.
 *
 * # Safety
 * `out` must be writable.
 */
enum KerrStatus kerr_qfi_decay(size_t n, double gamma, double t, double *out);

/**
 * δχ(t) = √(t/(T F)).
 *
 * # Safety
 * `out` must be writable.
 */
enum KerrStatus kerr_precision_profile(size_t n,
                                       double gamma,
                                       double total_time,
                                       double t,
                                       double *out);

/**
 * Interrogation time minimizing δχ.
 *
 * # Safety
 * `out` must be writable.
 */
enum KerrStatus kerr_optimal_time(size_t n, double gamma, double total_time, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERR_ESTIMATION_H */
