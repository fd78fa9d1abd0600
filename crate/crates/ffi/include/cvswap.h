#ifndef CVSWAP_H
#define CVSWAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvsStatus {
  CVS_STATUS_OK = 0,
  CVS_STATUS_NULL_POINTER = 1,
  CVS_STATUS_INVALID_PARAMETER = 2,
  CVS_STATUS_SHAPE_MISMATCH = 3,
  CVS_STATUS_OUT_OF_RANGE = 4,
  CVS_STATUS_LEAK_TOO_LARGE = 5,
  CVS_STATUS_ZERO_NORM = 6,
  CVS_STATUS_TOO_LARGE = 7,
  CVS_STATUS_NOT_UNITARY = 8,
  CVS_STATUS_IO = 9,
  CVS_STATUS_PANIC = 10,
} CvsStatus;

typedef enum CvsGateKind {
  /**
   * `params = [re alpha, im alpha, _]`, acts on `modes[0]`.
   */
  CVS_GATE_KIND_DISPLACEMENT = 0,
  /**
   * `params = [re z, im z, _]`, acts on `modes[0]`.
   */
  CVS_GATE_KIND_SQUEEZE = 1,
  /**
   * `params = [theta, phi, _]`, acts on `modes[0]` and `modes[1]`.
   */
  CVS_GATE_KIND_BEAMSPLITTER = 2,
  /**
   * `params = [phi, _, _]`, acts on `modes[0]`.
   */
  CVS_GATE_KIND_PHASE_ROTATION = 3,
  /**
   * `params = [r, _, _]`, acts on `modes[0]` and `modes[1]`.
   */
  CVS_GATE_KIND_TWO_MODE_SQUEEZE = 4,
  CVS_GATE_KIND_MODE_SWAP = 5,
} CvsGateKind;

typedef enum CvsPlanMethod {
  CVS_PLAN_METHOD_EXACT_TAIL = 0,
  CVS_PLAN_METHOD_SQUEEZED_CLOSED_FORM = 1,
  CVS_PLAN_METHOD_CHERNOFF = 2,
  CVS_PLAN_METHOD_NORMAL_QUANTILE = 3,
} CvsPlanMethod;

/**
 * Opaque handle to a truncated multimode Fock state.
 */
typedef struct CvsState CvsState;

typedef struct CvsGate {
  enum CvsGateKind kind;
  size_t modes[2];
  double params[3];
} CvsGate;

/**
 * `stderr` is NaN when fewer than two shots were taken.
 */
typedef struct CvsEstimate {
  double mean_re;
  double mean_im;
  double stderr;
  uint64_t shots;
  uint64_t discarded;
  uint64_t seed;
} CvsEstimate;

typedef struct CvsPlan {
  size_t m;
  double bound;
  double target_eps;
  enum CvsPlanMethod method;
} CvsPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *cvs_last_error(void);

/**
 * Builds a state from interleaved amplitudes `[re0, im0, re1, im1, ...]`,
 * row-major with the last mode fastest. `amplitudes_len` counts doubles.
 *
 * # Safety
 * `per_mode_max` must point to `modes` values and `amplitudes` to
 * `amplitudes_len` doubles.
 */
enum CvsStatus cvs_state_new(size_t modes,
                             const size_t *per_mode_max,
                             const double *amplitudes,
                             size_t amplitudes_len,
                             struct CvsState **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CvsStatus cvs_state_vacuum(size_t modes, size_t cutoff, struct CvsState **out);

/**
 * Coherent state `D(alpha)|0>`, renormalised after truncation.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CvsStatus cvs_state_coherent(double alpha_re,
                                  double alpha_im,
                                  size_t cutoff,
                                  struct CvsState **out);

/**
 * Squeezed vacuum `S(z)|0>`, renormalised after truncation.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CvsStatus cvs_state_squeezed(double z_re, double z_im, size_t cutoff, struct CvsState **out);

/**
 * Two-mode squeezed vacuum, `cutoff` photons per mode.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CvsStatus cvs_state_tmss(double r, size_t cutoff, struct CvsState **out);

/**
 * # Safety
 * `a` and `b` must be live handles; `out` a valid handle slot.
 */
enum CvsStatus cvs_state_tensor(const struct CvsState *a,
                                const struct CvsState *b,
                                struct CvsState **out);

/**
 * Applies `gates` in order and returns a new handle; the input is untouched.
 *
 * # Safety
 * `state` must be a live handle, `gates` must point to `n_gates` gates.
 */
enum CvsStatus cvs_state_apply_circuit(const struct CvsState *state,
                                       const struct CvsGate *gates,
                                       size_t n_gates,
                                       struct CvsState **out);

/**
 * # Safety
 * `state` must be a handle from this library or NULL; it is consumed.
 */
void cvs_state_free(struct CvsState *state);

/**
 * Number of modes, or 0 for NULL.
 *
 * # Safety
 * `state` must be a live handle or NULL.
 */
size_t cvs_state_modes(const struct CvsState *state);

/**
 * Number of complex amplitudes, or 0 for NULL.
 *
 * # Safety
 * `state` must be a live handle or NULL.
 */
size_t cvs_state_dim(const struct CvsState *state);

/**
 * Copies interleaved amplitudes into `buffer`, which must hold at least
 * `2 * cvs_state_dim(state)` doubles.
 *
 * # Safety
 * `buffer` must point to `buffer_len` writable doubles.
 */
enum CvsStatus cvs_state_amplitudes(const struct CvsState *state,
                                    double *buffer,
                                    size_t buffer_len);

/**
 * `<a|b>`.
 *
 * # Safety
 * Handles must be live; `re` and `im` must be writable.
 */
enum CvsStatus cvs_inner_product(const struct CvsState *a,
                                 const struct CvsState *b,
                                 double *re,
                                 double *im);

/**
 * CV SWAP test of two single-mode states with detector threshold `2m`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum CvsStatus cvs_cv_swap_estimate(const struct CvsState *a,
                                    const struct CvsState *b,
                                    size_t m,
                                    uint64_t shots,
                                    uint64_t seed,
                                    struct CvsEstimate *out);

/**
 * Exact `tr(SWAP_2M rho)` of a two-mode state.
 *
 * # Safety
 * `joint` must be live; `out` writable.
 */
enum CvsStatus cvs_swap2m_expectation(const struct CvsState *joint, size_t m, double *out);

/**
 * Weight of a two-mode state above total photon number `2m`.
 *
 * # Safety
 * `joint` must be live; `out` writable.
 */
enum CvsStatus cvs_error_bound_global(const struct CvsState *joint, size_t m, double *out);

/**
 * Product of the single-mode marginal weights at or below `m`, subtracted
 * from one.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum CvsStatus cvs_error_bound_local(const struct CvsState *rho,
                                     const struct CvsState *sigma,
                                     size_t m,
                                     double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CvsStatus cvs_cutoff_for_squeezed(double r, double eps, struct CvsPlan *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CvsStatus cvs_cutoff_for_coherent_chernoff(double energy, double eps, struct CvsPlan *out);

/**
 * Normal approximation; refuses mean photon numbers below 25.
 *
 * # Safety
 * `out` must be writable.
 */
enum CvsStatus cvs_cutoff_for_coherent_normal(double energy, double eps, struct CvsPlan *out);

/**
 * Exact `tr(rho_0 rho_1 ... rho_{L-1})` for single-mode inputs.
 *
 * # Safety
 * `states` must point to `n_states` live handles; `re` and `im` writable.
 */
enum CvsStatus cvs_perm_exact(const struct CvsState *const *states,
                              size_t n_states,
                              double *re,
                              double *im);

/**
 * Sampled PERM test.
 *
 * # Safety
 * `states` must point to `n_states` live handles; `out` writable.
 */
enum CvsStatus cvs_perm_estimate(const struct CvsState *const *states,
                                 size_t n_states,
                                 uint64_t shots,
                                 uint64_t seed,
                                 struct CvsEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVSWAP_H */
