#ifndef BIOT_H
#define BIOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes of the C interface.
 */
typedef enum BiotStatus {
  BIOT_STATUS_OK = 0,
  BIOT_STATUS_NULL_POINTER = 1,
  BIOT_STATUS_INVALID_ARGUMENT = 2,
  BIOT_STATUS_DIMENSION_MISMATCH = 3,
  BIOT_STATUS_SINGULAR = 4,
  BIOT_STATUS_NOT_CONVERGED = 5,
  BIOT_STATUS_IO = 6,
  BIOT_STATUS_INTERNAL = 7,
} BiotStatus;

/**
 * One benchmark configuration.
 */
typedef struct BiotCase BiotCase;

/**
 * A block preconditioner built for a system.
 */
typedef struct BiotPreconditioner BiotPreconditioner;

/**
 * Result of one benchmark solve.
 */
typedef struct BiotReport BiotReport;

/**
 * An assembled system at a fixed time step.
 */
typedef struct BiotSystemHandle BiotSystemHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *biot_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *biot_version(void);

/**
 * Creates a case for `problem` (`"mandel2d"` or `"footing3d"`) with `n`
 * cells per side, time step `tau` and preconditioner id (`"bd"`, `"bl"`,
 * `"bu"`, `"bde"`, `"ble"`, `"bue"`).
 *
 * # Safety
 * `problem` and `precond` must be valid NUL-terminated strings; `out` must
 * be a valid pointer to writable storage.
 */
enum BiotStatus biot_case_new(const char *problem,
                              uint32_t n,
                              double tau,
                              const char *precond,
                              struct BiotCase **out);

/**
 * # Safety
 * `handle` must be null or a handle from [`biot_case_new`] not yet freed.
 */
void biot_case_free(struct BiotCase *handle);

/**
 * Sets Poisson ratio and permeability.
 *
 * # Safety
 * `handle` must be a live handle.
 */
enum BiotStatus biot_case_set_material(struct BiotCase *handle, double nu, double k);

/**
 * Sets the permeability for `x ≥ 0.5` (footing only); a negative value
 * removes the jump.
 *
 * # Safety
 * `handle` must be a live handle.
 */
enum BiotStatus biot_case_set_jump(struct BiotCase *handle, double k_right);

/**
 * Selects inexact (AMG / inner Krylov) sub-solvers.
 *
 * # Safety
 * `handle` must be a live handle.
 */
enum BiotStatus biot_case_set_inexact(struct BiotCase *handle, bool inexact);

/**
 * Selects the system variant: `"full"`, `"diag"` or `"elim"`.
 *
 * # Safety
 * `handle` must be a live handle and `variant` a valid NUL-terminated string.
 */
enum BiotStatus biot_case_set_variant(struct BiotCase *handle, const char *variant);

/**
 * Outer FGMRES relative tolerance and iteration cap.
 *
 * # Safety
 * `handle` must be a live handle.
 */
enum BiotStatus biot_case_set_solver(struct BiotCase *handle, double tol, uint32_t max_iter);

/**
 * Assembles, preconditions and solves the case. A report is returned also
 * when the solve does not converge (status [`BiotStatus::NotConverged`]).
 *
 * # Safety
 * `handle` must be a live handle; `out` a valid pointer to writable storage.
 */
enum BiotStatus biot_run(const struct BiotCase *handle, struct BiotReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`biot_run`] not yet freed.
 */
void biot_report_free(struct BiotReport *report);

/**
 * Outer iteration count, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint32_t biot_report_iterations(const struct BiotReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
bool biot_report_converged(const struct BiotReport *report);

/**
 * True relative residual of the returned iterate, NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double biot_report_relres(const struct BiotReport *report);

/**
 * The benchmark CSV row; free it with [`biot_string_free`].
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *biot_report_csv_row(const struct BiotReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void biot_string_free(char *s);

/**
 * Assembles the system of a case (first backward-Euler step from rest).
 *
 * # Safety
 * `handle` must be a live handle; `out` a valid pointer to writable storage.
 */
enum BiotStatus biot_system_new(const struct BiotCase *handle, struct BiotSystemHandle **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`biot_system_new`] not yet freed.
 */
void biot_system_free(struct BiotSystemHandle *sys);

/**
 * Number of unknowns, 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
uintptr_t biot_system_size(const struct BiotSystemHandle *sys);

/**
 * `y = A x`.
 *
 * # Safety
 * `sys` must be a live handle, `x` and `y` must point to `len` doubles.
 */
enum BiotStatus biot_system_apply(const struct BiotSystemHandle *sys,
                                  const double *x,
                                  double *y,
                                  uintptr_t len);

/**
 * Copies the right-hand side into `out`.
 *
 * # Safety
 * `sys` must be a live handle and `out` must point to `len` writable doubles.
 */
enum BiotStatus biot_system_rhs(const struct BiotSystemHandle *sys, double *out, uintptr_t len);

/**
 * Builds the preconditioner `precond` (exact or inexact) for a system.
 *
 * # Safety
 * `sys` must be a live handle, `precond` a valid NUL-terminated string and
 * `out` a valid pointer to writable storage.
 */
enum BiotStatus biot_preconditioner_new(const struct BiotSystemHandle *sys,
                                        const char *precond,
                                        bool inexact,
                                        struct BiotPreconditioner **out);

/**
 * # Safety
 * `prec` must be null or a handle from [`biot_preconditioner_new`] not yet
 * freed.
 */
void biot_preconditioner_free(struct BiotPreconditioner *prec);

/**
 * `z = B r`.
 *
 * # Safety
 * `prec` must be a live handle, `r` and `z` must point to `len` doubles.
 */
enum BiotStatus biot_preconditioner_apply(const struct BiotPreconditioner *prec,
                                          const double *r,
                                          double *z,
                                          uintptr_t len);

/**
 * Mandel's analytic pore pressure at abscissa `x` and time `t` for the
 * default setup with Poisson ratio `nu` and permeability `k`.
 *
 * # Safety
 * `out` must be a valid pointer to a writable double.
 */
enum BiotStatus biot_mandel_pressure(double x, double t, double nu, double k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIOT_H */
