#ifndef STOCHQ_H
#define STOCHQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StqStatus {
  STQ_STATUS_OK = 0,
  STQ_STATUS_INVALID_ARGUMENT = 1,
  STQ_STATUS_INVALID_CHANNEL = 2,
  STQ_STATUS_PRECONDITION_VIOLATION = 3,
  STQ_STATUS_UNSUPPORTED_VARIANT = 4,
  STQ_STATUS_INCOMPATIBLE_MODULUS = 5,
  STQ_STATUS_OUT_OF_REGIME = 6,
  STQ_STATUS_UNDEFINED_BOUND = 7,
  STQ_STATUS_CAPACITY = 8,
  STQ_STATUS_NULL_POINTER = 9,
  STQ_STATUS_INVALID_UTF8 = 10,
  STQ_STATUS_PANIC = 11,
} StqStatus;

typedef enum StqKernelVariant {
  STQ_KERNEL_VARIANT_PURE_A = 0,
  STQ_KERNEL_VARIANT_PURE_B = 1,
  STQ_KERNEL_VARIANT_COMBINED = 2,
} StqKernelVariant;

/**
 * Random mix of rotation games.
 */
typedef struct StqCombinedGame StqCombinedGame;

/**
 * Single-qubit density matrix.
 */
typedef struct StqDensityMatrix StqDensityMatrix;

/**
 * Search game configuration.
 */
typedef struct StqGroverGame StqGroverGame;

/**
 * Kick law with one step of memory.
 */
typedef struct StqMemoryKernel StqMemoryKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *stq_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *stq_version(void);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum StqStatus stq_density_matrix_new(double a,
                                      double b_re,
                                      double b_im,
                                      double c,
                                      struct StqDensityMatrix **out_handle);

/**
 * # Safety
 * `h` must come from `stq_density_matrix_new` (or be null) and not be used
 * afterwards.
 */
void stq_density_matrix_free(struct StqDensityMatrix *h);

/**
 * # Safety
 * `h` must be a live handle; the out pointers must be valid.
 */
enum StqStatus stq_density_matrix_entries(const struct StqDensityMatrix *h,
                                          double *a,
                                          double *b_re,
                                          double *b_im,
                                          double *c);

/**
 * `|b|`.
 *
 * # Safety
 * `h` must be a live handle; `value` must be valid.
 */
enum StqStatus stq_coherence(const struct StqDensityMatrix *h, double *value);

/**
 * # Safety
 * `gamma` and `phi` must be valid.
 */
enum StqStatus stq_char_function_gaussian(double mu, double sigma2, double *gamma, double *phi);

/**
 * # Safety
 * `gamma` and `phi` must be valid.
 */
enum StqStatus stq_char_function_exponential(double omega, double tau1, double *gamma, double *phi);

/**
 * Delta mixture with `len` (weight, angle) atoms.
 *
 * # Safety
 * `weights` and `angles` must point to `len` values; `gamma` and `phi` must
 * be valid.
 */
enum StqStatus stq_char_function_delta(const double *weights,
                                       const double *angles,
                                       size_t len,
                                       double *gamma,
                                       double *phi);

/**
 * # Safety
 * `out_handle` must be valid.
 */
enum StqStatus stq_memory_kernel_new(enum StqKernelVariant variant,
                                     double epsilon,
                                     struct StqMemoryKernel **out_handle);

/**
 * # Safety
 * `h` must come from `stq_memory_kernel_new` (or be null).
 */
void stq_memory_kernel_free(struct StqMemoryKernel *h);

/**
 * Per-step decay `|f_n|^{1/n}`, `n >= 2`.
 *
 * # Safety
 * `h` must be a live handle; `value` must be valid.
 */
enum StqStatus stq_effective_decay(const struct StqMemoryKernel *h, size_t n, double *value);

/**
 * Expected state after `n` kicks; the result is a new handle.
 *
 * # Safety
 * `kernel` and `rho` must be live handles; `out_handle` must be valid.
 */
enum StqStatus stq_memory_expected_state(const struct StqMemoryKernel *kernel,
                                         const struct StqDensityMatrix *rho,
                                         size_t n,
                                         struct StqDensityMatrix **out_handle);

/**
 * # Safety
 * `moduli` must point to `len` values; `out_handle` must be valid.
 */
enum StqStatus stq_combined_game_new(const uint64_t *moduli,
                                     size_t len,
                                     struct StqCombinedGame **out_handle);

/**
 * # Safety
 * `h` must come from `stq_combined_game_new` (or be null).
 */
void stq_combined_game_free(struct StqCombinedGame *h);

/**
 * Stationary win probability and net rate as reduced fractions.
 *
 * # Safety
 * `h` must be a live handle; the out pointers must be valid.
 */
enum StqStatus stq_exact_rate(const struct StqCombinedGame *h,
                              int64_t *win_num,
                              int64_t *win_den,
                              int64_t *net_num,
                              int64_t *net_den);

/**
 * Empirical win frequency over `rounds` rounds from position 0.
 *
 * # Safety
 * `h` must be a live handle; `win_prob` must be valid.
 */
enum StqStatus stq_simulate(const struct StqCombinedGame *h,
                            uint64_t rounds,
                            uint64_t seed,
                            double *win_prob);

/**
 * # Safety
 * `out_handle` must be valid.
 */
enum StqStatus stq_grover_game_new(uint32_t n_qubits,
                                   uint64_t target,
                                   struct StqGroverGame **out_handle);

/**
 * # Safety
 * `h` must come from `stq_grover_game_new` (or be null).
 */
void stq_grover_game_free(struct StqGroverGame *h);

/**
 * `sin^2((2k+1) asin(1/sqrt(N)))`.
 *
 * # Safety
 * `h` must be a live handle; `value` must be valid.
 */
enum StqStatus stq_success_closed_form(const struct StqGroverGame *h, uint64_t k, double *value);

/**
 * # Safety
 * `h` must be a live handle; `k` must be valid.
 */
enum StqStatus stq_optimal_k(const struct StqGroverGame *h, uint64_t *k);

/**
 * # Safety
 * `value` must be valid.
 */
enum StqStatus stq_max_mixing_probability(double lambda_ad, double lambda_pd, double *value);

/**
 * # Safety
 * `t1` and `t2` must be valid.
 */
enum StqStatus stq_effective_t1_t2(double p,
                                   double lambda_ad,
                                   double lambda_pd,
                                   double tau0,
                                   double *t1,
                                   double *t2);

/**
 * Runs a JSON run configuration (the same format as the command line's
 * `--config` file) and returns the JSON result envelope. `threads = 0` uses
 * the default pool. Free the result with [`stq_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `result_json` must be
 * valid.
 */
enum StqStatus stq_run_json(const char *config_json, uint32_t threads, char **result_json);

/**
 * # Safety
 * `s` must come from this library (or be null).
 */
void stq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STOCHQ_H */
