#ifndef PEGAMP_H
#define PEGAMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PegampStatus {
  PEGAMP_STATUS_OK = 0,
  PEGAMP_STATUS_NULL_POINTER = 1,
  PEGAMP_STATUS_INVALID_ARGUMENT = 2,
  PEGAMP_STATUS_DIMENSION_MISMATCH = 3,
  PEGAMP_STATUS_DIVERGENCE = 4,
  PEGAMP_STATUS_NUMERICAL = 5,
  PEGAMP_STATUS_CONFIG = 6,
  PEGAMP_STATUS_PANIC = 7,
} PegampStatus;

typedef enum PegampVariant {
  PEGAMP_VARIANT_PE_BGM = 0,
  PEGAMP_VARIANT_PE_BEM = 1,
  PEGAMP_VARIANT_PE_LASSO = 2,
} PegampVariant;

// Dense row-major sensing matrix.
typedef struct PegampOperator PegampOperator;

// Outcome of one solve.
typedef struct PegampResult PegampResult;

// Solver controls. Obtain defaults from [`pegamp_options_default`].
typedef struct PegampOptions {
  uintptr_t max_iters;
  double tol;
  double damping;
  // mixture components of the BGm/BEm priors
  uintptr_t components;
} PegampOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *pegamp_last_error(void);

// Static description of a status code.
const char *pegamp_status_str(enum PegampStatus status);

struct PegampOptions pegamp_options_default(void);

// Copy a `rows x cols` row-major matrix into a new operator.
enum PegampStatus pegamp_operator_new(uintptr_t rows,
                                      uintptr_t cols,
                                      const double *data,
                                      struct PegampOperator **out);

void pegamp_operator_free(struct PegampOperator *op);

uintptr_t pegamp_operator_rows(const struct PegampOperator *op);

uintptr_t pegamp_operator_cols(const struct PegampOperator *op);

// Recover `x` from `y` (length `rows`) with a parameter-estimating variant.
enum PegampStatus pegamp_recover(const struct PegampOperator *op,
                                 const double *y,
                                 uintptr_t y_len,
                                 enum PegampVariant variant,
                                 const struct PegampOptions *options,
                                 struct PegampResult **out);

// Sum-product GAMP at a known Bernoulli-Gaussian prior `(sparsity, 0, 1)`
// and noise variance.
enum PegampStatus pegamp_recover_oracle_bg(const struct PegampOperator *op,
                                           const double *y,
                                           uintptr_t y_len,
                                           double sparsity,
                                           double noise_variance,
                                           const struct PegampOptions *options,
                                           struct PegampResult **out);

void pegamp_result_free(struct PegampResult *res);

// Length of the estimate, 0 for a null handle.
uintptr_t pegamp_result_len(const struct PegampResult *res);

uintptr_t pegamp_result_iterations(const struct PegampResult *res);

bool pegamp_result_converged(const struct PegampResult *res);

// Estimated noise variance.
double pegamp_result_noise_variance(const struct PegampResult *res);

// Copy the estimate into `dst`, which must hold `len` values with `len`
// equal to [`pegamp_result_len`].
enum PegampStatus pegamp_result_x_hat(const struct PegampResult *res, double *dst, uintptr_t len);

// Oracle state-evolution MSE for a Bernoulli-Gaussian signal. Writes the
// predictions for `t = 0..len` into `mse`.
enum PegampStatus pegamp_se_mse(double beta,
                                double sparsity,
                                double noise_variance,
                                uintptr_t mc_samples,
                                uint64_t seed,
                                double *mse,
                                uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEGAMP_H */
