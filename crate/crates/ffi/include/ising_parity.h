#ifndef ISING_PARITY_H
#define ISING_PARITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum IpStatus {
  IP_STATUS_OK = 0,
  IP_STATUS_INVALID_ARGUMENT = 1,
  IP_STATUS_NUMERICAL = 2,
  IP_STATUS_NULL_POINTER = 3,
  IP_STATUS_PANIC = 4,
} IpStatus;

typedef enum IpCorrelation {
  IP_CORRELATION_PERFECT = 0,
  IP_CORRELATION_IID = 1,
  IP_CORRELATION_EXPONENTIAL = 2,
} IpCorrelation;

typedef enum IpDistance {
  IP_DISTANCE_LINEAR = 0,
  IP_DISTANCE_RING = 1,
} IpDistance;

typedef enum IpDisorder {
  IP_DISORDER_GAUSSIAN_IID = 0,
  IP_DISORDER_GAUSSIAN_PERFECT = 1,
  IP_DISORDER_GAUSSIAN_CORRELATED = 2,
  // `strength` is the full width W of the uniform distribution.
  IP_DISORDER_UNIFORM_IID = 3,
} IpDisorder;

typedef enum IpPolicy {
  IP_POLICY_REJECT_SAMPLE = 0,
  IP_POLICY_REJECT_RUN = 1,
} IpPolicy;

// Opaque coupling vector.
typedef struct IpCouplings IpCouplings;

// Opaque disorder ensemble.
typedef struct IpEnsemble IpEnsemble;

// Summary statistics of a Monte Carlo run.
typedef struct IpMonteCarloSummary {
  size_t n_samples;
  size_t n_rejected;
  double sigma;
  double mean_utility;
  // Standard error of `mean_utility`.
  double std_error;
  double mean_density;
  double clean_utility;
  double clean_density;
} IpMonteCarloSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ip_version(void);

// Copy the last error message of this thread into `buffer`, truncated and
// NUL-terminated. Returns the full message length in bytes, excluding the
// terminator, or 0 when there is no error.
//
// # Safety
// `buffer` must be valid for `capacity` bytes or null.
size_t ip_last_error_message(char *buffer, size_t capacity);

// Create a coupling vector from `len` positive fields.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be writable.
enum IpStatus ip_couplings_new(const double *values, size_t len, struct IpCouplings **out);

// Create `n_sites` equal fields `g`.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_couplings_uniform(double g, size_t n_sites, struct IpCouplings **out);

// Number of sites, 0 for a null handle.
//
// # Safety
// `handle` must come from this library or be null.
size_t ip_couplings_len(const struct IpCouplings *handle);

// # Safety
// `handle` must come from this library, be null, and not be used again.
void ip_couplings_free(struct IpCouplings *handle);

// Squared overlap of the ground state with the GHZ⁺ state.
//
// # Safety
// `handle` must come from this library; `out` must be writable.
enum IpStatus ip_ghz_overlap_squared(const struct IpCouplings *handle, double *out);

// Natural log of [`ip_ghz_overlap_squared`], finite far below underflow.
//
// # Safety
// `handle` must come from this library; `out` must be writable.
enum IpStatus ip_log_ghz_overlap_squared(const struct IpCouplings *handle, double *out);

// Log-odds utility of the parity game for the given couplings.
//
// # Safety
// `handle` must come from this library; `out` must be writable.
enum IpStatus ip_utility(const struct IpCouplings *handle, double *out);

// # Safety
// `out` must be writable.
enum IpStatus ip_utility_clean(double g, size_t n_sites, double *out);

// Large-N utility per site.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_advantage_density(double g, double *out);

// Field at which the utility density changes sign.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_advantage_boundary(double *out);

// # Safety
// `out` must be writable.
enum IpStatus ip_classical_bound(size_t n_players, double *out);

// # Safety
// `out` must be writable.
enum IpStatus ip_quantum_win_probability(double overlap_plus_sq,
                                         double overlap_minus_sq,
                                         double *out);

// First derivative of the clean utility with respect to a uniform field.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_chi_prime(double g, size_t n_sites, double *out);

// # Safety
// `out` must be writable.
enum IpStatus ip_chi_double_prime(double g, size_t n_sites, double *out);

// Sum of the diagonal second derivatives at a uniform field.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_laplacian(double g, size_t n_sites, double *out);

// Second variation of the utility under Gaussian disorder of strength
// `sigma`. Writes the shift `delta_u2` and the rescaled `delta_u2/(N σ²)`.
// `xi` is read only for the exponential kind.
//
// # Safety
// Both out-pointers must be writable.
enum IpStatus ip_second_variation(double g,
                                  size_t n_sites,
                                  enum IpCorrelation correlation,
                                  double xi,
                                  enum IpDistance distance_mode,
                                  double sigma,
                                  double *delta_u2,
                                  double *rescaled);

// Create a disorder ensemble around mean field `mean`. `strength` is σ
// for Gaussian kinds and the width W for the uniform kind; `xi` is read
// only for the correlated kind.
//
// # Safety
// `out` must be writable.
enum IpStatus ip_ensemble_new(double mean,
                              size_t n_sites,
                              enum IpDisorder kind,
                              double strength,
                              double xi,
                              enum IpDistance distance_mode,
                              enum IpPolicy policy,
                              struct IpEnsemble **out);

// # Safety
// `handle` must come from this library, be null, and not be used again.
void ip_ensemble_free(struct IpEnsemble *handle);

// Monte Carlo average of the utility over `n_samples` draws. Results are
// reproducible for a given seed and independent of the thread count.
//
// # Safety
// `handle` must come from this library; `out` must be writable.
enum IpStatus ip_monte_carlo(const struct IpEnsemble *handle,
                             size_t n_samples,
                             uint64_t seed,
                             struct IpMonteCarloSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISING_PARITY_H */
