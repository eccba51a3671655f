#ifndef RIS_SECRECY_H
#define RIS_SECRECY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdbool.h>

typedef enum RssStatus {
  RSS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RSS_STATUS_NULL = 1,
  RSS_STATUS_DOMAIN = 2,
  RSS_STATUS_DIMENSION = 3,
  /**
   * Exact enumeration would exceed the state budget.
   */
  RSS_STATUS_BUDGET = 4,
  RSS_STATUS_IO = 5,
  /**
   * Malformed JSON or text.
   */
  RSS_STATUS_PARSE = 6,
  /**
   * The library panicked; this is a bug.
   */
  RSS_STATUS_PANIC = 7,
} RssStatus;

/**
 * A finite-alphabet channel.
 */
typedef struct RssChannel RssChannel;

/**
 * Per-link SNR slopes of Bob and each eavesdropper.
 */
typedef struct RssCoefficients RssCoefficients;

/**
 * A scenario loaded from JSON.
 */
typedef struct RssScenario RssScenario;

/**
 * Power split and the secrecy rate it achieves.
 */
typedef struct RssAllocation {
  double p1;
  double p2;
  double pt;
  /**
   * Secrecy rate in nats, not clamped.
   */
  double rate;
  /**
   * Minorize-maximization steps taken (0 for the grid search).
   */
  size_t iterations;
  bool converged;
} RssAllocation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *rss_last_error_message(void);

/**
 * Parses a scenario from a NUL-terminated UTF-8 JSON document.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum RssStatus rss_scenario_from_json(const char *json, struct RssScenario **out);

/**
 * # Safety
 * `s` must come from [`rss_scenario_from_json`] and not be used afterwards.
 */
void rss_scenario_free(struct RssScenario *s);

/**
 * Transmit budget of the scenario in watts.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RssStatus rss_scenario_total_power_w(const struct RssScenario *s, double *out);

/**
 * SNR slopes of every link in the scenario.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RssStatus rss_scenario_coefficients(const struct RssScenario *s, struct RssCoefficients **out);

/**
 * Builds slopes directly: Bob's `mu1`, `mu2` and `eve_count` eavesdropper
 * pairs from `beta1[j]`, `beta2[j]`.
 *
 * # Safety
 * `beta1` and `beta2` must point to `eve_count` doubles each.
 */
enum RssStatus rss_coefficients_new(double mu1,
                                    double mu2,
                                    const double *beta1,
                                    const double *beta2,
                                    size_t eve_count,
                                    struct RssCoefficients **out);

/**
 * # Safety
 * `c` must come from this library and not be used afterwards.
 */
void rss_coefficients_free(struct RssCoefficients *c);

/**
 * Secrecy rate in nats at `(p1, p2)`; may be negative.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RssStatus rss_secrecy_rate(const struct RssCoefficients *c, double p1, double p2, double *out);

/**
 * Optimizes the split of budget `pt`. Zero `max_iterations` or non-positive
 * `tolerance` select the defaults (500 and 1e-9).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RssStatus rss_optimize(const struct RssCoefficients *c,
                            double pt,
                            size_t max_iterations,
                            double tolerance,
                            struct RssAllocation *out);

/**
 * Best grid point with spacing `resolution · pt`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RssStatus rss_grid_oracle(const struct RssCoefficients *c,
                               double pt,
                               double resolution,
                               struct RssAllocation *out);

/**
 * Channel from a row-major `inputs × outputs` matrix of `K(z | x)`.
 *
 * # Safety
 * `rows` must point to `inputs · outputs` doubles.
 */
enum RssStatus rss_channel_new(const double *rows,
                               size_t inputs,
                               size_t outputs,
                               struct RssChannel **out);

/**
 * # Safety
 * `ch` must come from [`rss_channel_new`] and not be used afterwards.
 */
void rss_channel_free(struct RssChannel *ch);

/**
 * Total variation distance of two probability vectors of length `len`.
 *
 * # Safety
 * `p` and `q` must point to `len` doubles.
 */
enum RssStatus rss_tv_distance(const double *p, const double *q, size_t len, double *out);

/**
 * Rényi divergence of order `alpha` (not 1) in nats; may be infinite.
 *
 * # Safety
 * `p` and `q` must point to `len` doubles.
 */
enum RssStatus rss_renyi_divergence(const double *p,
                                    const double *q,
                                    size_t len,
                                    double alpha,
                                    double *out);

/**
 * Mutual information in nats between the channel input, distributed as
 * `qx` (length = number of inputs), and its output.
 *
 * # Safety
 * `qx` must point to `len` doubles.
 */
enum RssStatus rss_mutual_information(const struct RssChannel *ch,
                                      const double *qx,
                                      size_t len,
                                      double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RIS_SECRECY_H */
