#ifndef NOMALAB_H
#define NOMALAB_H

/* Generated from the Rust sources by cbindgen; edit those instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum NlStatus {
  /**
   * Success; out parameters are filled in.
   */
  NlStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NlStatus_NullPointer = 1,
  /**
   * Arguments were structurally or numerically invalid.
   */
  NlStatus_InvalidArgument = 2,
  /**
   * A numerical routine failed on otherwise valid input.
   */
  NlStatus_NumericalFailure = 3,
  /**
   * The library panicked; state may be inconsistent, report a bug.
   */
  NlStatus_Panic = 4,
} NlStatus;

/**
 * An opaque signal constellation.
 */
typedef struct NlConstellation NlConstellation;

/**
 * An opaque two-user superimposed constellation.
 */
typedef struct NlSuperConstellation NlSuperConstellation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Renders a status code (the numeric value of [`NlStatus`]) as a static,
 * NUL-terminated string.
 */
const char *nl_status_message(uint32_t status);

/**
 * Creates a standard constellation. `kind` is 0 for PSK, 1 for QAM;
 * `order` must be a supported power of two. On success `*out` owns the
 * handle; release it with [`nl_constellation_free`].
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NlStatus nl_constellation_standard(uint32_t kind, size_t order, struct NlConstellation **out);

/**
 * Creates a rotated copy of a constellation (`theta` in radians).
 *
 * # Safety
 * `constellation` must be a live handle and `out` a valid pointer.
 */
enum NlStatus nl_constellation_rotated(const struct NlConstellation *constellation,
                                       double theta,
                                       struct NlConstellation **out);

/**
 * Writes the number of points of a constellation.
 *
 * # Safety
 * `constellation` must be a live handle and `order` a valid pointer.
 */
enum NlStatus nl_constellation_order(const struct NlConstellation *constellation, size_t *order);

/**
 * Releases a constellation handle; null is ignored.
 *
 * # Safety
 * `constellation` must come from this library and not be freed twice.
 */
void nl_constellation_free(struct NlConstellation *constellation);

/**
 * Superimposes two constellations with power share `alpha` on the first
 * and total power `power`. On success `*out` owns the handle; release it
 * with [`nl_super_constellation_free`].
 *
 * # Safety
 * `first` and `second` must be live handles and `out` a valid pointer.
 */
enum NlStatus nl_super_constellation_new(const struct NlConstellation *first,
                                         const struct NlConstellation *second,
                                         double alpha,
                                         double power,
                                         struct NlSuperConstellation **out);

/**
 * Writes the number of composite points (the product of the two orders).
 *
 * # Safety
 * `sc` must be a live handle and `len` a valid pointer.
 */
enum NlStatus nl_super_constellation_len(const struct NlSuperConstellation *sc, size_t *len);

/**
 * Writes how many composite points are pairwise distinct under tolerance
 * `tol`.
 *
 * # Safety
 * `sc` must be a live handle and `count` a valid pointer.
 */
enum NlStatus nl_super_constellation_distinct_count(const struct NlSuperConstellation *sc,
                                                    double tol,
                                                    size_t *count);

/**
 * Writes the minimum distance between two composite points.
 *
 * # Safety
 * `sc` must be a live handle and `distance` a valid pointer.
 */
enum NlStatus nl_super_constellation_min_distance(const struct NlSuperConstellation *sc,
                                                  double *distance);

/**
 * Writes composite point `index` as a real/imaginary pair.
 *
 * # Safety
 * `sc` must be a live handle; `re` and `im` must be valid pointers.
 */
enum NlStatus nl_super_constellation_point(const struct NlSuperConstellation *sc,
                                           size_t index,
                                           double *re,
                                           double *im);

/**
 * Releases a super-constellation handle; null is ignored.
 *
 * # Safety
 * `sc` must come from this library and not be freed twice.
 */
void nl_super_constellation_free(struct NlSuperConstellation *sc);

/**
 * Downlink superposition-coding rates. `powers` and `gains_sq` hold
 * `users` entries, gains sorted non-increasing; per-user rates land in
 * `per_user` (`users` entries) and their total in `sum`.
 *
 * # Safety
 * All pointers must be valid for the stated lengths.
 */
enum NlStatus nl_noma_downlink_rates(const double *powers,
                                     const double *gains_sq,
                                     size_t users,
                                     double sigma2,
                                     double *per_user,
                                     double *sum);

/**
 * The two corner points of the two-user multiple-access region. Each
 * output holds `[rate_1, rate_2, sum]`; at vertex A user 1 is decoded
 * last (interference free), at vertex B user 2 is.
 *
 * # Safety
 * `vertex_a` and `vertex_b` must each hold three doubles.
 */
enum NlStatus nl_mac_vertices(double p1,
                              double p2,
                              double g1_sq,
                              double g2_sq,
                              double sigma2,
                              double *vertex_a,
                              double *vertex_b);

/**
 * Spectral efficiency of a modulation-and-coding entry: `log2(m)` times
 * code rate `r_num / r_den`, for constellation size `m`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NlStatus nl_mcs_spectral_efficiency(uint32_t m, uint32_t r_num, uint32_t r_den, double *out);

/**
 * Gaussian achievable rates of a symbol-offset uplink under successive
 * decoding. Arrays `gains_re`, `gains_im`, `powers`, `delays` and `order`
 * hold `users` entries; `order` lists user indices, first decoded first.
 * `normalization` is 0 for bits per Hz of real bandwidth, 1 for bits per
 * complex symbol. Per-user rates (indexed by user) land in `per_user`.
 *
 * # Safety
 * All pointers must be valid for `users` entries.
 */
enum NlStatus nl_anoma_gaussian_rates(const double *gains_re,
                                      const double *gains_im,
                                      const double *powers,
                                      const double *delays,
                                      size_t users,
                                      double rolloff,
                                      size_t frame_len,
                                      const size_t *order,
                                      double sigma2,
                                      uint32_t normalization,
                                      double *per_user);

/**
 * Squared free Euclidean distance of the bundled 4-state trellis code
 * over 8-PSK.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NlStatus nl_tcm_free_distance_4state_8psk(double *out);

/**
 * Audits the bundled 6 x 9 low-density signature matrix. `col_weights`
 * receives 9 entries, `row_weights` 6; `max_overlap` the largest number
 * of resources shared by any two users and `overload` the user-to-resource
 * ratio.
 *
 * # Safety
 * `col_weights` must hold 9 entries, `row_weights` 6; the scalar pointers
 * must be valid.
 */
enum NlStatus nl_lds_6x9_audit(size_t *col_weights,
                               size_t *row_weights,
                               size_t *max_overlap,
                               double *overload);

/**
 * Exact bit error rate of Gray-mapped QPSK over AWGN at `ebn0_db`
 * (`0.5 * erfc(sqrt(Eb/N0))`). Total function, no failure modes.
 */
double nl_qpsk_awgn_reference(double ebn0_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMALAB_H */
