#ifndef GLG_H
#define GLG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum GlgStatus {
  GLG_STATUS_OK = 0,
  GLG_STATUS_NULL_POINTER = 1,
  GLG_STATUS_INVALID_ARGUMENT = 2,
  GLG_STATUS_DIMENSION = 3,
  GLG_STATUS_TOPOLOGY = 4,
  GLG_STATUS_ESTIMATION = 5,
  GLG_STATUS_NUMERICAL = 6,
  GLG_STATUS_PARSE = 7,
  GLG_STATUS_IO = 8,
  GLG_STATUS_PANIC = 9,
} GlgStatus;

/**
 * Values accepted by the `filter` arguments.
 */
typedef enum GlgFilter {
  GLG_FILTER_HAAR = 0,
  GLG_FILTER_DAUB4 = 1,
} GlgFilter;

/**
 * Values accepted by the `direction` arguments.
 */
typedef enum GlgDirection {
  GLG_DIRECTION_HORIZONTAL = 0,
  GLG_DIRECTION_VERTICAL = 1,
  GLG_DIRECTION_DIAGONAL = 2,
} GlgDirection;

/**
 * Square grayscale image.
 */
typedef struct GlgImage GlgImage;

/**
 * Tied GLG parameters.
 */
typedef struct GlgParams GlgParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *glg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *glg_version(void);

/**
 * Image from `side * side` row-major pixels.
 *
 * # Safety
 * `pixels` must point to `side * side` readable doubles and `out` must be writable.
 */
enum GlgStatus glg_image_new(const double *pixels, size_t side, struct GlgImage **out);

/**
 * Reads a PGM or PNG image.
 *
 * # Safety
 * `file` must be a NUL-terminated string and `out` writable.
 */
enum GlgStatus glg_image_read(const char *file, struct GlgImage **out);

/**
 * Writes an image as 8-bit PGM, clipped to its declared range.
 *
 * # Safety
 * `image` must be a live handle and `file` a NUL-terminated string.
 */
enum GlgStatus glg_image_write_pgm(const struct GlgImage *image, const char *file);

/**
 * Side length of the image, or 0 for NULL.
 *
 * # Safety
 * `image` must be NULL or a live handle.
 */
size_t glg_image_side(const struct GlgImage *image);

/**
 * Copies the row-major pixels into `out`, which must hold exactly `side * side` values.
 *
 * # Safety
 * `image` must be a live handle and `out` must point to `len` writable doubles.
 */
enum GlgStatus glg_image_pixels(const struct GlgImage *image, double *out, size_t len);

/**
 * Releases an image. NULL is ignored.
 *
 * # Safety
 * `image` must be NULL or a handle not yet freed.
 */
void glg_image_free(struct GlgImage *image);

/**
 * PSNR of `test` against `reference` in dB; identical images give +infinity.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum GlgStatus glg_psnr(const struct GlgImage *reference, const struct GlgImage *test, double *out);

/**
 * Adds white Gaussian noise of standard deviation `sigma_eps`.
 *
 * # Safety
 * `image` must be a live handle and `out` writable.
 */
enum GlgStatus glg_add_noise(const struct GlgImage *image,
                             double sigma_eps,
                             uint64_t seed,
                             struct GlgImage **out);

/**
 * Posterior-mean denoising with default fit settings.
 *
 * # Safety
 * `noisy` must be a live handle and `out` writable.
 */
enum GlgStatus glg_denoise(const struct GlgImage *noisy,
                           uint32_t filter_code,
                           size_t levels,
                           double sigma_eps,
                           struct GlgImage **out);

/**
 * Edge map as a 0/1 image. Bit `l - 1` of `masked_levels` drops tree level `l`
 * (1 = coarsest). `edge_count` may be NULL.
 *
 * # Safety
 * `image` must be a live handle, `out` writable and `edge_count` NULL or writable.
 */
enum GlgStatus glg_detect_edges(const struct GlgImage *image,
                                uint32_t filter_code,
                                size_t levels,
                                double fractile,
                                uint32_t masked_levels,
                                struct GlgImage **out,
                                size_t *edge_count);

/**
 * Fits the quadtree forest of one subband orientation of an image.
 *
 * # Safety
 * `image` must be a live handle and `out` writable.
 */
enum GlgStatus glg_fit_image(const struct GlgImage *image,
                             uint32_t filter_code,
                             size_t levels,
                             uint32_t direction_code,
                             struct GlgParams **out);

/**
 * Fits `trees` trees stored row-major, each in breadth-first node order.
 *
 * # Safety
 * `coefficients` must point to `trees * node_count` readable doubles, where
 * `node_count` follows from `levels` and `branching`; `out` must be writable.
 */
enum GlgStatus glg_fit_forest(const double *coefficients,
                              size_t trees,
                              size_t levels,
                              size_t branching,
                              struct GlgParams **out);

/**
 * Parameters from their components; each transition array holds `transitions`
 * values (`levels - 1`) and may be NULL when `transitions` is 0.
 *
 * # Safety
 * The arrays must hold `transitions` readable doubles and `out` must be writable.
 */
enum GlgStatus glg_params_new(double mu0,
                              double sigma0_sq,
                              const double *alpha,
                              const double *beta,
                              const double *kappa_sq,
                              size_t transitions,
                              struct GlgParams **out);

/**
 * Number of tree levels, or 0 for NULL.
 *
 * # Safety
 * `params` must be NULL or a live handle.
 */
size_t glg_params_levels(const struct GlgParams *params);

/**
 * Copies `(mu0, sigma0_sq, alpha.., beta.., kappa_sq..)` into `out`, which
 * must hold exactly `3 * levels - 1` values.
 *
 * # Safety
 * `params` must be a live handle and `out` must point to `len` writable doubles.
 */
enum GlgStatus glg_params_values(const struct GlgParams *params, double *out, size_t len);

/**
 * Releases a parameter set. NULL is ignored.
 *
 * # Safety
 * `params` must be NULL or a handle not yet freed.
 */
void glg_params_free(struct GlgParams *params);

/**
 * Posterior mean of a coefficient observed as `v` with noise variance `noise_var`
 * under the level prior `N(mu, sigma_sq)` on its log-variance.
 *
 * # Safety
 * `out` must be writable.
 */
enum GlgStatus glg_shrink(double v, double mu, double sigma_sq, double noise_var, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLG_H */
