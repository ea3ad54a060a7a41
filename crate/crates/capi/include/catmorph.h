/* C interface for the catmorph categorical-morphology library. */

#ifndef CATMORPH_H
#define CATMORPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of a C-ABI call.
 */
typedef enum CmStatus {
  /**
   * Success.
   */
  CM_STATUS_OK = 0,
  /**
   * A parameter is out of range or inconsistent.
   */
  CM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The data violates an invariant (simplex, positivity, file format).
   */
  CM_STATUS_INVALID_DATA = 2,
  /**
   * The operating system reported an I/O failure.
   */
  CM_STATUS_IO = 3,
  /**
   * A required pointer was null.
   */
  CM_STATUS_NULL_POINTER = 4,
  /**
   * Internal failure; details in the last error message.
   */
  CM_STATUS_INTERNAL = 5,
} CmStatus;

/**
 * Ball norms for structuring elements.
 */
typedef enum CmNorm {
  CM_NORM_CITY_BLOCK = 0,
  CM_NORM_CHESSBOARD = 1,
  CM_NORM_EUCLIDEAN = 2,
} CmNorm;

/**
 * Semantics of fractional protected mass in protected operations.
 */
typedef enum CmProtectionMode {
  /**
   * Only fully protected pixels block propagation; fractional protection
   * caps the operated channel pointwise.
   */
  CM_PROTECTION_MODE_LITERAL = 0,
  /**
   * Mass may only traverse pixels with room for it, evaluated over
   * quantized capacity levels.
   */
  CM_PROTECTION_MODE_CAPACITY = 1,
} CmProtectionMode;

/**
 * Opaque image handle: a categorical, Dirichlet or scalar image.
 */
typedef struct CmImage CmImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null when
 * no failure has been recorded. The pointer stays valid until the next
 * failing call on the same thread.
 */
const char *cm_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *cm_version(void);

/**
 * Create a categorical image from row-major, channel-interleaved values.
 * `values_len` must equal the pixel count times `channels`; every pixel
 * must lie on the probability simplex within the standard tolerance.
 *
 * # Safety
 * `shape` must point to `rank` readable values, `values` to `values_len`
 * readable doubles, and `out` must be a valid destination pointer.
 */
enum CmStatus cm_image_new_categorical(const uintptr_t *shape,
                                       uintptr_t rank,
                                       uintptr_t channels,
                                       const double *values,
                                       uintptr_t values_len,
                                       struct CmImage **out);

/**
 * Create a Dirichlet parameter image; every value must be positive and
 * finite.
 *
 * # Safety
 * As for [`cm_image_new_categorical`].
 */
enum CmStatus cm_image_new_dirichlet(const uintptr_t *shape,
                                     uintptr_t rank,
                                     uintptr_t channels,
                                     const double *values,
                                     uintptr_t values_len,
                                     struct CmImage **out);

/**
 * Release an image handle. Passing null is a no-op.
 *
 * # Safety
 * `img` must be a handle obtained from this library that has not been
 * freed yet.
 */
void cm_image_free(struct CmImage *img);

/**
 * Number of axes (1..=3).
 *
 * # Safety
 * `img` must be a live handle.
 */
uintptr_t cm_image_rank(const struct CmImage *img);

/**
 * Copy the extents into `out`, which must hold `cm_image_rank` values.
 *
 * # Safety
 * `img` must be a live handle and `out` writable for the rank.
 */
enum CmStatus cm_image_shape(const struct CmImage *img, uintptr_t *out);

/**
 * Channel count (1 for scalar payloads).
 *
 * # Safety
 * `img` must be a live handle.
 */
uintptr_t cm_image_channels(const struct CmImage *img);

/**
 * Total number of stored values (pixels × channels).
 *
 * # Safety
 * `img` must be a live handle.
 */
uintptr_t cm_image_value_count(const struct CmImage *img);

/**
 * Copy all values (row-major, channels innermost) into `out`.
 *
 * # Safety
 * `img` must be a live handle and `out` writable for `out_len` doubles.
 */
enum CmStatus cm_image_copy_values(const struct CmImage *img, double *out, uintptr_t out_len);

/**
 * Check a categorical image against the simplex constraint at `tol`.
 * Non-categorical images pass trivially.
 *
 * # Safety
 * `img` must be a live handle.
 */
enum CmStatus cm_image_validate(const struct CmImage *img, double tol);

/**
 * Dilate one category with a ball structuring element.
 *
 * # Safety
 * `img` must be a live categorical handle and `out` a valid destination.
 */
enum CmStatus cm_dilate_category(const struct CmImage *img,
                                 uintptr_t category,
                                 double radius,
                                 enum CmNorm norm,
                                 struct CmImage **out);

/**
 * Erode one category with a ball structuring element.
 *
 * # Safety
 * As for [`cm_dilate_category`].
 */
enum CmStatus cm_erode_category(const struct CmImage *img,
                                uintptr_t category,
                                double radius,
                                enum CmNorm norm,
                                struct CmImage **out);

/**
 * Open one category (erode, then dilate).
 *
 * # Safety
 * As for [`cm_dilate_category`].
 */
enum CmStatus cm_open_category(const struct CmImage *img,
                               uintptr_t category,
                               double radius,
                               enum CmNorm norm,
                               struct CmImage **out);

/**
 * Close one category (dilate, then erode).
 *
 * # Safety
 * As for [`cm_dilate_category`].
 */
enum CmStatus cm_close_category(const struct CmImage *img,
                                uintptr_t category,
                                double radius,
                                enum CmNorm norm,
                                struct CmImage **out);

/**
 * Dilate one category while the listed channels stay frozen and gate
 * propagation.
 *
 * # Safety
 * `img` must be a live categorical handle, `protected_channels` readable
 * for `protected_len` entries, `out` a valid destination.
 */
enum CmStatus cm_protected_dilate(const struct CmImage *img,
                                  uintptr_t category,
                                  double radius,
                                  enum CmNorm norm,
                                  const uintptr_t *protected_channels,
                                  uintptr_t protected_len,
                                  enum CmProtectionMode mode,
                                  struct CmImage **out);

/**
 * Erode one category under protection.
 *
 * # Safety
 * As for [`cm_protected_dilate`].
 */
enum CmStatus cm_protected_erode(const struct CmImage *img,
                                 uintptr_t category,
                                 double radius,
                                 enum CmNorm norm,
                                 const uintptr_t *protected_channels,
                                 uintptr_t protected_len,
                                 enum CmProtectionMode mode,
                                 struct CmImage **out);

/**
 * Open one category under protection.
 *
 * # Safety
 * As for [`cm_protected_dilate`].
 */
enum CmStatus cm_protected_open(const struct CmImage *img,
                                uintptr_t category,
                                double radius,
                                enum CmNorm norm,
                                const uintptr_t *protected_channels,
                                uintptr_t protected_len,
                                enum CmProtectionMode mode,
                                struct CmImage **out);

/**
 * Close one category under protection.
 *
 * # Safety
 * As for [`cm_protected_dilate`].
 */
enum CmStatus cm_protected_close(const struct CmImage *img,
                                 uintptr_t category,
                                 double radius,
                                 enum CmNorm norm,
                                 const uintptr_t *protected_channels,
                                 uintptr_t protected_len,
                                 enum CmProtectionMode mode,
                                 struct CmImage **out);

/**
 * Project a Dirichlet image to its expected categorical distribution.
 *
 * # Safety
 * `img` must be a live Dirichlet handle and `out` a valid destination.
 */
enum CmStatus cm_dirichlet_expectation(const struct CmImage *img, struct CmImage **out);

/**
 * Per-pixel Shannon entropy (nats) of a categorical image, written as a
 * scalar image handle.
 *
 * # Safety
 * `img` must be a live categorical handle and `out` a valid destination.
 */
enum CmStatus cm_entropy_map(const struct CmImage *img, struct CmImage **out);

/**
 * Per-pixel index of the most probable category (ties to the lowest
 * index), written into a caller buffer of pixel-count entries.
 *
 * # Safety
 * `img` must be a live categorical handle and `out` writable for
 * `out_len` entries.
 */
enum CmStatus cm_argmax_labels(const struct CmImage *img, uint32_t *out, uintptr_t out_len);

/**
 * Read a `.catd` container from disk.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid destination.
 */
enum CmStatus cm_read_catd(const char *path, struct CmImage **out);

/**
 * Write an image as a `.catd` container.
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
enum CmStatus cm_write_catd(const struct CmImage *img, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATMORPH_H */
