#ifndef HSK_H
#define HSK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Sketch family.
 */
typedef enum HskBackend {
  HSK_BACKEND_OFFLINE1D = 0,
  HSK_BACKEND_MULT1D = 1,
  HSK_BACKEND_DYN1D = 2,
  HSK_BACKEND_ADD1D = 3,
  HSK_BACKEND_ADD2D = 4,
} HskBackend;

/**
 * Result code of every fallible call.
 */
typedef enum HskStatus {
  HSK_STATUS_OK = 0,
  HSK_STATUS_NULL_ARGUMENT = 1,
  HSK_STATUS_INVALID_PARAMETER = 2,
  HSK_STATUS_DIMENSION_MISMATCH = 3,
  HSK_STATUS_OUT_OF_DOMAIN = 4,
  HSK_STATUS_UNSUPPORTED = 5,
  HSK_STATUS_FROZEN = 6,
  HSK_STATUS_BAD_FORMAT = 7,
  HSK_STATUS_BUFFER_TOO_SMALL = 8,
  HSK_STATUS_IO = 9,
  HSK_STATUS_OTHER_ERROR = 10,
  HSK_STATUS_PANIC = 11,
} HskStatus;

/**
 * Opaque sketch under construction.
 */
typedef struct HskBuilder HskBuilder;

/**
 * Opaque frozen sketch.
 */
typedef struct HskSketch HskSketch;

/**
 * Construction parameters. Start from [`hsk_build_options_default`].
 */
typedef struct HskBuildOptions {
  enum HskBackend backend;
  double epsilon;
  /**
   * Exponent of the hinge, 1 or 2 (2 only for the additive sketches).
   */
  uint32_t p;
  /**
   * Declared stream length.
   */
  uint64_t n_hint;
  uint64_t seed;
  /**
   * Universe bound of the streaming one-dimensional sketches.
   */
  uint64_t w;
  /**
   * Nonzero restricts mult1d input to integers in `[1, w]`.
   */
  uint8_t integer_universe;
  double c1;
  double c2;
  double c;
  /**
   * add1d domain `[-radius, radius]`.
   */
  double radius;
  /**
   * add2d domain `[lo, hi]^2`.
   */
  double lo;
  double hi;
} HskBuildOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hsk_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *hsk_last_error(void);

/**
 * Default options for `backend`.
 */
struct HskBuildOptions hsk_build_options_default(enum HskBackend backend,
                                                 double epsilon,
                                                 uint64_t n_hint,
                                                 uint64_t seed);

/**
 * Creates a builder; `*out` receives the handle.
 *
 * # Safety
 * `opts` and `out` must be valid pointers.
 */
enum HskStatus hsk_builder_new(const struct HskBuildOptions *opts, struct HskBuilder **out);

/**
 * Dimension of points accepted by the builder, 0 for NULL.
 *
 * # Safety
 * `b` must be NULL or a live builder.
 */
uintptr_t hsk_builder_dim(const struct HskBuilder *b);

/**
 * Inserts one point of `dim` coordinates.
 *
 * # Safety
 * `b` must be a live builder and `x` must point to `dim` doubles.
 */
enum HskStatus hsk_builder_update(struct HskBuilder *b, const double *x, uintptr_t dim);

/**
 * Inserts `count` points stored row-major, `dim` coordinates each.
 *
 * # Safety
 * `b` must be a live builder and `xs` must point to `count * dim` doubles.
 */
enum HskStatus hsk_builder_update_many(struct HskBuilder *b,
                                       const double *xs,
                                       uintptr_t count,
                                       uintptr_t dim);

/**
 * Freezes the builder into a sketch. The builder is consumed even on
 * failure and must not be used again.
 *
 * # Safety
 * `b` must be a live builder; `out` must be valid.
 */
enum HskStatus hsk_builder_finish(struct HskBuilder *b, struct HskSketch **out);

/**
 * Releases a builder. NULL is ignored.
 *
 * # Safety
 * `b` must be NULL or a live builder not used afterwards.
 */
void hsk_builder_free(struct HskBuilder *b);

/**
 * Estimated mean of `max{0, b - theta.x}^p` over the stream.
 *
 * # Safety
 * `s` must be a live sketch, `theta` must point to `dim` doubles and
 * `out` must be valid.
 */
enum HskStatus hsk_sketch_query(const struct HskSketch *s,
                                const double *theta,
                                uintptr_t dim,
                                double b,
                                double *out);

/**
 * Estimated sum of `max{0, b - theta.x}^p` over the stream.
 *
 * # Safety
 * Same as [`hsk_sketch_query`].
 */
enum HskStatus hsk_sketch_query_sum(const struct HskSketch *s,
                                    const double *theta,
                                    uintptr_t dim,
                                    double b,
                                    double *out);

/**
 * Number of points summarized, 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live sketch.
 */
uint64_t hsk_sketch_len(const struct HskSketch *s);

/**
 * Machine words retained, 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live sketch.
 */
uintptr_t hsk_sketch_space_words(const struct HskSketch *s);

/**
 * Point dimension, 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live sketch.
 */
uintptr_t hsk_sketch_dim(const struct HskSketch *s);

/**
 * Backend of the sketch.
 *
 * # Safety
 * `s` and `out` must be valid.
 */
enum HskStatus hsk_sketch_backend(const struct HskSketch *s, enum HskBackend *out);

/**
 * Serializes into `buf`. `*len` always receives the required size; with a
 * NULL or short buffer the call returns `BufferTooSmall` and writes nothing.
 *
 * # Safety
 * `s` and `len` must be valid; `buf` must be NULL or hold `cap` bytes.
 */
enum HskStatus hsk_sketch_serialize(const struct HskSketch *s,
                                    uint8_t *buf,
                                    uintptr_t cap,
                                    uintptr_t *len);

/**
 * Loads a sketch from bytes produced by [`hsk_sketch_serialize`] or the
 * command-line tool.
 *
 * # Safety
 * `bytes` must hold `len` bytes; `out` must be valid.
 */
enum HskStatus hsk_sketch_deserialize(const uint8_t *bytes, uintptr_t len, struct HskSketch **out);

/**
 * Releases a sketch. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a live sketch not used afterwards.
 */
void hsk_sketch_free(struct HskSketch *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSK_H */
