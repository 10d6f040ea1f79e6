#ifndef LATENCY_SNN_H
#define LATENCY_SNN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsnnStatus {
  LSNN_STATUS_OK = 0,
  LSNN_STATUS_NULL_POINTER = 1,
  LSNN_STATUS_INVALID_ARGUMENT = 2,
  LSNN_STATUS_DIMENSION = 3,
  LSNN_STATUS_IO = 4,
  LSNN_STATUS_DATA = 5,
  LSNN_STATUS_PANIC = 6,
} LsnnStatus;

/**
 * Trained or freshly initialized network plus the retina that feeds it.
 */
typedef struct LsnnNetwork LsnnNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a network for `rows × cols` images with random initial weights.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LsnnStatus lsnn_network_new(uint32_t rows,
                                 uint32_t cols,
                                 uint32_t n_neurons,
                                 double theta,
                                 uint32_t wta_k,
                                 uint64_t seed,
                                 struct LsnnNetwork **out);

/**
 * Releases a handle. Null is accepted.
 *
 * # Safety
 * `net` must be null or a handle from this library not yet freed.
 */
void lsnn_network_free(struct LsnnNetwork *net);

/**
 * Loads a checkpoint for `rows × cols` images. The stored weights must have
 * `2 · rows · cols` afferents.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LsnnStatus lsnn_network_load(const char *path,
                                  uint32_t rows,
                                  uint32_t cols,
                                  uint32_t wta_k,
                                  struct LsnnNetwork **out);

/**
 * # Safety
 * `net` must be a live handle and `path` a NUL-terminated string.
 */
enum LsnnStatus lsnn_network_save(const struct LsnnNetwork *net, const char *path);

/**
 * Number of afferents, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t lsnn_network_n_afferents(const struct LsnnNetwork *net);

/**
 * Number of neurons, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t lsnn_network_n_neurons(const struct LsnnNetwork *net);

/**
 * Trains on `n_images` row-major 8-bit images packed back to back.
 *
 * # Safety
 * `net` must be a live handle; `images` must hold `n_images · rows · cols`
 * bytes; `epochs_run` may be null.
 */
enum LsnnStatus lsnn_network_train(struct LsnnNetwork *net,
                                   const uint8_t *images,
                                   size_t n_images,
                                   uint32_t epochs,
                                   uint64_t shuffle_seed,
                                   uint32_t *epochs_run);

/**
 * Test-mode response to one image: `responses[i]` is 1 if neuron `i` fired.
 *
 * # Safety
 * `image` must hold `rows · cols` bytes and `responses` `len` bytes;
 * `spike_count` may be null.
 */
enum LsnnStatus lsnn_network_respond(const struct LsnnNetwork *net,
                                     const uint8_t *image,
                                     uint8_t *responses,
                                     size_t len,
                                     uint32_t *spike_count);

/**
 * Reconstructs one image from its test-mode response into `out`
 * (`rows · cols` doubles) and writes the reconstruction error.
 *
 * # Safety
 * `image` must hold `rows · cols` bytes and `out` `len` doubles; `error`
 * may be null.
 */
enum LsnnStatus lsnn_network_reconstruct(const struct LsnnNetwork *net,
                                         const uint8_t *image,
                                         double *out,
                                         size_t len,
                                         double *error);

/**
 * Copies the afferent-major weight matrix into `out`.
 *
 * # Safety
 * `out` must hold `len` floats.
 */
enum LsnnStatus lsnn_network_weights(const struct LsnnNetwork *net, float *out, size_t len);

/**
 * Weight change under the default learning rule.
 *
 * # Safety
 * `out` must be writable.
 */
enum LsnnStatus lsnn_stdp_delta(double w, bool pre_before_post, double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the length the full message
 * needs including the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be null or hold `len` bytes.
 */
size_t lsnn_last_error_message(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *lsnn_status_str(enum LsnnStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATENCY_SNN_H */
