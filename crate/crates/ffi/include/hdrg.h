#ifndef HDRG_H
#define HDRG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HdrgStatus {
  HDRG_STATUS_OK = 0,
  HDRG_STATUS_NULL_POINTER = 1,
  HDRG_STATUS_INVALID_CODE = 2,
  HDRG_STATUS_INVALID_PROBABILITY = 3,
  HDRG_STATUS_INVALID_ARGUMENT = 4,
  HDRG_STATUS_NON_EMPTY_SYNDROME = 5,
  HDRG_STATUS_DECODER_FAILED = 6,
  HDRG_STATUS_BUFFER_TOO_SMALL = 7,
  HDRG_STATUS_PANIC = 8,
} HdrgStatus;

typedef enum HdrgDecoderKind {
  HDRG_DECODER_KIND_MWM = 0,
  HDRG_DECODER_KIND_BH = 1,
  HDRG_DECODER_KIND_ABCB = 2,
  HDRG_DECODER_KIND_ED = 3,
} HdrgDecoderKind;

/**
 * A sparse Z_d chain on the edges of a code.
 */
typedef struct HdrgChain HdrgChain;

/**
 * Code parameters `(d, L)`.
 */
typedef struct HdrgCode HdrgCode;

/**
 * A configured decoder.
 */
typedef struct HdrgDecoder HdrgDecoder;

typedef struct HdrgBatchConfig {
  enum HdrgDecoderKind decoder;
  uint32_t d;
  uint32_t l;
  double p;
  uint64_t trials;
  /**
   * Zero for perfect measurements, otherwise the number of faulty rounds.
   */
  uint32_t rounds;
  bool shortcuts;
  double lambda;
  bool dm1_factor;
  uint64_t seed;
} HdrgBatchConfig;

typedef struct HdrgBatchStats {
  uint64_t trials;
  uint64_t failures;
  double p_logical;
  double sigma;
  double mean_iterations;
} HdrgBatchStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hdrg_version(void);

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null when `len` is 0.
 * `needed`, if non-null, receives the message length including the NUL.
 */
enum HdrgStatus hdrg_last_error(char *buf, size_t len, size_t *needed);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HdrgStatus hdrg_code_new(uint32_t d, uint32_t l, struct HdrgCode **out);

/**
 * # Safety
 * `code` must come from [`hdrg_code_new`] and not be used afterwards. Null is ignored.
 */
void hdrg_code_free(struct HdrgCode *code);

/**
 * Number of edges, `2 L^2`.
 *
 * # Safety
 * `code` must be a live handle.
 */
size_t hdrg_code_num_edges(const struct HdrgCode *code);

/**
 * Creates an empty chain.
 */
struct HdrgChain *hdrg_chain_new(void);

/**
 * # Safety
 * `chain` must come from this library and not be used afterwards. Null is ignored.
 */
void hdrg_chain_free(struct HdrgChain *chain);

/**
 * Adds `g` (mod d) to edge `edge`.
 *
 * # Safety
 * `chain` and `code` must be live handles.
 */
enum HdrgStatus hdrg_chain_add(struct HdrgChain *chain,
                               const struct HdrgCode *code,
                               size_t edge,
                               uint32_t g);

/**
 * Exponent on `edge`, 0 when absent or when `chain` is null.
 *
 * # Safety
 * `chain` must be a live handle or null.
 */
uint32_t hdrg_chain_get(const struct HdrgChain *chain, size_t edge);

/**
 * Number of edges with a nonzero exponent.
 *
 * # Safety
 * `chain` must be a live handle or null.
 */
size_t hdrg_chain_len(const struct HdrgChain *chain);

/**
 * Replaces `chain` with a uniform noise sample for `(seed, trial)`.
 *
 * # Safety
 * `chain` and `code` must be live handles.
 */
enum HdrgStatus hdrg_chain_sample(struct HdrgChain *chain,
                                  const struct HdrgCode *code,
                                  double p,
                                  uint64_t seed,
                                  uint64_t trial);

/**
 * Number of defects in the syndrome of `chain`.
 *
 * # Safety
 * `chain` and `code` must be live handles; `out` must be writable.
 */
enum HdrgStatus hdrg_syndrome_size(const struct HdrgCode *code,
                                   const struct HdrgChain *chain,
                                   size_t *out);

/**
 * Homology class of a closed chain.
 *
 * # Safety
 * `code` and `chain` must be live handles; `gx` and `gy` must be writable.
 */
enum HdrgStatus hdrg_logical_class(const struct HdrgCode *code,
                                   const struct HdrgChain *chain,
                                   uint32_t *gx,
                                   uint32_t *gy);

/**
 * Creates a decoder. `p` is the assumed error rate (used by the MWM
 * weights); `lambda` and `dm1_factor` only affect the MWM decoder.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HdrgStatus hdrg_decoder_new(enum HdrgDecoderKind kind,
                                 double p,
                                 double lambda,
                                 bool shortcuts,
                                 bool dm1_factor,
                                 struct HdrgDecoder **out);

/**
 * # Safety
 * `dec` must come from [`hdrg_decoder_new`] and not be used afterwards. Null is ignored.
 */
void hdrg_decoder_free(struct HdrgDecoder *dec);

/**
 * Decodes the syndrome of `error` (perfect measurements) and returns a
 * new recovery chain in `*recovery`, to be released with [`hdrg_chain_free`].
 *
 * # Safety
 * All handles must be live; `recovery` must be writable; `iterations`
 * may be null.
 */
enum HdrgStatus hdrg_decode(const struct HdrgDecoder *dec,
                            const struct HdrgCode *code,
                            const struct HdrgChain *error,
                            struct HdrgChain **recovery,
                            size_t *iterations);

/**
 * Runs a seeded Monte Carlo batch on the Z_d model.
 *
 * # Safety
 * `cfg` must be readable and `out` writable.
 */
enum HdrgStatus hdrg_run_batch(const struct HdrgBatchConfig *cfg, struct HdrgBatchStats *out);

/**
 * Hashing bound for qudit dimension `d`; NaN for `d < 2`.
 */
double hdrg_hashing_bound(uint32_t d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDRG_H */
