#ifndef EVIDENCER_H
#define EVIDENCER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every call.
 */
typedef enum EvxStatus {
  EVX_STATUS_OK = 0,
  EVX_STATUS_NULL_ARGUMENT = 1,
  EVX_STATUS_INVALID_UTF8 = 2,
  EVX_STATUS_INVALID_ARGUMENT = 3,
  EVX_STATUS_IO = 4,
  EVX_STATUS_INDEX = 5,
  EVX_STATUS_RESOURCE = 6,
  EVX_STATUS_QUERY = 7,
  EVX_STATUS_OUT_OF_RANGE = 8,
  EVX_STATUS_PANIC = 99,
} EvxStatus;

typedef enum EvxEvidenceType {
  EVX_EVIDENCE_TYPE_STUDY = 0,
  EVX_EVIDENCE_TYPE_EXPERT = 1,
} EvxEvidenceType;

/**
 * Retrieved candidates, in retrieval order.
 */
typedef struct EvxCandidates EvxCandidates;

/**
 * A loaded index with its redirect table and, optionally, cascades.
 */
typedef struct EvxEngine EvxEngine;

/**
 * Borrowed view of one candidate. Strings stay valid until the owning
 * `EvxCandidates` is freed.
 */
typedef struct EvxCandidate {
  const char *doc_id;
  uint32_t sent_idx;
  enum EvxEvidenceType evidence_type;
  const char *query_id;
  const char *text;
} EvxCandidate;

typedef struct EvxTTest {
  double t;
  /**
   * Two-sided.
   */
  double p;
  double df;
} EvxTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *evx_last_error(void);

/**
 * Library version as a static string.
 */
const char *evx_version(void);

/**
 * Loads an index file and a redirect table. `cascades_path` may be null, in
 * which case only [`evx_retrieve_query`] is available.
 *
 * # Safety
 * Path arguments must be null or nul-terminated strings; `out` must be a
 * valid pointer.
 */
enum EvxStatus evx_engine_open(const char *index_path,
                               const char *redirects_path,
                               const char *cascades_path,
                               struct EvxEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from [`evx_engine_open`] not yet freed.
 */
void evx_engine_free(struct EvxEngine *engine);

/**
 * # Safety
 * `engine` must be a live handle and `out` a valid pointer.
 */
enum EvxStatus evx_engine_sentence_count(const struct EvxEngine *engine, size_t *out);

/**
 * Runs both cascades for a motion given by its topic (a title or redirect
 * surface form) and optional action (null for none).
 *
 * # Safety
 * `engine` must be a live handle, strings nul-terminated (or null where
 * allowed) and `out` a valid pointer.
 */
enum EvxStatus evx_retrieve(const struct EvxEngine *engine,
                            const char *topic,
                            const char *action,
                            struct EvxCandidates **out);

/**
 * Runs one query written in the query language, e.g.
 * `study: lex(study) TOPIC gap<=3`.
 *
 * # Safety
 * As for [`evx_retrieve`].
 */
enum EvxStatus evx_retrieve_query(const struct EvxEngine *engine,
                                  const char *query,
                                  const char *topic,
                                  const char *action,
                                  struct EvxCandidates **out);

/**
 * # Safety
 * `candidates` must be a live handle and `out` a valid pointer.
 */
enum EvxStatus evx_candidates_len(const struct EvxCandidates *candidates, size_t *out);

/**
 * # Safety
 * `candidates` must be a live handle and `out` a valid pointer.
 */
enum EvxStatus evx_candidates_get(const struct EvxCandidates *candidates,
                                  size_t i,
                                  struct EvxCandidate *out);

/**
 * # Safety
 * `candidates` must be null or a live handle.
 */
void evx_candidates_free(struct EvxCandidates *candidates);

/**
 * Cohen's kappa of two binary label arrays (0 or 1) of length `n`.
 *
 * # Safety
 * `a` and `b` must point to `n` readable bytes; `out` must be valid.
 */
enum EvxStatus evx_cohen_kappa(const uint8_t *a, const uint8_t *b, size_t n, double *out);

/**
 * Two-sided Welch's t-test.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` readable doubles; `out` must be
 * valid.
 */
enum EvxStatus evx_welch_t_test(const double *a,
                                size_t na,
                                const double *b,
                                size_t nb,
                                struct EvxTTest *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVIDENCER_H */
