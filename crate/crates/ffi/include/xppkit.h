#ifndef XPPKIT_H
#define XPPKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum XppStatus {
  XPP_STATUS_OK = 0,
  XPP_STATUS_NULL_ARGUMENT = 1,
  XPP_STATUS_INVALID_UTF8 = 2,
  XPP_STATUS_MODEL_PARSE = 3,
  XPP_STATUS_AUTO_PARSE = 4,
  XPP_STATUS_OUT_OF_RANGE = 5,
  XPP_STATUS_ANALYSIS = 6,
  XPP_STATUS_EXPORT = 7,
  XPP_STATUS_BUFFER_TOO_SMALL = 8,
} XppStatus;

/**
 * Parsed `.ode` model.
 */
typedef struct XppModel XppModel;

/**
 * Parsed `.auto` continuation file bound to a model.
 */
typedef struct XppRepo XppRepo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *xpp_last_error(void);

/**
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void xpp_string_free(char *s);

/**
 * Parse model source text.
 *
 * # Safety
 * `source` is a nul-terminated string; `out` is writable.
 */
enum XppStatus xpp_model_parse(const char *source, struct XppModel **out);

/**
 * # Safety
 * `model` is null or a live handle from [`xpp_model_parse`].
 */
void xpp_model_free(struct XppModel *model);

/**
 * Number of dynamical variables.
 *
 * # Safety
 * `model` is a live handle.
 */
size_t xpp_model_dim(const struct XppModel *model);

/**
 * Parse a continuation file against `model`. `with_labels` and
 * `with_orbits` are 0 or 1.
 *
 * # Safety
 * `model` is a live handle, `source` a nul-terminated string, `out` writable.
 */
enum XppStatus xpp_repo_parse(const struct XppModel *model,
                              const char *source,
                              int32_t with_labels,
                              int32_t with_orbits,
                              struct XppRepo **out);

/**
 * # Safety
 * `repo` is null or a live handle from [`xpp_repo_parse`].
 */
void xpp_repo_free(struct XppRepo *repo);

/**
 * # Safety
 * `repo` is a live handle.
 */
size_t xpp_repo_diagram_count(const struct XppRepo *repo);

/**
 * Warnings raised while loading.
 *
 * # Safety
 * `repo` is a live handle.
 */
size_t xpp_repo_warning_count(const struct XppRepo *repo);

/**
 * Summary line of diagram `index` (0-based).
 *
 * # Safety
 * `repo` is a live handle; `out` writable.
 */
enum XppStatus xpp_repo_summary(const struct XppRepo *repo, size_t index, char **out);

/**
 * Point, branch and labeled point counts of diagram `index`.
 *
 * # Safety
 * `repo` is a live handle; the out pointers are writable.
 */
enum XppStatus xpp_repo_diagram_sizes(const struct XppRepo *repo,
                                      size_t index,
                                      size_t *points,
                                      size_t *branches,
                                      size_t *labeled);

/**
 * SVG of diagram `index` with its labeled points. `axes` is null for the
 * default axes or a comma list such as `i0,v`; `style_json` is null or a
 * partial style document.
 *
 * # Safety
 * Handles are live; string arguments are null or nul-terminated; `out` writable.
 */
enum XppStatus xpp_repo_plot_svg(const struct XppModel *model,
                                 const struct XppRepo *repo,
                                 size_t index,
                                 const char *axes,
                                 const char *style_json,
                                 char **out);

/**
 * Freeze file text for one-parameter diagram `index`.
 *
 * # Safety
 * Handles are live; `out` writable.
 */
enum XppStatus xpp_repo_freeze(const struct XppModel *model,
                               const struct XppRepo *repo,
                               size_t index,
                               char **out);

/**
 * Average `expr` over every special trajectory of diagram `index`.
 *
 * Model parameters that are not hot are visible to the expression. The
 * value of the main continuation parameter and the average of each
 * trajectory go to `c` and `j`, which hold `capacity` entries; `count`
 * receives the trajectory count and `best` the 0-based index of the
 * smallest `|J|`. With too small a buffer nothing is written except
 * `count`, and the call returns `BufferTooSmall`.
 *
 * # Safety
 * Handles are live; `expr` is nul-terminated; `c` and `j` hold `capacity`
 * doubles or are null when `capacity` is 0.
 */
enum XppStatus xpp_repo_zero_average(const struct XppModel *model,
                                     const struct XppRepo *repo,
                                     size_t index,
                                     const char *expr,
                                     double *c,
                                     double *j,
                                     size_t capacity,
                                     size_t *count,
                                     size_t *best);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XPPKIT_H */
