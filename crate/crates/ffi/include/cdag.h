#ifndef CDAG_H
#define CDAG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdagFormat {
  CDAG_FORMAT_TEXT = 0,
  CDAG_FORMAT_LATEX = 1,
  CDAG_FORMAT_JSON = 2,
} CdagFormat;

typedef enum CdagStatus {
  CDAG_STATUS_OK = 0,
  // The answer is no: not separated, not identifiable, rule does not apply.
  CDAG_STATUS_NEGATIVE = 1,
  CDAG_STATUS_NULL_ARGUMENT = 2,
  CDAG_STATUS_INVALID_UTF8 = 3,
  CDAG_STATUS_PARSE = 4,
  // Unknown names, overlapping sets, bad rule or format number.
  CDAG_STATUS_INVALID_QUERY = 5,
  CDAG_STATUS_PANIC = 6,
} CdagStatus;

// Parsed graph file.
typedef struct CdagGraph CdagGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses graph-file text. On success `*out` owns a graph to release with
// [`cdag_graph_free`].
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum CdagStatus cdag_graph_parse(const char *text, struct CdagGraph **out);

// # Safety
// `g` must come from [`cdag_graph_parse`] and not be freed twice. Null is ignored.
void cdag_graph_free(struct CdagGraph *g);

// Canonical graph-file text of `g`, released with [`cdag_string_free`].
//
// # Safety
// `g` must be a live graph and `out` a valid pointer.
enum CdagStatus cdag_graph_render(const struct CdagGraph *g, char **out);

// `Ok` if `x` and `y` are d-separated given `z` in the cluster graph,
// `Negative` if not.
//
// # Safety
// `g` must be a live graph; the sets are NUL-terminated strings or null.
enum CdagStatus cdag_dsep(const struct CdagGraph *g, const char *x, const char *y, const char *z);

// Identifies `P(y | do(x))`. `format` is a [`CdagFormat`] value. `Ok`
// puts the formula in `*out`; `Negative` puts a hedge description there. Release with [`cdag_string_free`].
//
// # Safety
// `g` must be a live graph, `x` and `y` NUL-terminated strings, `out` a
// valid pointer.
enum CdagStatus cdag_identify(const struct CdagGraph *g,
                              const char *x,
                              const char *y,
                              uint32_t format,
                              char **out);

// `Ok` if do-calculus rule `rule` (1, 2 or 3) licenses its equality for
// effect `y`, intervention `x`, the set `z` and context `w`.
//
// # Safety
// `g` must be a live graph; the sets are NUL-terminated strings or null.
enum CdagStatus cdag_docalc(const struct CdagGraph *g,
                            uint32_t rule,
                            const char *x,
                            const char *y,
                            const char *z,
                            const char *w);

// Message of the last failed call on this thread, empty after a success.
// Valid until the next call on the same thread.
const char *cdag_last_error(void);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void cdag_string_free(char *s);

const char *cdag_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDAG_H */
