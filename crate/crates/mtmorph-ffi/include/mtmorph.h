#ifndef MTMORPH_H
#define MTMORPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which backend executes the search.
 */
typedef enum {
  MTM_ENGINE_INTERPRETER = 0,
  MTM_ENGINE_AFST = 1,
} MtmEngine;

/**
 * Which derivations survive filtering.
 */
typedef enum {
  MTM_MODE_FULL = 0,
  MTM_MODE_ALL = 1,
  MTM_MODE_BARE = 2,
} MtmMode;

/**
 * Result of every fallible call.
 */
typedef enum {
  /**
   * The call succeeded; out-parameters are filled in.
   */
  MTM_OK = 0,
  /**
   * A name (builtin, morpheme, tape) resolved to nothing.
   */
  MTM_UNKNOWN_NAME = 1,
  /**
   * Malformed grammar, lexicon, spec, or text.
   */
  MTM_INVALID = 2,
  /**
   * A required pointer argument was NULL.
   */
  MTM_NULL_ARGUMENT = 3,
} MtmStatus;

/**
 * An owned list of NUL-terminated strings.
 */
typedef struct MtmStrings MtmStrings;

/**
 * An immutable, loaded grammar-plus-lexicon pair.
 */
typedef struct MtmToolkit MtmToolkit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a toolkit from grammar and lexicon source text.
 *
 * # Safety
 * `grammar_src`, `lexicon_src` must be NUL-terminated strings; `out` must be
 * a valid pointer. On success `*out` owns the toolkit until
 * `mtm_toolkit_free`.
 */
MtmStatus mtm_toolkit_new(const char *grammar_src, const char *lexicon_src, MtmToolkit **out);

/**
 * Loads one of the built-in grammars (`arabic`, `english`, `ngbaka`) with
 * its built-in lexicon.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be a valid pointer.
 */
MtmStatus mtm_toolkit_builtin(const char *name, MtmToolkit **out);

/**
 * Frees a toolkit. NULL is allowed.
 *
 * # Safety
 * `tk` must be NULL or a pointer returned by a toolkit constructor, not yet
 * freed.
 */
void mtm_toolkit_free(MtmToolkit *tk);

/**
 * Synthesizes the surface forms for a morpheme spec `tape=id,id tape=id`.
 * Distinct surfaces are returned sorted.
 *
 * # Safety
 * `tk` must be a live toolkit, `spec` a NUL-terminated string, `out` a valid
 * pointer. On success `*out` owns the strings until `mtm_strings_free`.
 */
MtmStatus mtm_generate(const MtmToolkit *tk,
                       const char *spec,
                       MtmMode mode,
                       MtmEngine engine,
                       MtmStrings **out);

/**
 * Recognizes a surface form. Each result line is a morpheme spec in the
 * same `tape=id,id tape=id` format `mtm_generate` accepts.
 *
 * # Safety
 * `tk` must be a live toolkit, `text` a NUL-terminated string, `out` a
 * valid pointer. On success `*out` owns the strings until
 * `mtm_strings_free`.
 */
MtmStatus mtm_analyze(const MtmToolkit *tk,
                      const char *text,
                      MtmMode mode,
                      MtmEngine engine,
                      MtmStrings **out);

/**
 * Number of strings in the list. NULL yields 0.
 *
 * # Safety
 * `s` must be NULL or a live string list.
 */
size_t mtm_strings_len(const MtmStrings *s);

/**
 * Borrows the i-th string; NULL when out of range. The pointer lives as
 * long as the list.
 *
 * # Safety
 * `s` must be NULL or a live string list.
 */
const char *mtm_strings_get(const MtmStrings *s, size_t i);

/**
 * Frees a string list. NULL is allowed.
 *
 * # Safety
 * `s` must be NULL or a pointer returned through an out-parameter, not yet
 * freed.
 */
void mtm_strings_free(MtmStrings *s);

/**
 * Message describing this thread's most recent failure. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *mtm_last_error(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MTMORPH_H */
