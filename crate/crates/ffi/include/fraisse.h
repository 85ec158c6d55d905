#ifndef FRAISSE_H
#define FRAISSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum {
  FR_STATUS_OK = 0,
  FR_STATUS_NULL_POINTER = 1,
  FR_STATUS_INVALID_UTF8 = 2,
  FR_STATUS_PARSE = 3,
  FR_STATUS_INVALID_ARGUMENT = 4,
  FR_STATUS_SIGNATURE_MISMATCH = 5,
  FR_STATUS_BUDGET = 6,
  FR_STATUS_PANIC = 7,
} FrStatus;

// Opaque structure handle.
typedef struct FrStructure FrStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next call into the library from the same thread.
const char *fr_last_error_message(void);

// # Safety
// `s` is NULL or a string returned by this library and not yet freed.
void fr_string_free(char *s);

// Parses a structure document.
//
// # Safety
// `json` is a NUL-terminated string; `out` is writable.
FrStatus fr_structure_from_json(const char *json, FrStructure **out);

// Canonical JSON for `s`; free the result with `fr_string_free`.
//
// # Safety
// `s` is a live handle; `out` is writable.
FrStatus fr_structure_to_json(const FrStructure *s, char **out);

// # Safety
// `s` is NULL or a handle returned by this library and not yet freed.
void fr_structure_free(FrStructure *s);

// Number of elements.
//
// # Safety
// `s` is a live handle; `out` is writable.
FrStatus fr_structure_len(const FrStructure *s, size_t *out);

// The structure `F_n`.
//
// # Safety
// `out` is writable.
FrStatus fr_gen_fn(size_t n, FrStructure **out);

// The linear-equation template over a group written like `"2"` or `"2x3"`.
//
// # Safety
// `group` is a NUL-terminated string; `out` is writable.
FrStatus fr_gen_template(const char *group, FrStructure **out);

// Searches for a homomorphism from `a` to `b`. Sets `*found`, and when one
// exists and `map_json` is not NULL, writes the map as a JSON object.
//
// # Safety
// `a`, `b` are live handles; `found` is writable; `map_json` is NULL or
// writable.
FrStatus fr_find_homomorphism(const FrStructure *a,
                              const FrStructure *b,
                              bool *found,
                              char **map_json);

// # Safety
// `a`, `b` are live handles; `out` is writable.
FrStatus fr_is_isomorphic(const FrStructure *a, const FrStructure *b, bool *out);

// (k,l)-consistency of `instance` with respect to `tmpl`. A `budget` of
// 0 uses the library default.
//
// # Safety
// `instance`, `tmpl` are live handles; `out` is writable.
FrStatus fr_is_consistent(const FrStructure *instance,
                          const FrStructure *tmpl,
                          size_t k,
                          size_t l,
                          size_t budget,
                          bool *out);

// The counting-condition report as JSON.
//
// # Safety
// `out` is writable.
FrStatus fr_bounds_report(uint64_t n,
                          uint64_t r,
                          uint64_t t,
                          uint64_t m,
                          bool include_equality,
                          char **out);

// Least `m ≤ cap` satisfying the counting condition. `*found` is false
// when there is none.
//
// # Safety
// `found` and `out` are writable.
FrStatus fr_minimal_m(uint64_t n,
                      uint64_t r,
                      uint64_t t,
                      uint64_t cap,
                      bool include_equality,
                      bool *found,
                      uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAISSE_H */
