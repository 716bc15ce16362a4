#ifndef HILBERTLAB_H
#define HILBERTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_UTF8 = 2,
  HL_STATUS_SCHEMA = 3,
  HL_STATUS_DIMENSION_MISMATCH = 4,
  HL_STATUS_POINT_OUTSIDE_BODY = 5,
  HL_STATUS_NOT_AN_AUTOMORPHISM = 6,
  HL_STATUS_BALL_CAP_EXCEEDED = 7,
  HL_STATUS_INVALID_MATRIX = 8,
  HL_STATUS_DEGENERATE_BODY = 9,
  HL_STATUS_NON_CONVERGENCE = 10,
  HL_STATUS_OTHER = 11,
} HlStatus;

// Opaque convex body.
typedef struct HlBody HlBody;

// Opaque projective map, stored with determinant of absolute value one.
typedef struct HlMap HlMap;

// Opaque scan report.
typedef struct HlReport HlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *hl_last_error(void);

// Parses a body description in the JSON body format.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum HlStatus hl_body_from_json(const char *json, struct HlBody **out);

// The round unit ball in dimension `n`, or NULL when `n == 0`.
struct HlBody *hl_body_unit_ball(uintptr_t n);

// # Safety
// `body` must be a live handle.
uintptr_t hl_body_dim(const struct HlBody *body);

// JSON form of a body; release with [`hl_string_free`].
//
// # Safety
// `body` must be a live handle.
char *hl_body_to_json(const struct HlBody *body);

// # Safety
// `body` must be NULL or a handle not yet freed.
void hl_body_free(struct HlBody *body);

// Builds a map from an `(n+1) x (n+1)` row-major matrix; `size` is `n + 1`.
//
// # Safety
// `rows` must point to `size * size` doubles and `out` must be valid.
enum HlStatus hl_map_from_rows(const double *rows, uintptr_t size, struct HlMap **out);

// Matrix size `n + 1` of a map.
//
// # Safety
// `map` must be a live handle.
uintptr_t hl_map_size(const struct HlMap *map);

// Copies the normalized matrix, row-major, into `buf` of `len` doubles.
//
// # Safety
// `map` must be a live handle and `buf` must hold `len` doubles.
enum HlStatus hl_map_matrix(const struct HlMap *map, double *buf, uintptr_t len);

// # Safety
// `map` must be NULL or a handle not yet freed.
void hl_map_free(struct HlMap *map);

// Hilbert distance between two points given by `len` coordinates each.
//
// # Safety
// `body` must be a live handle, `x` and `y` must hold `len` doubles and
// `out` must be valid.
enum HlStatus hl_distance(const struct HlBody *body,
                          const double *x,
                          const double *y,
                          uintptr_t len,
                          double *out);

// Displacement `d(x, g x)` of an automorphism.
//
// # Safety
// Handles must be live, `x` must hold `len` doubles and `out` must be valid.
enum HlStatus hl_displacement(const struct HlBody *body,
                              const struct HlMap *map,
                              const double *x,
                              uintptr_t len,
                              double *out);

// Map carrying the marked body `(body, x)` to a standard pair. When
// `standard_body` is not NULL it receives the image body.
//
// # Safety
// `body` must be live, `x` must hold `len` doubles, `out_map` must be valid
// and `standard_body` NULL or valid.
enum HlStatus hl_standardize(const struct HlBody *body,
                             const double *x,
                             uintptr_t len,
                             struct HlMap **out_map,
                             struct HlBody **standard_body);

// Runs a scenario given as JSON text. A nonzero `seed` overrides the
// scenario's seed.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum HlStatus hl_scan(const char *json, uint64_t seed, struct HlReport **out);

// JSON report; release with [`hl_string_free`].
//
// # Safety
// `report` must be a live handle.
char *hl_report_json(const struct HlReport *report);

// CSV report; release with [`hl_string_free`].
//
// # Safety
// `report` must be a live handle.
char *hl_report_csv(const struct HlReport *report);

// # Safety
// `report` must be NULL or a handle not yet freed.
void hl_report_free(struct HlReport *report);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void hl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HILBERTLAB_H */
