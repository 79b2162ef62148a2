#ifndef GCH_H
#define GCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GchStatus {
  GCH_STATUS_OK = 0,
  GCH_STATUS_NULL_POINTER = 1,
  GCH_STATUS_INVALID_ARGUMENT = 2,
  GCH_STATUS_CONFIG = 3,
  GCH_STATUS_BREAKING = 4,
  GCH_STATUS_IO = 5,
  GCH_STATUS_SNAPSHOT = 6,
  GCH_STATUS_BUFFER_TOO_SMALL = 7,
  GCH_STATUS_STEP_LIMIT = 8,
  GCH_STATUS_PANIC = 99,
} GchStatus;

/**
 * Opaque simulation handle.
 */
typedef struct GchSimulation GchSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *gch_last_error_message(void);

/**
 * Creates a simulation from a TOML scenario document. Output paths in the
 * document are ignored.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum GchStatus gch_simulation_new(const char *config_toml, struct GchSimulation **out);

/**
 * Creates a simulation from a snapshot file. The model and step control come
 * from `config_toml`, whose `(k, p, b)` must match the snapshot.
 *
 * # Safety
 * `path` and `config_toml` must be NUL-terminated strings and `out` a
 * writable pointer.
 */
enum GchStatus gch_simulation_from_snapshot(const char *path,
                                            const char *config_toml,
                                            struct GchSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from this library that has not been freed.
 */
void gch_simulation_free(struct GchSimulation *sim);

/**
 * Takes one step with the configured step rule.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum GchStatus gch_simulation_step(struct GchSimulation *sim);

/**
 * Advances to `t_end`, clipping the last step to land on it exactly.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum GchStatus gch_simulation_advance(struct GchSimulation *sim, double t_end);

/**
 * Current simulation time.
 *
 * # Safety
 * `sim` must be a live handle and `out` a writable pointer.
 */
enum GchStatus gch_simulation_time(const struct GchSimulation *sim, double *out);

/**
 * Number of grid points.
 *
 * # Safety
 * `sim` must be a live handle and `out` a writable pointer.
 */
enum GchStatus gch_simulation_n_points(const struct GchSimulation *sim, uintptr_t *out);

/**
 * Copies the velocity samples into `buffer`, which must hold at least
 * `n_points` values.
 *
 * # Safety
 * `sim` must be a live handle and `buffer` must point to `len` writable
 * doubles.
 */
enum GchStatus gch_simulation_values(const struct GchSimulation *sim,
                                     double *buffer,
                                     uintptr_t len);

/**
 * The conserved energy `∫ u·m dx` of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` a writable pointer.
 */
enum GchStatus gch_simulation_i1(const struct GchSimulation *sim, double *out);

/**
 * Writes the current state as a snapshot file.
 *
 * # Safety
 * `sim` must be a live handle and `path` a NUL-terminated string.
 */
enum GchStatus gch_simulation_write_snapshot(const struct GchSimulation *sim, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCH_H */
