#ifndef HYDRA_H
#define HYDRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HydraStatus {
  HYDRA_STATUS_OK = 0,
  HYDRA_STATUS_NULL_ARGUMENT = 1,
  HYDRA_STATUS_INVALID_UTF8 = 2,
  HYDRA_STATUS_PARSE = 3,
  HYDRA_STATUS_INDEX_OUT_OF_RANGE = 4,
  HYDRA_STATUS_GAME = 5,
  HYDRA_STATUS_PANIC = 6,
} HydraStatus;

// A game in progress.
typedef struct HydraGame HydraGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *hydra_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void hydra_string_free(char *s);

// Parses and sort-checks `text`, writing its printed normal form to `*out`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum HydraStatus hydra_parse(const char *text, char **out);

// Starts a game at level 0. `labels` is a comma-separated label list and
// may be NULL for the empty set.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum HydraStatus hydra_game_new(const char *hydra, const char *labels, struct HydraGame **out);

// Releases a game. NULL is ignored.
//
// # Safety
// `game` must come from [`hydra_game_new`] and not have been freed.
void hydra_game_free(struct HydraGame *game);

// # Safety
// `game` must be a live handle; `out` must be writable.
enum HydraStatus hydra_game_move_count(const struct HydraGame *game, size_t *out);

// Plays the move at `index` of the current enumeration.
//
// # Safety
// `game` must be a live handle.
enum HydraStatus hydra_game_apply(struct HydraGame *game, size_t index);

// # Safety
// `game` must be a live handle; `out` must be writable.
enum HydraStatus hydra_game_level(const struct HydraGame *game, uint64_t *out);

// Current hydra in the text syntax.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
enum HydraStatus hydra_game_hydra(const struct HydraGame *game, char **out);

// Current measure `d_Ω(o(H)#o(lb))`, printed.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
enum HydraStatus hydra_game_measure(const struct HydraGame *game, char **out);

// Current state as a `game_state` JSON document.
//
// # Safety
// `game` must be a live handle; `out` must be writable.
enum HydraStatus hydra_game_state_json(const struct HydraGame *game, char **out);

// Longest play from `hydra` with at most `budget` positions searched.
// `*exact` is set to 1 when the value is exact and 0 for a lower bound.
//
// # Safety
// String arguments must be NUL-terminated (`labels` may be NULL); `out`
// and `exact` must be writable.
enum HydraStatus hydra_height(const char *hydra,
                              const char *labels,
                              size_t budget,
                              uint64_t *out,
                              int32_t *exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYDRA_H */
