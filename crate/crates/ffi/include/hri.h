#ifndef HRI_H
#define HRI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum HriStatus {
  HRI_STATUS_OK = 0,
  HRI_STATUS_NULL_POINTER = 1,
  HRI_STATUS_INVALID_UTF8 = 2,
  HRI_STATUS_INVALID_CONFIG = 3,
  HRI_STATUS_UNKNOWN_PARAMETER = 4,
  HRI_STATUS_SIMULATION = 5,
  HRI_STATUS_IO = 6,
  HRI_STATUS_OUT_OF_RANGE = 7,
  HRI_STATUS_BUFFER_TOO_SMALL = 8,
  HRI_STATUS_NO_VALUE = 9,
  HRI_STATUS_INVALID_ARGUMENT = 10,
  HRI_STATUS_PANIC = 99,
} HriStatus;

typedef enum HriOutcome {
  HRI_OUTCOME_ROBOT_REACHED_GOAL = 0,
  HRI_OUTCOME_HUMAN_REACHED_GOAL = 1,
  HRI_OUTCOME_BOTH_REACHED = 2,
  HRI_OUTCOME_COLLISION = 3,
  HRI_OUTCOME_TIMEOUT = 4,
} HriOutcome;

/*
 A finished episode together with the configuration that produced it.
 */
typedef struct HriEpisode HriEpisode;

/*
 A validated scenario configuration.
 */
typedef struct HriScenario HriScenario;

/*
 Scalar fields of one trace row.
 */
typedef struct HriStep {
  uint64_t t;
  /*
   Danger signal, 0 or 1.
   */
  uint8_t d_r;
  uint8_t fallback_used;
  double p_aware;
  /*
   Largest planned collision probability over the horizon.
   */
  double max_p_coll;
} HriStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *hri_version(void);

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call into this library on the same
 thread.
 */
const char *hri_last_error_message(void);

/*
 Loads and validates a scenario file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HriStatus hri_scenario_load(const char *path, struct HriScenario **out);

/*
 Parses and validates a scenario from TOML text.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum HriStatus hri_scenario_from_str(const char *text, struct HriScenario **out);

/*
 Overrides one scalar parameter, as the CLI's `sweep --param` does. The
 scenario is left unchanged when the new value fails validation.

 # Safety
 `scenario` must come from this library; `name` must be NUL-terminated.
 */
enum HriStatus hri_scenario_set_param(struct HriScenario *scenario, const char *name, double value);

/*
 Sets the random seed.

 # Safety
 `scenario` must come from this library.
 */
enum HriStatus hri_scenario_set_seed(struct HriScenario *scenario, uint64_t seed);

/*
 Number of coordinates per agent state; 0 for a null handle.

 # Safety
 `scenario` must be null or come from this library.
 */
size_t hri_scenario_dim(const struct HriScenario *scenario);

/*
 Releases a scenario. Null is ignored.

 # Safety
 `scenario` must be null or come from this library, and not be used again.
 */
void hri_scenario_free(struct HriScenario *scenario);

/*
 Runs one closed-loop episode to completion.

 # Safety
 `scenario` must come from this library; `out` must be writable.
 */
enum HriStatus hri_episode_run(const struct HriScenario *scenario, struct HriEpisode **out);

/*
 Releases an episode. Null is ignored.

 # Safety
 `episode` must be null or come from this library, and not be used again.
 */
void hri_episode_free(struct HriEpisode *episode);

/*
 # Safety
 `episode` must come from this library; `out` must be writable.
 */
enum HriStatus hri_episode_outcome(const struct HriEpisode *episode, enum HriOutcome *out);

/*
 Number of executed steps; 0 for a null handle.

 # Safety
 `episode` must be null or come from this library.
 */
size_t hri_episode_len(const struct HriEpisode *episode);

/*
 Number of collision-profile entries per step (the planning horizon).

 # Safety
 `episode` must be null or come from this library.
 */
size_t hri_episode_horizon(const struct HriEpisode *episode);

/*
 Steps until the robot reached its goal; `NoValue` if it never did.

 # Safety
 `episode` must come from this library; `out` must be writable.
 */
enum HriStatus hri_episode_steps_to_robot_goal(const struct HriEpisode *episode, uint64_t *out);

/*
 Scalar fields of step `index`.

 # Safety
 `episode` must come from this library; `out` must be writable.
 */
enum HriStatus hri_episode_step(const struct HriEpisode *episode,
                                size_t index,
                                struct HriStep *out);

/*
 Robot and human positions at the start of step `index`. Each buffer
 must hold at least `hri_scenario_dim` values.

 # Safety
 `episode` must come from this library; the buffers must be writable for
 `len` values.
 */
enum HriStatus hri_episode_positions(const struct HriEpisode *episode,
                                     size_t index,
                                     double *robot,
                                     double *human,
                                     size_t len);

/*
 Planned collision probabilities for horizon steps `1..=T_R` at step
 `index`.

 # Safety
 `episode` must come from this library; `out` must be writable for `len`
 values.
 */
enum HriStatus hri_episode_collision_profile(const struct HriEpisode *episode,
                                             size_t index,
                                             double *out,
                                             size_t len);

/*
 Writes the episode trace as CSV, in the same format as `hri run`.

 # Safety
 `episode` must come from this library; `path` must be NUL-terminated.
 */
enum HriStatus hri_episode_write_trace(const struct HriEpisode *episode, const char *path);

/*
 One Bayesian update of `P(beta = 1)` after observing action `observed`,
 given that action's distribution under each hypothesis.

 # Safety
 `unaware` and `aware` must be readable for `n` values; `out` writable.
 */
enum HriStatus hri_belief_update(double p_aware,
                                 const double *unaware,
                                 const double *aware,
                                 size_t n,
                                 size_t observed,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HRI_H */
