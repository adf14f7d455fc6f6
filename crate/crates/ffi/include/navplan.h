#ifndef NAVPLAN_H
#define NAVPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NavplanStatus {
  NAVPLAN_STATUS_OK = 0,
  NAVPLAN_STATUS_NULL_POINTER = 1,
  NAVPLAN_STATUS_INVALID_UTF8 = 2,
  NAVPLAN_STATUS_PARSE = 3,
  NAVPLAN_STATUS_INVALID_ARGUMENT = 4,
  NAVPLAN_STATUS_SOLVER = 5,
  NAVPLAN_STATUS_PANIC = 6,
} NavplanStatus;

typedef enum NavplanSolveStatus {
  NAVPLAN_SOLVE_STATUS_OPTIMAL = 0,
  NAVPLAN_SOLVE_STATUS_INFEASIBLE_CERTIFIED = 1,
  NAVPLAN_SOLVE_STATUS_BOUND_EXCEEDED = 2,
  NAVPLAN_SOLVE_STATUS_ITERATION_LIMIT = 3,
} NavplanSolveStatus;

typedef enum NavplanOutcome {
  NAVPLAN_OUTCOME_GOAL_REACHED = 0,
  NAVPLAN_OUTCOME_STUCK = 1,
  NAVPLAN_OUTCOME_TIMEOUT = 2,
} NavplanOutcome;

/**
 * Opaque episode log.
 */
typedef struct NavplanEpisode NavplanEpisode;

/**
 * Opaque MIQP fixture.
 */
typedef struct NavplanMiqp NavplanMiqp;

/**
 * Opaque scenario.
 */
typedef struct NavplanScenario NavplanScenario;

typedef struct NavplanSolveResult {
  enum NavplanSolveStatus status;
  size_t iterations;
  double j_lower;
  double j_upper;
} NavplanSolveResult;

typedef struct NavplanEpisodeSummary {
  enum NavplanOutcome outcome;
  size_t replans;
  size_t clearance_violations;
  /**
   * Meters.
   */
  double min_clearance;
  /**
   * Simulated seconds.
   */
  double duration;
} NavplanEpisodeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *navplan_last_error(void);

/**
 * Parses a JSON MIQP fixture.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum NavplanStatus navplan_miqp_from_json(const char *json, struct NavplanMiqp **out);

/**
 * Solves a fixture by branch and bound. Pass `INFINITY` for no acceptance
 * threshold and 0 for the default relaxation budget.
 *
 * # Safety
 * `problem` must come from [`navplan_miqp_from_json`]; `out` must be writable.
 */
enum NavplanStatus navplan_miqp_solve(const struct NavplanMiqp *problem,
                                      double j_max,
                                      size_t iteration_limit,
                                      struct NavplanSolveResult *out);

/**
 * # Safety
 * `problem` must be null or come from [`navplan_miqp_from_json`], and not
 * be used afterwards.
 */
void navplan_miqp_free(struct NavplanMiqp *problem);

/**
 * Parses a TOML scenario file.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
enum NavplanStatus navplan_scenario_from_toml(const char *toml, struct NavplanScenario **out);

/**
 * Built-in scenario with one corridor closed by an unmapped wall.
 *
 * # Safety
 * `out` must be writable.
 */
enum NavplanStatus navplan_scenario_blocked_corridor(uint64_t seed, struct NavplanScenario **out);

/**
 * # Safety
 * `scenario` must be null or a live scenario handle, not used afterwards.
 */
void navplan_scenario_free(struct NavplanScenario *scenario);

/**
 * Runs a closed-loop episode. `overrides` is null or newline-separated
 * `key.path=value` assignments in TOML syntax.
 *
 * # Safety
 * `scenario` must be a live handle, `overrides` null or nul-terminated,
 * `out` writable.
 */
enum NavplanStatus navplan_run_episode(const struct NavplanScenario *scenario,
                                       const char *overrides,
                                       struct NavplanEpisode **out);

/**
 * # Safety
 * `episode` must be a live handle; `out` writable.
 */
enum NavplanStatus navplan_episode_summary(const struct NavplanEpisode *episode,
                                           struct NavplanEpisodeSummary *out);

/**
 * The episode log as JSON lines. Release with [`navplan_string_free`].
 *
 * # Safety
 * `episode` must be a live handle; `out` writable.
 */
enum NavplanStatus navplan_episode_jsonl(const struct NavplanEpisode *episode, char **out);

/**
 * # Safety
 * `episode` must be null or a live handle, not used afterwards.
 */
void navplan_episode_free(struct NavplanEpisode *episode);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not used
 * afterwards.
 */
void navplan_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAVPLAN_H */
