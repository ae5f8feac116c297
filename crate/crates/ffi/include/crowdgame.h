#ifndef CROWDGAME_H
#define CROWDGAME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CG_PROFILE_CC 0

#define CG_PROFILE_CS 1

#define CG_PROFILE_SC 2

#define CG_PROFILE_SS 3

#define CG_REGION_CC_UNIQUE 0

#define CG_REGION_SS_UNIQUE 1

#define CG_REGION_BOTH 2

#define CG_CASE_BOTH_IN_HOUSE 0

#define CG_CASE_NO_CONTEST 1

#define CG_CASE_UNILATERAL_REACH 2

#define CG_CASE_CONTESTED 3

#define CG_CONDITIONING_ALL 0

#define CG_CONDITIONING_CONTESTED 1

/**
 * Sentinel for "no forced first-stage profile" in [`cg_simulate`].
 */
#define CG_PROFILE_NONE 4294967295

#define CG_STAT_MEAN_U1 0

#define CG_STAT_MEAN_U2 1

#define CG_STAT_ATTACK_RATE 2

#define CG_STAT_WEAK_WIN_RATE 3

#define CG_STAT_TOTAL_COST 4

#define CG_STAT_TOTAL_UTILITY 5

#define CG_STAT_WINNER_EFFECTIVE_PRODUCTIVITY 6

#define CG_STAT_CONTESTED_FRACTION 7

typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_OUT_OF_RANGE = 2,
  CG_STATUS_INVALID_ARGUMENT = 3,
  CG_STATUS_UNSOLVABLE = 4,
  CG_STATUS_UNKNOWN_POLICY = 5,
  CG_STATUS_INVALID_UTF8 = 6,
  CG_STATUS_PANIC = 7,
} CgStatus;

/**
 * Opaque game parameters.
 */
typedef struct CgParams CgParams;

/**
 * Opaque Monte Carlo report.
 */
typedef struct CgSimReport CgSimReport;

/**
 * Ex-ante first-stage payoffs; `xy_u1` is player 1's payoff when player 1
 * plays `x` and player 2 plays `y`.
 */
typedef struct CgPayoffTable {
  double cc_u1;
  double cc_u2;
  double cs_u1;
  double cs_u2;
  double sc_u1;
  double sc_u2;
  double ss_u1;
  double ss_u2;
} CgPayoffTable;

typedef struct CgSecondStage {
  /**
   * One of the `CG_CASE_*` constants.
   */
  uint32_t subgame_case;
  /**
   * 1 or 2.
   */
  uint32_t strong_player;
  double lambda_strong;
  double lambda_weak;
  double attack_prob_1;
  double attack_prob_2;
  double u1;
  double u2;
} CgSecondStage;

typedef struct CgEstimate {
  double mean;
  double std_error;
  uint64_t n;
} CgEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *cg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cg_version(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum CgStatus cg_params_new(double q, double d, struct CgParams **out);

/**
 * # Safety
 * `params` must be NULL or a handle from [`cg_params_new`] not yet freed.
 */
void cg_params_free(struct CgParams *params);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum CgStatus cg_overlap_probability(double d, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum CgStatus cg_lead_probability(double d, double *out);

/**
 * Mixed equilibrium of the contested attack subgame at cost `q`.
 *
 * # Safety
 * Both out-pointers must be valid for writes.
 */
enum CgStatus cg_solve_contested(double q, double *lambda_strong, double *lambda_weak);

/**
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_ex_ante_payoffs(const struct CgParams *params, struct CgPayoffTable *out);

/**
 * Writes a bitmask of pure first-stage equilibria: bit `CG_PROFILE_*` is
 * set for each equilibrium profile.
 *
 * # Safety
 * `params` must be a live handle and `out_mask` valid for writes.
 */
enum CgStatus cg_pure_equilibria(const struct CgParams *params, uint32_t *out_mask);

/**
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_classify_region(const struct CgParams *params, uint32_t *out);

/**
 * Second-stage equilibrium after first-stage `profile` with realised
 * productivities `p1`, `p2`. In-house players must have productivity 0.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_second_stage(const struct CgParams *params,
                              uint32_t profile,
                              double p1,
                              double p2,
                              struct CgSecondStage *out);

/**
 * Runs a Monte Carlo batch. Policies are looked up by name; `profile` is a
 * `CG_PROFILE_*` code or `CG_PROFILE_NONE`; `partitions` of 0 selects the
 * default.
 *
 * # Safety
 * `params` must be a live handle, the policy names NUL-terminated strings,
 * and `out` valid for writes.
 */
enum CgStatus cg_simulate(const struct CgParams *params,
                          uint64_t trials,
                          uint64_t seed,
                          const char *policy1,
                          const char *policy2,
                          uint32_t conditioning,
                          uint32_t profile,
                          uint32_t partitions,
                          struct CgSimReport **out);

/**
 * # Safety
 * `report` must be NULL or a handle from [`cg_simulate`] not yet freed.
 */
void cg_sim_report_free(struct CgSimReport *report);

/**
 * Reads one statistic (`CG_STAT_*`) from a report.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_sim_report_estimate(const struct CgSimReport *report,
                                     uint32_t stat,
                                     struct CgEstimate *out);

/**
 * Number of trials that passed the conditioning filter.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_sim_report_trials_counted(const struct CgSimReport *report, uint64_t *out);

/**
 * Serialises a report as JSON. Free the string with [`cg_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum CgStatus cg_sim_report_json(const struct CgSimReport *report, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void cg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWDGAME_H */
