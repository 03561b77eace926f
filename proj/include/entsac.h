/* entsac — entropy-constrained soft actor-critic, C API.
 *
 * All functions return ENTSAC_OK (0) on success or a nonzero status code;
 * entsac_last_error() describes the most recent failure on the calling
 * thread. Strings returned through char** out-parameters are owned by the
 * caller and must be released with entsac_string_free().
 */
#ifndef ENTSAC_H
#define ENTSAC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum entsac_status {
    ENTSAC_OK = 0,
    ENTSAC_ERR_INVALID_ARG = 1,
    ENTSAC_ERR_IO = 2,
    ENTSAC_ERR_CONFIG = 3,
    ENTSAC_ERR_NUMERIC = 4,
    ENTSAC_ERR_INFEASIBLE = 5,
    ENTSAC_ERR_INTERNAL = 6
} entsac_status;

const char* entsac_version(void);
const char* entsac_status_name(int status);

/* Thread-local message for the last failing call on this thread. */
const char* entsac_last_error(void);

void entsac_string_free(char* s);

/* Complete default run configuration as a JSON document. */
int entsac_default_config(char** config_json_out);

/* Runs a training experiment described by a full config JSON document into
 * run_dir (config.json, metrics.csv, periodic checkpoints,
 * checkpoint_final.json). outcome_json_out (optional) receives a summary. */
int entsac_train(const char* config_json, const char* run_dir, char** outcome_json_out);

/* Deterministic-policy evaluation of a finished run directory. */
int entsac_evaluate(const char* run_dir, int episodes, uint64_t seed,
                    const char* trajectory_csv_or_null, char** stats_json_out);

/* Tabular duality verification. mdp_json may be NULL: a random
 * 2-state/2-action MDP with the given horizon is drawn from seed. The
 * report (p*, d*, gap, per-step alpha*, slackness, recursion cross-check)
 * is returned as JSON. */
int entsac_verify(const char* mdp_json_or_null, double h0, int grid_resolution, uint64_t seed,
                  int random_horizon, char** report_json_out);

/* Paired corrected vs missing-target experiment (H0 = 0.5, alpha0 = 1).
 * base_config_json may be NULL for defaults. Produces two run directories,
 * summary.json and alpha_comparison.svg under out_dir. */
int entsac_fig1(const char* base_config_json_or_null, const char* out_dir,
                char** summary_json_out);

/* Line chart from a run directory's metrics.csv; columns is a
 * comma-separated list (e.g. "alpha,log_alpha"). */
int entsac_plot(const char* run_dir, const char* columns, const char* out_svg);

/* ---- environment handle ------------------------------------------------ */

typedef struct entsac_env entsac_env;

int entsac_env_create(const char* env_id, uint64_t seed, entsac_env** out);
void entsac_env_destroy(entsac_env* env);
int entsac_env_obs_dim(const entsac_env* env, size_t* out);
int entsac_env_action_dim(const entsac_env* env, size_t* out);
int entsac_env_action_bounds(const entsac_env* env, double* low, double* high, size_t len);
int entsac_env_reset(entsac_env* env, double* obs, size_t obs_len);
int entsac_env_step(entsac_env* env, const double* action, size_t action_len, double* obs,
                    size_t obs_len, double* reward, int* truncated, int* terminal);

/* ---- policy handle ------------------------------------------------------ */

typedef struct entsac_policy entsac_policy;

/* Loads config.json + checkpoint_final.json from a run directory. */
int entsac_policy_load(const char* run_dir, entsac_policy** out);
void entsac_policy_destroy(entsac_policy* policy);
int entsac_policy_reseed(entsac_policy* policy, uint64_t seed);
/* deterministic != 0 takes the distribution mean. log_prob_out optional. */
int entsac_policy_act(entsac_policy* policy, const double* obs, size_t obs_len, int deterministic,
                      double* action, size_t action_len, double* log_prob_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ENTSAC_H */
