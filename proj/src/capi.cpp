#include "entsac.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include <json.hpp>

#include "entsac/chart.hpp"
#include "entsac/config.hpp"
#include "entsac/dual.hpp"
#include "entsac/errors.hpp"
#include "entsac/pendulum.hpp"
#include "entsac/sac.hpp"
#include "entsac/trainer.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Maps C++ exceptions onto status codes.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const entsac::ContractError& e) {
        return fail(ENTSAC_ERR_INVALID_ARG, e.what());
    } catch (const entsac::ConfigError& e) {
        return fail(ENTSAC_ERR_CONFIG, e.what());
    } catch (const entsac::IoError& e) {
        return fail(ENTSAC_ERR_IO, e.what());
    } catch (const entsac::NumericError& e) {
        return fail(ENTSAC_ERR_NUMERIC, e.what());
    } catch (const entsac::InfeasibleError& e) {
        return fail(ENTSAC_ERR_INFEASIBLE, e.what());
    } catch (const std::exception& e) {
        return fail(ENTSAC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(ENTSAC_ERR_INTERNAL, "unknown error");
    }
}

}  // namespace

extern "C" {

struct entsac_env {
    entsac::PendulumEnv env;
    explicit entsac_env(uint64_t seed) : env(seed) {}
};

struct entsac_policy {
    entsac::SacAgent agent;
    entsac::Rng rng;
    entsac_policy(entsac::SacAgent a, uint64_t seed)
        : agent(std::move(a)), rng(entsac::Rng::split(seed, "policy-act")) {}
};

const char* entsac_version(void) { return "0.1.0"; }

const char* entsac_status_name(int status) {
    switch (status) {
        case ENTSAC_OK: return "ok";
        case ENTSAC_ERR_INVALID_ARG: return "invalid_argument";
        case ENTSAC_ERR_IO: return "io_error";
        case ENTSAC_ERR_CONFIG: return "config_error";
        case ENTSAC_ERR_NUMERIC: return "numeric_error";
        case ENTSAC_ERR_INFEASIBLE: return "infeasible";
        case ENTSAC_ERR_INTERNAL: return "internal_error";
        default: return "unknown";
    }
}

const char* entsac_last_error(void) { return g_last_error.c_str(); }

void entsac_string_free(char* s) { std::free(s); }

int entsac_default_config(char** config_json_out) {
    return guarded([&]() -> int {
        if (!config_json_out) return fail(ENTSAC_ERR_INVALID_ARG, "config_json_out is null");
        *config_json_out = dup_string(entsac::RunConfig().to_json_string());
        return ENTSAC_OK;
    });
}

int entsac_train(const char* config_json, const char* run_dir, char** outcome_json_out) {
    return guarded([&]() -> int {
        if (!config_json || !run_dir)
            return fail(ENTSAC_ERR_INVALID_ARG, "config_json and run_dir are required");
        entsac::RunConfig config = entsac::RunConfig::from_json_string(config_json);
        entsac::TrainOutcome outcome = entsac::train(config, run_dir);
        if (outcome_json_out) {
            nlohmann::json doc = {
                {"run_dir", outcome.run_dir.string()},
                {"aborted", outcome.aborted},
                {"abort_reason", outcome.abort_reason},
                {"final_step", outcome.final_step},
                {"final_alpha", outcome.final_alpha},
                {"final_eval", nlohmann::json::parse(outcome.final_eval.to_json_string())},
            };
            *outcome_json_out = dup_string(doc.dump(2));
        }
        return ENTSAC_OK;
    });
}

int entsac_evaluate(const char* run_dir, int episodes, uint64_t seed,
                    const char* trajectory_csv_or_null, char** stats_json_out) {
    return guarded([&]() -> int {
        if (!run_dir) return fail(ENTSAC_ERR_INVALID_ARG, "run_dir is required");
        if (episodes < 1) return fail(ENTSAC_ERR_INVALID_ARG, "episodes must be >= 1");
        std::filesystem::path trajectory =
            trajectory_csv_or_null ? std::filesystem::path(trajectory_csv_or_null)
                                   : std::filesystem::path();
        entsac::EvalStats stats = entsac::evaluate_run(
            run_dir, static_cast<std::size_t>(episodes), seed, trajectory);
        if (stats_json_out) *stats_json_out = dup_string(stats.to_json_string());
        return ENTSAC_OK;
    });
}

int entsac_verify(const char* mdp_json_or_null, double h0, int grid_resolution, uint64_t seed,
                  int random_horizon, char** report_json_out) {
    return guarded([&]() -> int {
        entsac::FiniteMdp mdp;
        if (mdp_json_or_null) {
            mdp = entsac::FiniteMdp::from_json_string(mdp_json_or_null);
        } else {
            if (random_horizon < 0)
                return fail(ENTSAC_ERR_INVALID_ARG, "random_horizon must be >= 0");
            entsac::Rng rng = entsac::Rng::split(seed, "verify-mdp");
            mdp = entsac::FiniteMdp::random(2, 2, random_horizon, rng);
        }
        entsac::DualityReport report = entsac::verify_duality_report(mdp, h0, grid_resolution);
        if (report_json_out) *report_json_out = dup_string(report.to_json_string());
        return ENTSAC_OK;
    });
}

int entsac_fig1(const char* base_config_json_or_null, const char* out_dir,
                char** summary_json_out) {
    return guarded([&]() -> int {
        if (!out_dir) return fail(ENTSAC_ERR_INVALID_ARG, "out_dir is required");
        entsac::RunConfig base = base_config_json_or_null
                                     ? entsac::RunConfig::from_json_string(base_config_json_or_null)
                                     : entsac::RunConfig();
        entsac::Fig1Outcome outcome = entsac::fig1_experiment(base, out_dir);
        if (summary_json_out) *summary_json_out = dup_string(outcome.summary_json);
        return ENTSAC_OK;
    });
}

int entsac_plot(const char* run_dir, const char* columns, const char* out_svg) {
    return guarded([&]() -> int {
        if (!run_dir || !out_svg)
            return fail(ENTSAC_ERR_INVALID_ARG, "run_dir and out_svg are required");
        std::vector<std::string> column_list;
        std::stringstream ss(columns && *columns ? columns : "alpha");
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) column_list.push_back(item);
        if (column_list.empty()) return fail(ENTSAC_ERR_INVALID_ARG, "no columns requested");
        entsac::plot_metrics(run_dir, column_list, out_svg);
        return ENTSAC_OK;
    });
}

int entsac_env_create(const char* env_id, uint64_t seed, entsac_env** out) {
    return guarded([&]() -> int {
        if (!out) return fail(ENTSAC_ERR_INVALID_ARG, "out is null");
        if (!env_id || !entsac::is_known_env(env_id))
            return fail(ENTSAC_ERR_CONFIG,
                        std::string("unknown env id '") + (env_id ? env_id : "") + "'");
        *out = new entsac_env(seed);
        return ENTSAC_OK;
    });
}

void entsac_env_destroy(entsac_env* env) { delete env; }

int entsac_env_obs_dim(const entsac_env* env, size_t* out) {
    if (!env || !out) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
    *out = entsac::PendulumEnv::obs_dim();
    return ENTSAC_OK;
}

int entsac_env_action_dim(const entsac_env* env, size_t* out) {
    if (!env || !out) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
    *out = entsac::PendulumEnv::action_space().dim;
    return ENTSAC_OK;
}

int entsac_env_action_bounds(const entsac_env* env, double* low, double* high, size_t len) {
    if (!env || !low || !high) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
    entsac::ActionSpace space = entsac::PendulumEnv::action_space();
    if (len < space.dim) return fail(ENTSAC_ERR_INVALID_ARG, "buffer too small");
    for (size_t i = 0; i < space.dim; ++i) {
        low[i] = space.low[i];
        high[i] = space.high[i];
    }
    return ENTSAC_OK;
}

int entsac_env_reset(entsac_env* env, double* obs, size_t obs_len) {
    return guarded([&]() -> int {
        if (!env || !obs) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
        if (obs_len < entsac::PendulumEnv::obs_dim())
            return fail(ENTSAC_ERR_INVALID_ARG, "observation buffer too small");
        auto o = env->env.reset();
        for (size_t i = 0; i < o.size(); ++i) obs[i] = o[i];
        return ENTSAC_OK;
    });
}

int entsac_env_step(entsac_env* env, const double* action, size_t action_len, double* obs,
                    size_t obs_len, double* reward, int* truncated, int* terminal) {
    return guarded([&]() -> int {
        if (!env || !action || !obs || !reward)
            return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
        if (action_len < 1) return fail(ENTSAC_ERR_INVALID_ARG, "action buffer too small");
        if (obs_len < entsac::PendulumEnv::obs_dim())
            return fail(ENTSAC_ERR_INVALID_ARG, "observation buffer too small");
        auto result = env->env.step(action[0]);
        for (size_t i = 0; i < result.obs.size(); ++i) obs[i] = result.obs[i];
        *reward = result.reward;
        if (truncated) *truncated = result.truncated ? 1 : 0;
        if (terminal) *terminal = result.terminal ? 1 : 0;
        return ENTSAC_OK;
    });
}

int entsac_policy_load(const char* run_dir, entsac_policy** out) {
    return guarded([&]() -> int {
        if (!run_dir || !out) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
        std::filesystem::path dir(run_dir);
        entsac::RunConfig config = entsac::RunConfig::load((dir / "config.json").string());
        entsac::ParamTree params = entsac::ParamTree::load(dir / "checkpoint_final.json");
        entsac::Rng init_rng = entsac::Rng::split(config.seed, "agent-init");
        entsac::SacAgent agent(entsac::PendulumEnv::obs_dim(),
                               entsac::PendulumEnv::action_space(), config.agent_config(),
                               init_rng);
        agent.load_params(std::move(params));
        *out = new entsac_policy(std::move(agent), config.seed);
        return ENTSAC_OK;
    });
}

void entsac_policy_destroy(entsac_policy* policy) { delete policy; }

int entsac_policy_reseed(entsac_policy* policy, uint64_t seed) {
    if (!policy) return fail(ENTSAC_ERR_INVALID_ARG, "null policy");
    policy->rng = entsac::Rng::split(seed, "policy-act");
    return ENTSAC_OK;
}

int entsac_policy_act(entsac_policy* policy, const double* obs, size_t obs_len, int deterministic,
                      double* action, size_t action_len, double* log_prob_out) {
    return guarded([&]() -> int {
        if (!policy || !obs || !action) return fail(ENTSAC_ERR_INVALID_ARG, "null argument");
        if (obs_len != policy->agent.nets().obs_dim)
            return fail(ENTSAC_ERR_INVALID_ARG, "observation size mismatch");
        if (action_len < policy->agent.nets().space.dim)
            return fail(ENTSAC_ERR_INVALID_ARG, "action buffer too small");
        entsac::ActionSample sample = policy->agent.act(
            std::span<const double>(obs, obs_len), policy->rng, deterministic != 0);
        for (size_t i = 0; i < sample.action.size(); ++i) action[i] = sample.action[i];
        if (log_prob_out) *log_prob_out = sample.log_prob;
        return ENTSAC_OK;
    });
}

}  // extern "C"
