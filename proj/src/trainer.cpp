#include "entsac/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "entsac/chart.hpp"
#include "entsac/errors.hpp"
#include "entsac/metrics.hpp"
#include "entsac/pendulum.hpp"
#include "entsac/replay.hpp"

namespace entsac {

namespace {

constexpr std::uint64_t kMetricsInterval = 1000;
constexpr std::uint64_t kCheckpointInterval = 10000;

std::string checkpoint_name(std::uint64_t step) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoint_%09llu.json",
                  static_cast<unsigned long long>(step));
    return buf;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << text << '\n';
    if (!out) throw IoError("failed writing '" + file.string() + "'");
}

int max_threads() {
    const char* env = std::getenv("ENTROPIC_SAC_THREADS");
    if (!env) return 2;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

}  // namespace

std::string EvalStats::to_json_string() const {
    nlohmann::json doc = {{"mean", mean}, {"stddev", stddev}, {"min", min},
                          {"max", max},   {"episodes", episodes}};
    return doc.dump(2);
}

EvalStats evaluate_policy(const SacAgent& agent, const std::string& env_id,
                          std::size_t episodes, std::uint64_t seed,
                          const std::filesystem::path& trajectory_csv) {
    if (!is_known_env(env_id)) throw ConfigError("unknown env id '" + env_id + "'");
    if (episodes == 0) throw ContractError("evaluate: episodes must be >= 1");

    PendulumEnv env(seed, /*stream=*/1);
    Rng unused(0);  // deterministic actions never draw from it
    std::vector<TrajectoryRow> trajectory;
    std::vector<double> returns;
    returns.reserve(episodes);

    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto obs_arr = env.reset();
        std::vector<double> obs(obs_arr.begin(), obs_arr.end());
        double total = 0.0;
        bool done = false;
        while (!done) {
            ActionSample sample = agent.act(obs, unused, /*deterministic=*/true);
            PendulumState before = env.state();
            auto result = env.step(sample.action[0]);
            if (!trajectory_csv.empty())
                trajectory.push_back({before.step_index, before.theta, before.theta_dot,
                                      sample.action[0], result.reward});
            total += result.reward;
            obs.assign(result.obs.begin(), result.obs.end());
            done = result.truncated || result.terminal;
        }
        returns.push_back(total);
    }

    EvalStats stats;
    stats.episodes = episodes;
    double sum = 0.0;
    stats.min = returns.front();
    stats.max = returns.front();
    for (double r : returns) {
        sum += r;
        stats.min = std::min(stats.min, r);
        stats.max = std::max(stats.max, r);
    }
    stats.mean = sum / static_cast<double>(episodes);
    double var = 0.0;
    for (double r : returns) var += (r - stats.mean) * (r - stats.mean);
    stats.stddev = std::sqrt(var / static_cast<double>(episodes));

    if (!trajectory_csv.empty()) write_trajectory_csv(trajectory_csv, trajectory);
    return stats;
}

TrainOutcome train(const RunConfig& config, const std::filesystem::path& run_dir) {
    config.validate();
    if (!is_known_env(config.env_id)) throw ConfigError("unknown env id '" + config.env_id + "'");

    ActionSpace space = PendulumEnv::action_space();
    double entropy_bound = space.log_volume();
    if (config.target_entropy > entropy_bound && !config.override_entropy_bound)
        throw InfeasibleError(
            "target entropy " + std::to_string(config.target_entropy) + " exceeds log|A| = " +
            std::to_string(entropy_bound) +
            " for this action space; no policy can reach it (set override_entropy_bound to "
            "proceed anyway)");

    std::filesystem::create_directories(run_dir);
    write_text(run_dir / "config.json", config.to_json_string());

    Rng init_rng = Rng::split(config.seed, "agent-init");
    Rng warmup_rng = Rng::split(config.seed, "warmup");
    Rng action_rng = Rng::split(config.seed, "action");
    Rng update_rng = Rng::split(config.seed, "update");
    Rng replay_rng = Rng::split(config.seed, "replay");

    PendulumEnv env(config.seed);
    SacAgent agent(PendulumEnv::obs_dim(), space, config.agent_config(), init_rng);
    ReplayBuffer buffer(config.replay_capacity);
    MetricsWriter metrics(run_dir / "metrics.csv");

    TrainOutcome outcome;
    outcome.run_dir = run_dir;

    if (config.total_steps == 0) {
        agent.params().save(run_dir / "checkpoint_final.json");
        outcome.final_alpha = agent.alpha();
        return outcome;
    }

    auto obs_arr = env.reset();
    std::vector<double> obs(obs_arr.begin(), obs_arr.end());
    double episode_return = 0.0;

    SacAgent::UpdateStats last_stats;
    bool has_stats = false;

    auto abort_run = [&](std::uint64_t step, const char* reason) {
        outcome.aborted = true;
        outcome.abort_reason = reason;
        outcome.final_step = step;
        MetricsRow row;
        row.env_step = step;
        row.alpha = agent.alpha();
        row.log_alpha = agent.log_alpha();
        metrics.write(row);
        metrics.flush();
        agent.params().save(run_dir / "checkpoint_final.json");
        outcome.final_alpha = agent.alpha();
    };

    for (std::uint64_t step = 1; step <= config.total_steps; ++step) {
        std::vector<double> action(space.dim);
        if (step <= config.warmup_steps) {
            for (std::size_t i = 0; i < space.dim; ++i)
                action[i] = warmup_rng.uniform(space.low[i], space.high[i]);
        } else {
            try {
                action = agent.act(obs, action_rng, /*deterministic=*/false).action;
            } catch (const NumericError& e) {
                abort_run(step, e.what());
                return outcome;
            }
        }

        auto result = env.step(action[0]);
        std::vector<double> next_obs(result.obs.begin(), result.obs.end());
        buffer.push({obs, action, result.reward, next_obs, result.terminal, result.truncated});
        episode_return += result.reward;

        std::optional<double> finished_return;
        if (result.truncated || result.terminal) {
            finished_return = episode_return;
            episode_return = 0.0;
            auto reset_obs = env.reset();
            obs.assign(reset_obs.begin(), reset_obs.end());
        } else {
            obs = std::move(next_obs);
        }

        if (step > config.warmup_steps && buffer.size() >= config.batch_size) {
            try {
                for (std::size_t u = 0; u < config.updates_per_step; ++u)
                    last_stats = agent.update(buffer.sample(config.batch_size, replay_rng),
                                              update_rng, config.variant);
                has_stats = true;
            } catch (const NumericError& e) {
                // Divergence: save what we have and stop; the alpha history up
                // to this point is the interesting artifact.
                abort_run(step, e.what());
                return outcome;
            }
        }

        bool metrics_tick = step % kMetricsInterval == 0;
        std::optional<EvalStats> eval;
        if (step == config.total_steps ||
            (config.eval_interval > 0 && step % config.eval_interval == 0))
            eval = evaluate_policy(agent, config.env_id, config.eval_episodes, config.seed);

        if (metrics_tick || finished_return || eval) {
            MetricsRow row;
            row.env_step = step;
            row.episode_return = finished_return;
            row.alpha = agent.alpha();
            row.log_alpha = agent.log_alpha();
            if (has_stats) {
                row.mean_batch_entropy = last_stats.mean_batch_entropy;
                row.critic_loss = last_stats.critic_loss;
                row.actor_loss = last_stats.actor_loss;
                row.temperature_loss = last_stats.temperature_loss;
            }
            if (eval) {
                row.eval_return_mean = eval->mean;
                row.eval_return_std = eval->stddev;
            }
            metrics.write(row);
        }
        if (eval) outcome.final_eval = *eval;

        if (step % kCheckpointInterval == 0)
            agent.params().save(run_dir / checkpoint_name(step));
    }

    agent.params().save(run_dir / "checkpoint_final.json");
    outcome.final_step = config.total_steps;
    outcome.final_alpha = agent.alpha();
    return outcome;
}

EvalStats evaluate_run(const std::filesystem::path& run_dir, std::size_t episodes,
                       std::uint64_t seed, const std::filesystem::path& trajectory_csv) {
    RunConfig config = RunConfig::load((run_dir / "config.json").string());
    ParamTree params = ParamTree::load(run_dir / "checkpoint_final.json");

    Rng init_rng = Rng::split(config.seed, "agent-init");
    SacAgent agent(PendulumEnv::obs_dim(), PendulumEnv::action_space(), config.agent_config(),
                   init_rng);
    agent.load_params(std::move(params));
    return evaluate_policy(agent, config.env_id, episodes, seed, trajectory_csv);
}

namespace {

struct FinalThirdStats {
    double mean_alpha = 0.0;
    double mean_entropy = 0.0;
    std::uint64_t from_step = 0;
    std::uint64_t to_step = 0;
};

FinalThirdStats final_third(const MetricsTable& table) {
    auto alpha_series = table.series("alpha");
    if (alpha_series.empty()) throw InternalError("fig1: run produced no alpha samples");
    double max_step = alpha_series.back().first;
    double cutoff = max_step * 2.0 / 3.0;

    FinalThirdStats stats;
    stats.from_step = static_cast<std::uint64_t>(cutoff);
    stats.to_step = static_cast<std::uint64_t>(max_step);
    double alpha_sum = 0.0;
    std::size_t alpha_n = 0;
    for (auto [x, y] : alpha_series)
        if (x > cutoff) {
            alpha_sum += y;
            ++alpha_n;
        }
    auto entropy_series = table.series("mean_batch_entropy");
    double ent_sum = 0.0;
    std::size_t ent_n = 0;
    for (auto [x, y] : entropy_series)
        if (x > cutoff) {
            ent_sum += y;
            ++ent_n;
        }
    stats.mean_alpha = alpha_n ? alpha_sum / static_cast<double>(alpha_n) : 0.0;
    stats.mean_entropy = ent_n ? ent_sum / static_cast<double>(ent_n) : 0.0;
    return stats;
}

nlohmann::json run_summary(const std::filesystem::path& dir, const TrainOutcome& outcome,
                           double h0) {
    MetricsTable table = read_metrics_csv(dir / "metrics.csv");
    FinalThirdStats stats = final_third(table);
    return {
        {"run_dir", dir.string()},
        {"aborted", outcome.aborted},
        {"final_step", outcome.final_step},
        {"final_third_from_step", stats.from_step},
        {"final_third_mean_alpha", stats.mean_alpha},
        {"final_third_mean_entropy", stats.mean_entropy},
        {"entropy_gap_to_target", stats.mean_entropy - h0},
        {"eval_return_mean", outcome.final_eval.mean},
        {"eval_return_std", outcome.final_eval.stddev},
    };
}

}  // namespace

Fig1Outcome fig1_experiment(const RunConfig& base, const std::filesystem::path& out_dir) {
    RunConfig corrected = base;
    corrected.variant = BackupVariant::kCorrected;
    corrected.target_entropy = 0.5;
    corrected.alpha0 = 1.0;
    RunConfig missing = corrected;
    missing.variant = BackupVariant::kMissingTarget;

    std::filesystem::create_directories(out_dir);
    Fig1Outcome outcome;
    outcome.corrected_dir = out_dir / "corrected";
    outcome.missing_dir = out_dir / "missing_target";

    TrainOutcome corrected_run, missing_run;
    if (max_threads() >= 2) {
        std::exception_ptr err1, err2;
        std::thread worker([&] {
            try {
                corrected_run = train(corrected, outcome.corrected_dir);
            } catch (...) {
                err1 = std::current_exception();
            }
        });
        try {
            missing_run = train(missing, outcome.missing_dir);
        } catch (...) {
            err2 = std::current_exception();
        }
        worker.join();
        if (err1) std::rethrow_exception(err1);
        if (err2) std::rethrow_exception(err2);
    } else {
        corrected_run = train(corrected, outcome.corrected_dir);
        missing_run = train(missing, outcome.missing_dir);
    }

    nlohmann::json summary = {
        {"target_entropy", corrected.target_entropy},
        {"alpha0", corrected.alpha0},
        {"seed", corrected.seed},
        {"total_steps", corrected.total_steps},
        {"corrected", run_summary(outcome.corrected_dir, corrected_run, corrected.target_entropy)},
        {"missing_target",
         run_summary(outcome.missing_dir, missing_run, corrected.target_entropy)},
    };
    summary["alpha_ordering_missing_gt_corrected"] =
        summary["missing_target"]["final_third_mean_alpha"].get<double>() >
        summary["corrected"]["final_third_mean_alpha"].get<double>();

    outcome.summary_json = summary.dump(2);
    outcome.summary_path = out_dir / "summary.json";
    write_text(outcome.summary_path, outcome.summary_json);

    ChartSpec chart;
    chart.title = "temperature trajectories";
    chart.x_label = "env_step";
    chart.y_label = "alpha";
    ChartSeries s1{"corrected", read_metrics_csv(outcome.corrected_dir / "metrics.csv")
                       .series("alpha")};
    ChartSeries s2{"missing_target", read_metrics_csv(outcome.missing_dir / "metrics.csv")
                       .series("alpha")};
    chart.series = {std::move(s1), std::move(s2)};
    outcome.chart_path = out_dir / "alpha_comparison.svg";
    write_chart(chart, outcome.chart_path);

    return outcome;
}

}  // namespace entsac
