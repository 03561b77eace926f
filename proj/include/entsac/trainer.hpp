#pragma once

#include <filesystem>
#include <string>

#include "entsac/config.hpp"
#include "entsac/sac.hpp"

namespace entsac {

struct EvalStats {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t episodes = 0;

    std::string to_json_string() const;
};

struct TrainOutcome {
    std::filesystem::path run_dir;
    bool aborted = false;
    std::string abort_reason;
    std::uint64_t final_step = 0;
    double final_alpha = 0.0;
    EvalStats final_eval;  // empty when total_steps == 0
};

// Runs the full loop into run_dir: config.json, metrics.csv (row every
// 1000 steps, at episode ends and at eval points), checkpoints every 10k
// steps plus checkpoint_final.json. Numeric divergence aborts but saves
// the checkpoint and a diagnostic row. Deterministic given the config.
TrainOutcome train(const RunConfig& config, const std::filesystem::path& run_dir);

// Deterministic-policy (distribution mean) rollouts.
EvalStats evaluate_policy(const SacAgent& agent, const std::string& env_id,
                          std::size_t episodes, std::uint64_t seed,
                          const std::filesystem::path& trajectory_csv = {});

// Loads config.json + checkpoint_final.json from a run directory.
EvalStats evaluate_run(const std::filesystem::path& run_dir, std::size_t episodes,
                       std::uint64_t seed, const std::filesystem::path& trajectory_csv = {});

struct Fig1Outcome {
    std::filesystem::path corrected_dir;
    std::filesystem::path missing_dir;
    std::filesystem::path summary_path;
    std::filesystem::path chart_path;
    std::string summary_json;
};

// Two runs differing only in the backup variant, H0 = 0.5 and alpha0 = 1,
// identical seeds; emits summary.json and an alpha-comparison chart.
// ENTROPIC_SAC_THREADS=1 forces the runs to execute sequentially.
Fig1Outcome fig1_experiment(const RunConfig& base, const std::filesystem::path& out_dir);

}  // namespace entsac
