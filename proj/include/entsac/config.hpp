#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entsac/backup.hpp"
#include "entsac/sac.hpp"

namespace entsac {

// Complete experiment description. Everything is explicit: the persisted
// config.json alone reproduces a run on the same build.
struct RunConfig {
    std::string env_id = "pendulum-v1-local";
    BackupVariant variant = BackupVariant::kCorrected;
    double target_entropy = -1.0;
    double alpha0 = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t total_steps = 100000;
    std::uint64_t warmup_steps = 1000;
    std::size_t batch_size = 256;
    std::size_t replay_capacity = 100000;
    std::size_t updates_per_step = 1;
    double gamma = 0.99;
    double tau = 0.005;
    std::vector<std::size_t> hidden = {64, 64};
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    double temperature_lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double log_std_min = -20.0;
    double log_std_max = 2.0;
    std::uint64_t eval_interval = 10000;
    std::size_t eval_episodes = 10;
    bool override_entropy_bound = false;
    std::string rng = "mt19937_64";

    AgentConfig agent_config() const;
    void validate() const;

    std::string to_json_string() const;
    static RunConfig from_json_string(const std::string& text);
    static RunConfig load(const std::string& path);
};

}  // namespace entsac
