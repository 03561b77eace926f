#include "entsac/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "entsac/errors.hpp"
#include "entsac/rng.hpp"

namespace entsac {

AgentConfig RunConfig::agent_config() const {
    AgentConfig cfg;
    cfg.hidden = hidden;
    cfg.actor_lr = actor_lr;
    cfg.critic_lr = critic_lr;
    cfg.temperature_lr = temperature_lr;
    cfg.adam_beta1 = adam_beta1;
    cfg.adam_beta2 = adam_beta2;
    cfg.adam_eps = adam_eps;
    cfg.tau = tau;
    cfg.gamma = gamma;
    cfg.target_entropy = target_entropy;
    cfg.alpha0 = alpha0;
    cfg.log_std_min = log_std_min;
    cfg.log_std_max = log_std_max;
    return cfg;
}

void RunConfig::validate() const {
    if (env_id.empty()) throw ConfigError("config: env_id is empty");
    if (!(alpha0 > 0.0)) throw ConfigError("config: alpha0 must be > 0");
    if (batch_size == 0) throw ConfigError("config: batch_size must be positive");
    if (replay_capacity == 0) throw ConfigError("config: replay_capacity must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("config: gamma must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("config: tau must be in (0, 1]");
    if (hidden.empty()) throw ConfigError("config: hidden layer list is empty");
    for (std::size_t h : hidden)
        if (h == 0) throw ConfigError("config: hidden width must be positive");
    if (!(actor_lr > 0.0 && critic_lr > 0.0 && temperature_lr > 0.0))
        throw ConfigError("config: learning rates must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("config: adam betas must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("config: adam_eps must be > 0");
    if (!(log_std_min < log_std_max))
        throw ConfigError("config: log_std_min must be < log_std_max");
    if (eval_episodes == 0) throw ConfigError("config: eval_episodes must be >= 1");
    if (updates_per_step == 0) throw ConfigError("config: updates_per_step must be >= 1");
    if (rng != Rng::kAlgorithm)
        throw ConfigError("config: rng must be '" + std::string(Rng::kAlgorithm) + "'");
}

std::string RunConfig::to_json_string() const {
    nlohmann::json doc = {
        {"env_id", env_id},
        {"variant", to_string(variant)},
        {"target_entropy", target_entropy},
        {"alpha0", alpha0},
        {"seed", seed},
        {"total_steps", total_steps},
        {"warmup_steps", warmup_steps},
        {"batch_size", batch_size},
        {"replay_capacity", replay_capacity},
        {"updates_per_step", updates_per_step},
        {"gamma", gamma},
        {"tau", tau},
        {"hidden", hidden},
        {"actor_lr", actor_lr},
        {"critic_lr", critic_lr},
        {"temperature_lr", temperature_lr},
        {"adam_beta1", adam_beta1},
        {"adam_beta2", adam_beta2},
        {"adam_eps", adam_eps},
        {"log_std_min", log_std_min},
        {"log_std_max", log_std_max},
        {"eval_interval", eval_interval},
        {"eval_episodes", eval_episodes},
        {"override_entropy_bound", override_entropy_bound},
        {"rng", rng},
    };
    return doc.dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");

    static const std::set<std::string> known = {
        "env_id",        "variant",        "target_entropy", "alpha0",
        "seed",          "total_steps",    "warmup_steps",   "batch_size",
        "replay_capacity", "updates_per_step", "gamma",      "tau",
        "hidden",        "actor_lr",       "critic_lr",      "temperature_lr",
        "adam_beta1",    "adam_beta2",     "adam_eps",       "log_std_min",
        "log_std_max",   "eval_interval",  "eval_episodes",  "override_entropy_bound",
        "rng",
    };
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError("config: unknown field '" + key + "'");
    }
    for (const auto& key : known)
        if (!doc.contains(key)) throw ConfigError("config: missing field '" + key + "'");

    RunConfig cfg;
    try {
        cfg.env_id = doc["env_id"].get<std::string>();
        cfg.variant = parse_backup_variant(doc["variant"].get<std::string>());
        cfg.target_entropy = doc["target_entropy"].get<double>();
        cfg.alpha0 = doc["alpha0"].get<double>();
        cfg.seed = doc["seed"].get<std::uint64_t>();
        cfg.total_steps = doc["total_steps"].get<std::uint64_t>();
        cfg.warmup_steps = doc["warmup_steps"].get<std::uint64_t>();
        cfg.batch_size = doc["batch_size"].get<std::size_t>();
        cfg.replay_capacity = doc["replay_capacity"].get<std::size_t>();
        cfg.updates_per_step = doc["updates_per_step"].get<std::size_t>();
        cfg.gamma = doc["gamma"].get<double>();
        cfg.tau = doc["tau"].get<double>();
        cfg.hidden = doc["hidden"].get<std::vector<std::size_t>>();
        cfg.actor_lr = doc["actor_lr"].get<double>();
        cfg.critic_lr = doc["critic_lr"].get<double>();
        cfg.temperature_lr = doc["temperature_lr"].get<double>();
        cfg.adam_beta1 = doc["adam_beta1"].get<double>();
        cfg.adam_beta2 = doc["adam_beta2"].get<double>();
        cfg.adam_eps = doc["adam_eps"].get<double>();
        cfg.log_std_min = doc["log_std_min"].get<double>();
        cfg.log_std_max = doc["log_std_max"].get<double>();
        cfg.eval_interval = doc["eval_interval"].get<std::uint64_t>();
        cfg.eval_episodes = doc["eval_episodes"].get<std::size_t>();
        cfg.override_entropy_bound = doc["override_entropy_bound"].get<bool>();
        cfg.rng = doc["rng"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: malformed field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace entsac
