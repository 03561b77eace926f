#pragma once

#include <span>
#include <string>
#include <vector>

#include "entsac/backup.hpp"
#include "entsac/graph.hpp"
#include "entsac/mlp.hpp"
#include "entsac/optimizer.hpp"
#include "entsac/param_tree.hpp"
#include "entsac/pendulum.hpp"
#include "entsac/rng.hpp"

namespace entsac {

struct AgentConfig {
    std::vector<std::size_t> hidden = {64, 64};
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    double temperature_lr = 1e-3;  // SGD, zero weight decay, on log alpha
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double tau = 0.005;
    double gamma = 0.99;
    double target_entropy = -1.0;
    double alpha0 = 1.0;
    double log_std_min = -20.0;
    double log_std_max = 2.0;
    double tanh_eps = 1e-6;
};

// Network layout: actor maps obs -> (mean, log_std); the twin critics and
// their target copies map (obs, action) -> scalar.
struct AgentNets {
    MlpSpec actor;
    MlpSpec critic1;
    MlpSpec critic2;
    MlpSpec target1;
    MlpSpec target2;
    ActionSpace space;
    std::size_t obs_dim = 0;

    static AgentNets make(std::size_t obs_dim, const ActionSpace& space,
                          const std::vector<std::size_t>& hidden);
};

constexpr const char* kLogAlphaPath = "temperature/log_alpha";

// All network parameters plus temperature/log_alpha; targets start as
// copies of the online critics.
ParamTree init_agent_params(const AgentNets& nets, double alpha0, Rng& rng);

struct SacBatch {
    Tensor obs;                    // (B, obs_dim)
    Tensor actions;                // (B, act_dim)
    std::vector<double> rewards;   // B
    Tensor next_obs;               // (B, obs_dim)
    std::vector<double> terminal;  // B entries in {0,1}; truncation stays 0
    std::size_t size() const { return rewards.size(); }
};

struct ActionSample {
    std::vector<double> action;
    double log_prob = 0.0;
};

// Reparameterized tanh-Gaussian sample for a single observation.
// deterministic = true takes the distribution mean (pre-squash).
ActionSample sample_action(const ParamTree& params, const AgentNets& nets,
                           const AgentConfig& config, std::span<const double> obs, Rng& rng,
                           bool deterministic);

// log pi(action | obs) for an externally supplied action strictly inside
// the bounds. Matches the sampling-side density, including the tanh
// correction epsilon.
double action_log_prob(const ParamTree& params, const AgentNets& nets, const AgentConfig& config,
                       std::span<const double> obs, std::span<const double> action);

// TD targets, no gradients: y = r + gamma * (1 - terminal) *
// (min target Q - alpha * (log pi' [+ H0 for kCorrected])). The next-state
// noise is passed in so callers control determinism.
std::vector<double> critic_targets(const ParamTree& params, const AgentNets& nets,
                                   const AgentConfig& config, const SacBatch& batch,
                                   const Tensor& next_noise, BackupVariant variant);

// Mean over the batch of (Q1 - y)^2 + (Q2 - y)^2; gradients reach the two
// online critics only.
Graph::NodeId critic_loss_node(Graph& graph, const ParamTree& params, const AgentNets& nets,
                               const SacBatch& batch, const std::vector<double>& targets);

// Mean over the batch of alpha * log pi(a~|s) - min(Q1, Q2)(s, a~) with a~
// reparameterized from the supplied noise; critics frozen, alpha constant.
// Optionally reports the sampled log-probs (for the temperature update) and
// the batch mean of -log pi.
Graph::NodeId actor_loss_node(Graph& graph, const ParamTree& params, const AgentNets& nets,
                              const AgentConfig& config, const SacBatch& batch,
                              const Tensor& noise, std::vector<double>* log_probs_out = nullptr);

// alpha * mean(-log pi - H0) with the log-probs treated as constants; the
// gradient lands on temperature/log_alpha.
Graph::NodeId temperature_loss_node(Graph& graph, const ParamTree& params,
                                    const AgentConfig& config,
                                    const std::vector<double>& log_probs);

// target <- (1 - tau) * target + tau * online for every online parameter.
void polyak_update(ParamTree& params, const std::string& online_prefix,
                   const std::string& target_prefix, double tau);

class SacAgent {
public:
    SacAgent(std::size_t obs_dim, const ActionSpace& space, const AgentConfig& config,
             Rng init_rng);

    const ParamTree& params() const { return params_; }
    void load_params(ParamTree params);
    const AgentNets& nets() const { return nets_; }
    const AgentConfig& config() const { return config_; }

    double log_alpha() const { return params_.at(kLogAlphaPath)[0]; }
    double alpha() const;

    ActionSample act(std::span<const double> obs, Rng& rng, bool deterministic) const;

    struct UpdateStats {
        double critic_loss = 0.0;
        double actor_loss = 0.0;
        double temperature_loss = 0.0;
        double mean_batch_entropy = 0.0;  // batch mean of -log pi
        double alpha = 0.0;
        double log_alpha = 0.0;
    };

    // One gradient update: critic -> actor -> temperature -> polyak.
    UpdateStats update(const SacBatch& batch, Rng& rng, BackupVariant variant);

private:
    AgentNets nets_;
    AgentConfig config_;
    ParamTree params_;
    Adam critic_opt_;
    Adam actor_opt_;
    Sgd temperature_opt_;
};

}  // namespace entsac
