#include "entsac/sac.hpp"

#include <cmath>
#include <cstdio>

#include "entsac/errors.hpp"

namespace entsac {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2 * pi)

MlpSpec make_mlp(const std::string& prefix, std::size_t in, std::size_t out,
                 const std::vector<std::size_t>& hidden) {
    MlpSpec spec;
    spec.prefix = prefix;
    spec.widths.push_back(in);
    for (std::size_t h : hidden) spec.widths.push_back(h);
    spec.widths.push_back(out);
    spec.activations.assign(spec.widths.size() - 1, Activation::kRelu);
    spec.activations.back() = Activation::kIdentity;
    return spec;
}

struct SampledNodes {
    Graph::NodeId action;    // (B, d), env-scaled
    Graph::NodeId log_prob;  // (B, 1)
};

// Reparameterized tanh-Gaussian head on the graph. noise must be (B, d);
// zeros give the deterministic (mean) action.
SampledNodes sample_nodes(Graph& g, const ParamTree& params, const AgentNets& nets,
                          const AgentConfig& config, Graph::NodeId obs_node, const Tensor& noise,
                          bool frozen) {
    std::size_t batch = g.value(obs_node).rows();
    std::size_t d = nets.space.dim;

    Graph::NodeId head = forward_mlp(g, params, nets.actor, obs_node, frozen);
    Graph::NodeId mean = g.slice_cols(head, 0, d);
    Graph::NodeId log_std =
        g.clamp(g.slice_cols(head, d, d), config.log_std_min, config.log_std_max);
    Graph::NodeId std_dev = g.exp(log_std);

    Graph::NodeId noise_node = g.constant(noise);
    Graph::NodeId u = g.add(mean, g.mul(std_dev, noise_node));
    Graph::NodeId squashed = g.tanh(u);

    Tensor scale({batch, d}), shift({batch, d}), log_scale({batch, d});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < d; ++i) {
            double half_span = 0.5 * (nets.space.high[i] - nets.space.low[i]);
            scale.at(b, i) = half_span;
            shift.at(b, i) = 0.5 * (nets.space.high[i] + nets.space.low[i]);
            log_scale.at(b, i) = std::log(half_span);
        }
    Graph::NodeId action = g.add(g.mul(squashed, g.constant(scale)), g.constant(shift));

    // log N(u; mean, std) - log(1 - tanh(u)^2 + eps) - log(scale), per dim.
    Graph::NodeId z = g.div(g.sub(u, mean), std_dev);
    Graph::NodeId gauss =
        g.add_scalar(g.sub(g.scale(g.square(z), -0.5), log_std), -kHalfLog2Pi);
    Graph::NodeId tanh_corr =
        g.log(g.add_scalar(g.neg(g.square(squashed)), 1.0 + config.tanh_eps));
    Graph::NodeId per_dim = g.sub(g.sub(gauss, tanh_corr), g.constant(log_scale));

    return {action, g.row_sum(per_dim)};
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    std::size_t rows = a.rows(), ca = a.cols(), cb = b.cols();
    Tensor out({rows, ca + cb});
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < ca; ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < cb; ++c) out.at(r, ca + c) = b.at(r, c);
    }
    return out;
}

}  // namespace

AgentNets AgentNets::make(std::size_t obs_dim, const ActionSpace& space,
                          const std::vector<std::size_t>& hidden) {
    space.validate();
    AgentNets nets;
    nets.obs_dim = obs_dim;
    nets.space = space;
    nets.actor = make_mlp("actor", obs_dim, 2 * space.dim, hidden);
    nets.critic1 = make_mlp("critic1", obs_dim + space.dim, 1, hidden);
    nets.critic2 = make_mlp("critic2", obs_dim + space.dim, 1, hidden);
    nets.target1 = make_mlp("target1", obs_dim + space.dim, 1, hidden);
    nets.target2 = make_mlp("target2", obs_dim + space.dim, 1, hidden);
    return nets;
}

ParamTree init_agent_params(const AgentNets& nets, double alpha0, Rng& rng) {
    if (!(alpha0 > 0.0)) throw ConfigError("alpha0 must be > 0");
    ParamTree tree;
    init_mlp_params(tree, nets.actor, rng);
    init_mlp_params(tree, nets.critic1, rng);
    init_mlp_params(tree, nets.critic2, rng);
    for (std::size_t layer = 0; layer < nets.critic1.layer_count(); ++layer) {
        tree.insert(nets.target1.weight_path(layer), tree.at(nets.critic1.weight_path(layer)));
        tree.insert(nets.target1.bias_path(layer), tree.at(nets.critic1.bias_path(layer)));
        tree.insert(nets.target2.weight_path(layer), tree.at(nets.critic2.weight_path(layer)));
        tree.insert(nets.target2.bias_path(layer), tree.at(nets.critic2.bias_path(layer)));
    }
    tree.insert(kLogAlphaPath, Tensor::scalar(std::log(alpha0)));
    return tree;
}

ActionSample sample_action(const ParamTree& params, const AgentNets& nets,
                           const AgentConfig& config, std::span<const double> obs, Rng& rng,
                           bool deterministic) {
    if (obs.size() != nets.obs_dim) throw ContractError("sample_action: observation size mismatch");
    for (double x : obs)
        if (!std::isfinite(x)) throw ContractError("sample_action: non-finite observation");

    std::size_t d = nets.space.dim;
    Tensor noise({1, d});
    if (!deterministic)
        for (std::size_t i = 0; i < d; ++i) noise[i] = rng.normal();

    Graph g;
    Graph::NodeId obs_node =
        g.constant(Tensor({1, nets.obs_dim}, std::vector<double>(obs.begin(), obs.end())));
    SampledNodes sampled = sample_nodes(g, params, nets, config, obs_node, noise, true);

    ActionSample out;
    out.action.assign(g.value(sampled.action).data().begin(),
                      g.value(sampled.action).data().end());
    out.log_prob = g.value(sampled.log_prob)[0];
    for (double a : out.action)
        if (!std::isfinite(a)) throw NumericError("sample_action: non-finite action");
    if (!std::isfinite(out.log_prob)) throw NumericError("sample_action: non-finite log-prob");
    return out;
}

double action_log_prob(const ParamTree& params, const AgentNets& nets, const AgentConfig& config,
                       std::span<const double> obs, std::span<const double> action) {
    if (action.size() != nets.space.dim)
        throw ContractError("action_log_prob: action size mismatch");

    Graph g;
    Graph::NodeId obs_node =
        g.constant(Tensor({1, nets.obs_dim}, std::vector<double>(obs.begin(), obs.end())));
    Graph::NodeId head = forward_mlp(g, params, nets.actor, obs_node, true);
    const Tensor& out = g.value(head);

    double log_prob = 0.0;
    for (std::size_t i = 0; i < nets.space.dim; ++i) {
        double mean = out.at(0, i);
        double log_std = std::clamp(out.at(0, nets.space.dim + i), config.log_std_min,
                                    config.log_std_max);
        double std_dev = std::exp(log_std);
        double half_span = 0.5 * (nets.space.high[i] - nets.space.low[i]);
        double shift = 0.5 * (nets.space.high[i] + nets.space.low[i]);
        double t = (action[i] - shift) / half_span;
        if (!(t > -1.0 && t < 1.0))
            throw ContractError("action_log_prob: action not strictly inside bounds");
        double u = std::atanh(t);
        double z = (u - mean) / std_dev;
        log_prob += -0.5 * z * z - log_std - kHalfLog2Pi -
                    std::log(1.0 - t * t + config.tanh_eps) - std::log(half_span);
    }
    return log_prob;
}

std::vector<double> critic_targets(const ParamTree& params, const AgentNets& nets,
                                   const AgentConfig& config, const SacBatch& batch,
                                   const Tensor& next_noise, BackupVariant variant) {
    if (batch.size() == 0) throw ContractError("critic_targets: empty batch");
    std::size_t b = batch.size();

    Graph g;
    Graph::NodeId next_obs = g.constant(batch.next_obs);
    SampledNodes next = sample_nodes(g, params, nets, config, next_obs, next_noise, true);

    Graph::NodeId critic_in = g.concat_cols(next_obs, next.action);
    Graph::NodeId q1 = forward_mlp(g, params, nets.target1, critic_in, true);
    Graph::NodeId q2 = forward_mlp(g, params, nets.target2, critic_in, true);
    Graph::NodeId qmin = g.min_elem(q1, q2);

    double alpha = std::exp(params.at(kLogAlphaPath)[0]);
    double entropy_offset = variant == BackupVariant::kCorrected ? config.target_entropy : 0.0;

    const Tensor& minq = g.value(qmin);
    const Tensor& log_probs = g.value(next.log_prob);
    std::vector<double> targets(b);
    for (std::size_t i = 0; i < b; ++i) {
        double bootstrap = minq[i] - alpha * (log_probs[i] + entropy_offset);
        targets[i] = batch.rewards[i] +
                     config.gamma * (1.0 - batch.terminal[i]) * bootstrap;
    }
    return targets;
}

Graph::NodeId critic_loss_node(Graph& graph, const ParamTree& params, const AgentNets& nets,
                               const SacBatch& batch, const std::vector<double>& targets) {
    if (targets.size() != batch.size())
        throw ContractError("critic_loss: target vector size mismatch");

    Graph::NodeId input = graph.constant(concat_rows(batch.obs, batch.actions));
    Graph::NodeId q1 = forward_mlp(graph, params, nets.critic1, input);
    Graph::NodeId q2 = forward_mlp(graph, params, nets.critic2, input);
    Graph::NodeId y = graph.constant(
        Tensor({batch.size(), 1}, std::vector<double>(targets.begin(), targets.end())));
    Graph::NodeId se = graph.add(graph.square(graph.sub(q1, y)), graph.square(graph.sub(q2, y)));
    return graph.mean_all(se);
}

Graph::NodeId actor_loss_node(Graph& graph, const ParamTree& params, const AgentNets& nets,
                              const AgentConfig& config, const SacBatch& batch,
                              const Tensor& noise, std::vector<double>* log_probs_out) {
    Graph::NodeId obs_node = graph.constant(batch.obs);
    SampledNodes sampled = sample_nodes(graph, params, nets, config, obs_node, noise, false);

    Graph::NodeId critic_in = graph.concat_cols(obs_node, sampled.action);
    Graph::NodeId q1 = forward_mlp(graph, params, nets.critic1, critic_in, true);
    Graph::NodeId q2 = forward_mlp(graph, params, nets.critic2, critic_in, true);
    Graph::NodeId qmin = graph.min_elem(q1, q2);

    double alpha = std::exp(params.at(kLogAlphaPath)[0]);
    Graph::NodeId loss = graph.mean_all(graph.sub(graph.scale(sampled.log_prob, alpha), qmin));

    if (log_probs_out) {
        const Tensor& lp = graph.value(sampled.log_prob);
        log_probs_out->assign(lp.data().begin(), lp.data().end());
    }
    return loss;
}

Graph::NodeId temperature_loss_node(Graph& graph, const ParamTree& params,
                                    const AgentConfig& config,
                                    const std::vector<double>& log_probs) {
    if (log_probs.empty()) throw ContractError("temperature_loss: empty log-prob batch");
    double gap = 0.0;  // batch estimate of h = E[-log pi] - H0
    for (double lp : log_probs) gap += -lp - config.target_entropy;
    gap /= static_cast<double>(log_probs.size());

    Graph::NodeId log_alpha = graph.param(params, kLogAlphaPath);
    return graph.scale(graph.exp(log_alpha), gap);
}

void polyak_update(ParamTree& params, const std::string& online_prefix,
                   const std::string& target_prefix, double tau) {
    if (!(tau > 0.0 && tau <= 1.0))
        throw ContractError("polyak_update: tau must be in (0, 1]");
    for (const std::string& path : params.paths_with_prefix(online_prefix)) {
        std::string target_path = target_prefix + path.substr(online_prefix.size());
        Tensor& target = params.at(target_path);
        const Tensor& online = params.at(path);
        if (!target.same_shape(online))
            throw ContractError("polyak_update: shape mismatch at " + target_path);
        for (std::size_t i = 0; i < target.numel(); ++i)
            target[i] = (1.0 - tau) * target[i] + tau * online[i];
    }
}

SacAgent::SacAgent(std::size_t obs_dim, const ActionSpace& space, const AgentConfig& config,
                   Rng init_rng)
    : nets_(AgentNets::make(obs_dim, space, config.hidden)),
      config_(config),
      params_(init_agent_params(nets_, config.alpha0, init_rng)),
      critic_opt_(AdamConfig{config.critic_lr, config.adam_beta1, config.adam_beta2,
                             config.adam_eps, 0.0}),
      actor_opt_(AdamConfig{config.actor_lr, config.adam_beta1, config.adam_beta2,
                            config.adam_eps, 0.0}),
      temperature_opt_(SgdConfig{config.temperature_lr, 0.0}) {
    double bound = space.log_volume();
    if (config.target_entropy > bound)
        std::fprintf(stderr,
                     "warning: target entropy %.6g exceeds log|A| = %.6g; the entropy "
                     "constraint cannot be met by any policy\n",
                     config.target_entropy, bound);
}

void SacAgent::load_params(ParamTree params) {
    for (const auto& [path, tensor] : params_) {
        if (!params.has(path)) throw ConfigError("checkpoint missing parameter '" + path + "'");
        if (!params.at(path).same_shape(tensor))
            throw ConfigError("checkpoint shape mismatch at '" + path + "'");
    }
    params_ = std::move(params);
}

double SacAgent::alpha() const { return std::exp(log_alpha()); }

ActionSample SacAgent::act(std::span<const double> obs, Rng& rng, bool deterministic) const {
    return sample_action(params_, nets_, config_, obs, rng, deterministic);
}

SacAgent::UpdateStats SacAgent::update(const SacBatch& batch, Rng& rng, BackupVariant variant) {
    std::size_t b = batch.size();
    std::size_t d = nets_.space.dim;

    Tensor next_noise({b, d});
    for (double& x : next_noise.data()) x = rng.normal();
    Tensor actor_noise({b, d});
    for (double& x : actor_noise.data()) x = rng.normal();

    std::vector<double> targets =
        critic_targets(params_, nets_, config_, batch, next_noise, variant);

    UpdateStats stats;

    Graph critic_graph;
    Graph::NodeId closs = critic_loss_node(critic_graph, params_, nets_, batch, targets);
    stats.critic_loss = critic_graph.value(closs)[0];
    critic_opt_.step(params_, critic_graph.backward(closs));

    std::vector<double> log_probs;
    Graph actor_graph;
    Graph::NodeId aloss =
        actor_loss_node(actor_graph, params_, nets_, config_, batch, actor_noise, &log_probs);
    stats.actor_loss = actor_graph.value(aloss)[0];
    actor_opt_.step(params_, actor_graph.backward(aloss));

    Graph temp_graph;
    Graph::NodeId tloss = temperature_loss_node(temp_graph, params_, config_, log_probs);
    stats.temperature_loss = temp_graph.value(tloss)[0];
    temperature_opt_.step(params_, temp_graph.backward(tloss));

    polyak_update(params_, "critic1", "target1", config_.tau);
    polyak_update(params_, "critic2", "target2", config_.tau);

    double sum_neg_logp = 0.0;
    for (double lp : log_probs) sum_neg_logp -= lp;
    stats.mean_batch_entropy = sum_neg_logp / static_cast<double>(log_probs.size());
    stats.log_alpha = log_alpha();
    stats.alpha = alpha();

    if (!std::isfinite(stats.critic_loss) || !std::isfinite(stats.actor_loss) ||
        !std::isfinite(stats.temperature_loss))
        throw NumericError("SacAgent::update: non-finite loss");
    return stats;
}

}  // namespace entsac
