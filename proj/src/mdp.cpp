#include "entsac/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "entsac/errors.hpp"

namespace entsac {

namespace {

constexpr double kDistTolerance = 1e-12;

void check_distribution(const double* p, std::size_t n, const std::string& what) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] < 0.0) throw ContractError(what + ": negative probability");
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > kDistTolerance * std::max(1.0, sum) + kDistTolerance)
        throw ContractError(what + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

void FiniteMdp::validate() const {
    if (n_states == 0 || n_actions == 0) throw ContractError("FiniteMdp: empty state/action set");
    if (horizon < 0) throw ContractError("FiniteMdp: negative horizon");
    if (transition.size() != n_states * n_actions * n_states)
        throw ContractError("FiniteMdp: transition tensor size mismatch");
    if (reward.size() != n_states * n_actions)
        throw ContractError("FiniteMdp: reward tensor size mismatch");
    if (initial_dist.size() != n_states)
        throw ContractError("FiniteMdp: initial distribution size mismatch");
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a)
            check_distribution(&transition[(s * n_actions + a) * n_states], n_states,
                               "FiniteMdp transition[" + std::to_string(s) + "," +
                                   std::to_string(a) + "]");
    check_distribution(initial_dist.data(), n_states, "FiniteMdp initial_dist");
    for (double x : reward)
        if (!std::isfinite(x)) throw ContractError("FiniteMdp: non-finite reward");
}

std::string FiniteMdp::to_json_string() const {
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t s = 0; s < n_states; ++s) {
        nlohmann::json row_a = nlohmann::json::array();
        for (std::size_t a = 0; a < n_actions; ++a) {
            nlohmann::json row_s2 = nlohmann::json::array();
            for (std::size_t s2 = 0; s2 < n_states; ++s2) row_s2.push_back(p(s, a, s2));
            row_a.push_back(std::move(row_s2));
        }
        t.push_back(std::move(row_a));
    }
    nlohmann::json rw = nlohmann::json::array();
    for (std::size_t s = 0; s < n_states; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t a = 0; a < n_actions; ++a) row.push_back(r(s, a));
        rw.push_back(std::move(row));
    }
    nlohmann::json doc = {{"n_states", n_states},   {"n_actions", n_actions},
                          {"horizon", horizon},     {"transition", std::move(t)},
                          {"reward", std::move(rw)}, {"initial_dist", initial_dist}};
    return doc.dump();
}

FiniteMdp FiniteMdp::from_json_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("MDP parse error: ") + e.what());
    }
    for (const char* key : {"n_states", "n_actions", "horizon", "transition", "reward",
                            "initial_dist"})
        if (!doc.contains(key)) throw IoError(std::string("MDP json: missing field '") + key + "'");

    FiniteMdp mdp;
    mdp.n_states = doc["n_states"].get<std::size_t>();
    mdp.n_actions = doc["n_actions"].get<std::size_t>();
    mdp.horizon = doc["horizon"].get<int>();
    mdp.initial_dist = doc["initial_dist"].get<std::vector<double>>();

    const auto& t = doc["transition"];
    const auto& rw = doc["reward"];
    if (t.size() != mdp.n_states || rw.size() != mdp.n_states)
        throw IoError("MDP json: transition/reward outer size mismatch");
    mdp.transition.reserve(mdp.n_states * mdp.n_actions * mdp.n_states);
    mdp.reward.reserve(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        if (t[s].size() != mdp.n_actions || rw[s].size() != mdp.n_actions)
            throw IoError("MDP json: action dimension mismatch");
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            if (t[s][a].size() != mdp.n_states)
                throw IoError("MDP json: next-state dimension mismatch");
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                mdp.transition.push_back(t[s][a][s2].get<double>());
            mdp.reward.push_back(rw[s][a].get<double>());
        }
    }
    try {
        mdp.validate();
    } catch (const ContractError& e) {
        throw IoError(std::string("MDP json: ") + e.what());
    }
    return mdp;
}

FiniteMdp FiniteMdp::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

FiniteMdp FiniteMdp::random(std::size_t n_states, std::size_t n_actions, int horizon, Rng& rng) {
    FiniteMdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.horizon = horizon;
    mdp.transition.resize(n_states * n_actions * n_states);
    mdp.reward.resize(n_states * n_actions);
    mdp.initial_dist.resize(n_states);

    auto dirichlet_row = [&rng](double* row, std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // Exp(1) draws normalized -> Dirichlet(1, ..., 1).
            row[i] = -std::log(1.0 - rng.uniform());
            sum += row[i];
        }
        for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
    };

    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a)
            dirichlet_row(&mdp.transition[(s * n_actions + a) * n_states], n_states);
    dirichlet_row(mdp.initial_dist.data(), n_states);
    for (double& x : mdp.reward) x = rng.uniform();
    return mdp;
}

void PolicyTable::validate() const {
    if (probs.size() != steps() * n_states * n_actions)
        throw ContractError("PolicyTable: probs size mismatch");
    for (std::size_t t = 0; t < steps(); ++t)
        for (std::size_t s = 0; s < n_states; ++s)
            check_distribution(&probs[(t * n_states + s) * n_actions], n_actions,
                               "PolicyTable pi[" + std::to_string(t) + "," + std::to_string(s) +
                                   "]");
}

PolicyTable PolicyTable::uniform(std::size_t n_states, std::size_t n_actions, int horizon) {
    PolicyTable pt;
    pt.n_states = n_states;
    pt.n_actions = n_actions;
    pt.horizon = horizon;
    pt.probs.assign(pt.steps() * n_states * n_actions, 1.0 / static_cast<double>(n_actions));
    return pt;
}

TemperatureSchedule TemperatureSchedule::constant(double alpha, int horizon) {
    TemperatureSchedule ts;
    ts.alphas.assign(static_cast<std::size_t>(horizon) + 1, alpha);
    return ts;
}

void TemperatureSchedule::validate() const {
    for (double a : alphas)
        if (a < 0.0 || !std::isfinite(a))
            throw ContractError("TemperatureSchedule: alphas must be finite and >= 0");
}

Marginals marginals(const FiniteMdp& mdp, const PolicyTable& policy) {
    if (policy.horizon != mdp.horizon || policy.n_states != mdp.n_states ||
        policy.n_actions != mdp.n_actions)
        throw ContractError("marginals: policy and MDP dimensions disagree");

    Marginals m;
    m.n_states = mdp.n_states;
    m.n_actions = mdp.n_actions;
    m.horizon = mdp.horizon;
    m.d.assign(mdp.steps() * mdp.n_states, 0.0);
    m.rho.assign(mdp.steps() * mdp.n_states * mdp.n_actions, 0.0);

    for (std::size_t s = 0; s < mdp.n_states; ++s) m.d[s] = mdp.initial_dist[s];
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            double ds = m.d[t * mdp.n_states + s];
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                m.rho[(t * mdp.n_states + s) * mdp.n_actions + a] = ds * policy.at(t, s, a);
        }
        if (t + 1 < mdp.steps()) {
            double* next = &m.d[(t + 1) * mdp.n_states];
            for (std::size_t s = 0; s < mdp.n_states; ++s)
                for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                    double w = m.rho[(t * mdp.n_states + s) * mdp.n_actions + a];
                    if (w == 0.0) continue;
                    for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                        next[s2] += w * mdp.p(s, a, s2);
                }
        }
    }
    return m;
}

EntropyGap policy_entropy_terms(const PolicyTable& policy, const Marginals& marg, double h0) {
    if (marg.horizon != policy.horizon || marg.n_states != policy.n_states ||
        marg.n_actions != policy.n_actions)
        throw ContractError("policy_entropy_terms: marginals and policy dimensions disagree");

    EntropyGap gap;
    gap.target = h0;
    gap.h.assign(policy.steps(), 0.0);
    for (std::size_t t = 0; t < policy.steps(); ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < policy.n_states; ++s)
            for (std::size_t a = 0; a < policy.n_actions; ++a) {
                double w = marg.state_action(t, s, a);
                if (w == 0.0) continue;  // 0 log 0 = 0
                double pi = policy.at(t, s, a);
                if (pi <= 0.0) {
                    gap.degenerate = true;
                    acc += w * 745.0;  // -log(min double), the finite stand-in for -log 0
                } else {
                    acc += w * -std::log(pi);
                }
            }
        gap.h[t] = acc - h0;
    }
    return gap;
}

QTable evaluate_recursion(const FiniteMdp& mdp, const PolicyTable& policy,
                          const TemperatureSchedule& alphas, double h0, BackupVariant variant) {
    mdp.validate();
    policy.validate();
    if (policy.horizon != mdp.horizon)
        throw ContractError("evaluate_recursion: policy horizon mismatch");
    if (alphas.alphas.size() != mdp.steps())
        throw ContractError("evaluate_recursion: temperature schedule length mismatch");
    alphas.validate();
    if (variant != BackupVariant::kCorrected && variant != BackupVariant::kMissingTarget)
        throw ContractError("evaluate_recursion: unknown backup variant");

    QTable qt;
    qt.n_states = mdp.n_states;
    qt.n_actions = mdp.n_actions;
    qt.horizon = mdp.horizon;
    qt.q.assign(mdp.steps() * mdp.n_states * mdp.n_actions, 0.0);
    qt.qbar.assign(mdp.steps(), 0.0);

    std::size_t last = mdp.steps() - 1;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) qt.at(last, s, a) = mdp.r(s, a);

    for (std::size_t ti = last; ti-- > 0;) {
        std::size_t tn = ti + 1;
        double alpha_next = alphas.alphas[tn];
        // Per next-state expectation over a' ~ pi_{t+1}.
        std::vector<double> next_value(mdp.n_states, 0.0);
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
            double v = 0.0;
            for (std::size_t a2 = 0; a2 < mdp.n_actions; ++a2) {
                double pi = policy.at(tn, s2, a2);
                if (pi == 0.0) continue;
                double inner = qt.at(tn, s2, a2) - alpha_next * std::log(pi);
                if (variant == BackupVariant::kCorrected) inner -= alpha_next * h0;
                v += pi * inner;
            }
            next_value[s2] = v;
        }
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                double exp_next = 0.0;
                for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                    exp_next += mdp.p(s, a, s2) * next_value[s2];
                qt.at(ti, s, a) = mdp.r(s, a) + exp_next;
            }
    }

    Marginals m = marginals(mdp, policy);
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                acc += m.state_action(t, s, a) * qt.at(t, s, a);
        qt.qbar[t] = acc;
    }
    return qt;
}

std::vector<double> boltzmann_policy(const std::vector<double>& q_row, double alpha) {
    if (!(alpha > 0.0))
        throw ContractError("boltzmann_policy: alpha must be > 0; use greedy_policy for the "
                            "alpha = 0 limit");
    double m = *std::max_element(q_row.begin(), q_row.end());
    std::vector<double> probs(q_row.size());
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        probs[a] = std::exp((q_row[a] - m) / alpha);
        z += probs[a];
    }
    for (double& p : probs) p /= z;
    return probs;
}

std::vector<double> greedy_policy(const std::vector<double>& q_row) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q_row.size(); ++a)
        if (q_row[a] > q_row[best]) best = a;
    std::vector<double> probs(q_row.size(), 0.0);
    probs[best] = 1.0;
    return probs;
}

double distribution_entropy(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

}  // namespace entsac
