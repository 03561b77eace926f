#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entsac/backup.hpp"
#include "entsac/rng.hpp"

namespace entsac {

// Finite-horizon MDP with decision steps t = 0..horizon.
struct FiniteMdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    int horizon = 0;
    std::vector<double> transition;    // p[s][a][s'], row-major
    std::vector<double> reward;        // r[s][a]
    std::vector<double> initial_dist;  // over states

    double p(std::size_t s, std::size_t a, std::size_t s2) const {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }
    std::size_t steps() const { return static_cast<std::size_t>(horizon) + 1; }

    void validate() const;  // rows sum to 1 +- 1e-12, rewards finite

    std::string to_json_string() const;
    static FiniteMdp from_json_string(const std::string& text);
    static FiniteMdp load(const std::string& path);

    // Dirichlet(1) transition rows and initial distribution, U[0,1) rewards.
    static FiniteMdp random(std::size_t n_states, std::size_t n_actions, int horizon, Rng& rng);
};

// One action distribution per (t, s).
struct PolicyTable {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    int horizon = 0;
    std::vector<double> probs;  // pi[t][s][a]

    double at(std::size_t t, std::size_t s, std::size_t a) const {
        return probs[(t * n_states + s) * n_actions + a];
    }
    double& at(std::size_t t, std::size_t s, std::size_t a) {
        return probs[(t * n_states + s) * n_actions + a];
    }
    std::size_t steps() const { return static_cast<std::size_t>(horizon) + 1; }

    void validate() const;
    static PolicyTable uniform(std::size_t n_states, std::size_t n_actions, int horizon);
};

struct TemperatureSchedule {
    std::vector<double> alphas;  // length horizon + 1, all >= 0

    static TemperatureSchedule constant(double alpha, int horizon);
    void validate() const;
};

// Q_t(s,a) plus the scalar per-step expectation qbar[t] under the evaluated
// policy's state-action marginals.
struct QTable {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    int horizon = 0;
    std::vector<double> q;     // q[t][s][a]
    std::vector<double> qbar;  // length horizon + 1

    double at(std::size_t t, std::size_t s, std::size_t a) const {
        return q[(t * n_states + s) * n_actions + a];
    }
    double& at(std::size_t t, std::size_t s, std::size_t a) {
        return q[(t * n_states + s) * n_actions + a];
    }
};

// h[t] = E_rho[-log pi_t] - H0.
struct EntropyGap {
    std::vector<double> h;
    double target = 0.0;
    bool degenerate = false;  // a zero-probability action carried positive weight
};

struct Marginals {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    int horizon = 0;
    std::vector<double> d;    // d[t][s]
    std::vector<double> rho;  // rho[t][s][a]

    double state(std::size_t t, std::size_t s) const { return d[t * n_states + s]; }
    double state_action(std::size_t t, std::size_t s, std::size_t a) const {
        return rho[(t * n_states + s) * n_actions + a];
    }
};

Marginals marginals(const FiniteMdp& mdp, const PolicyTable& policy);

EntropyGap policy_entropy_terms(const PolicyTable& policy, const Marginals& marg, double h0);

// Backward induction of Q_t under a fixed policy and temperature schedule.
// kCorrected subtracts alpha_{t+1} * (log pi_{t+1} + H0) inside the
// next-step expectation; kMissingTarget drops the H0 part.
QTable evaluate_recursion(const FiniteMdp& mdp, const PolicyTable& policy,
                          const TemperatureSchedule& alphas, double h0, BackupVariant variant);

// pi(a) proportional to exp(q[a] / alpha); alpha must be strictly positive.
std::vector<double> boltzmann_policy(const std::vector<double>& q_row, double alpha);

// alpha = 0 limit: deterministic argmax, lowest index wins ties.
std::vector<double> greedy_policy(const std::vector<double>& q_row);

// Entropy of a distribution in nats; 0 log 0 = 0.
double distribution_entropy(const std::vector<double>& probs);

}  // namespace entsac
