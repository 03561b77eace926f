#pragma once

#include <string>
#include <vector>

#include "entsac/mdp.hpp"

namespace entsac {

// Exact maximizer of the entropy-regularized return for a fixed temperature
// schedule: backward induction with per-state softmax values. This is the
// inner max of the dual function g(alpha).
struct SoftBackward {
    PolicyTable policy;     // Boltzmann per (t,s); greedy where alpha_t == 0
    std::vector<double> v;  // v[t][s]
};

SoftBackward soft_backward(const FiniteMdp& mdp, const TemperatureSchedule& alphas);

// g(alpha) = E_{s0}[V_0] - sum_t alpha_t * H0. Convex in alpha; an upper
// bound on the constrained optimum for every alpha >= 0.
double dual_function_value(const FiniteMdp& mdp, const TemperatureSchedule& alphas, double h0);

// Gradient of g: h_t evaluated at the maximizing policy for this schedule.
std::vector<double> dual_entropy_gaps(const FiniteMdp& mdp, const TemperatureSchedule& alphas,
                                      double h0);

struct DualStepSolution {
    double alpha = 0.0;            // optimized coordinate value
    std::vector<double> policy_t;  // pi_t[s][a] at the solution
    double entropy_gap = 0.0;      // h_t at the solution
    double value_to_go = 0.0;      // dual value contributed from step t onward
};

// Optimizes the single coordinate alphas[t] by bisection on h_t (the dual
// gradient component, nondecreasing in alpha_t), holding the rest of the
// schedule fixed. The schedule supplies both the already-solved future
// steps and the past steps that shape d_t. Bracket [1e-8, 1e4], tolerance
// 1e-10 on h; h > 0 across the bracket collapses to the alpha = 0 boundary
// with a greedy policy.
DualStepSolution dual_solve_step(const FiniteMdp& mdp, std::size_t t,
                                 TemperatureSchedule& alphas, double h0);

struct DualSolution {
    TemperatureSchedule alphas;
    PolicyTable policy;
    double dual_value = 0.0;
    std::vector<double> entropy_gaps;  // h_t at the optimum
    std::vector<double> slackness;     // alpha_t * h_t
    std::vector<double> value_to_go;   // per-step dual value d*_t
    int sweeps = 0;
};

// Full dual optimum: coordinate sweeps of dual_solve_step until every step
// satisfies alpha_t = 0 with h_t >= 0, or h_t ~ 0. Throws InfeasibleError
// when H0 exceeds log(n_actions).
DualSolution dual_solve(const FiniteMdp& mdp, double h0);

struct BruteForceResult {
    double p_star = 0.0;
    PolicyTable policy;
    unsigned long long evaluations = 0;
    bool exhaustive = false;  // joint grid fully enumerated
};

// Best grid policy (simplex discretization per (t,s)) satisfying
// h_t >= -1e-9 at every step, evaluated exactly. Joint enumeration when the
// full grid fits the evaluation budget; otherwise exhaustive per-step block
// sweeps from several starts (the reported value is still an exact lower
// bound on p*, so the duality gap against d* is conservative).
BruteForceResult brute_force_primal(const FiniteMdp& mdp, double h0, int grid_resolution);

struct DualityReport {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    int horizon = 0;
    double h0 = 0.0;
    int grid_resolution = 0;
    double p_star = 0.0;
    double d_star = 0.0;
    double gap = 0.0;  // |p* - d*|
    std::vector<double> alpha_star;
    std::vector<double> entropy_gaps;
    std::vector<double> slackness;
    double d_star_recursion = 0.0;  // iterative qbar accumulation cross-check
    double recursion_abs_diff = 0.0;
    unsigned long long evaluations = 0;
    bool exhaustive = false;
    int sweeps = 0;

    std::string to_json_string() const;
};

DualityReport verify_duality_report(const FiniteMdp& mdp, double h0, int grid_resolution);

}  // namespace entsac
