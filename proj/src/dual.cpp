#include "entsac/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "entsac/errors.hpp"

namespace entsac {

namespace {

constexpr double kBracketLo = 1e-8;
constexpr double kBracketHi = 1e4;
constexpr double kGapTolerance = 1e-10;
constexpr double kFeasibilitySlack = 1e-9;

void check_feasible_target(const FiniteMdp& mdp, double h0) {
    double bound = std::log(static_cast<double>(mdp.n_actions));
    if (h0 > bound + 1e-12)
        throw InfeasibleError("target entropy " + std::to_string(h0) +
                              " exceeds log(n_actions) = " + std::to_string(bound) +
                              "; no policy can satisfy the constraint");
}

bool target_pins_uniform(const FiniteMdp& mdp, double h0) {
    return std::abs(h0 - std::log(static_cast<double>(mdp.n_actions))) <= 1e-12;
}

}  // namespace

SoftBackward soft_backward(const FiniteMdp& mdp, const TemperatureSchedule& alphas) {
    if (alphas.alphas.size() != mdp.steps())
        throw ContractError("soft_backward: schedule length mismatch");

    SoftBackward sb;
    sb.policy.n_states = mdp.n_states;
    sb.policy.n_actions = mdp.n_actions;
    sb.policy.horizon = mdp.horizon;
    sb.policy.probs.assign(mdp.steps() * mdp.n_states * mdp.n_actions, 0.0);
    sb.v.assign(mdp.steps() * mdp.n_states, 0.0);

    std::vector<double> q_row(mdp.n_actions);
    for (std::size_t ti = mdp.steps(); ti-- > 0;) {
        double alpha = alphas.alphas[ti];
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.r(s, a);
                if (ti + 1 < mdp.steps())
                    for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                        q += mdp.p(s, a, s2) * sb.v[(ti + 1) * mdp.n_states + s2];
                q_row[a] = q;
            }
            std::vector<double> pi;
            double v;
            if (alpha > 0.0) {
                double m = *std::max_element(q_row.begin(), q_row.end());
                double z = 0.0;
                pi.resize(mdp.n_actions);
                for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                    pi[a] = std::exp((q_row[a] - m) / alpha);
                    z += pi[a];
                }
                for (double& p : pi) p /= z;
                v = m + alpha * std::log(z);
            } else {
                pi = greedy_policy(q_row);
                v = *std::max_element(q_row.begin(), q_row.end());
            }
            sb.v[ti * mdp.n_states + s] = v;
            for (std::size_t a = 0; a < mdp.n_actions; ++a) sb.policy.at(ti, s, a) = pi[a];
        }
    }
    return sb;
}

double dual_function_value(const FiniteMdp& mdp, const TemperatureSchedule& alphas, double h0) {
    SoftBackward sb = soft_backward(mdp, alphas);
    double g = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) g += mdp.initial_dist[s] * sb.v[s];
    for (double a : alphas.alphas) g -= a * h0;
    return g;
}

std::vector<double> dual_entropy_gaps(const FiniteMdp& mdp, const TemperatureSchedule& alphas,
                                      double h0) {
    SoftBackward sb = soft_backward(mdp, alphas);
    Marginals m = marginals(mdp, sb.policy);
    return policy_entropy_terms(sb.policy, m, h0).h;
}

DualStepSolution dual_solve_step(const FiniteMdp& mdp, std::size_t t,
                                 TemperatureSchedule& alphas, double h0) {
    if (t >= mdp.steps()) throw ContractError("dual_solve_step: step index out of range");
    check_feasible_target(mdp, h0);

    auto gap_at = [&](double a) {
        alphas.alphas[t] = a;
        return dual_entropy_gaps(mdp, alphas, h0)[t];
    };

    double lo = kBracketLo, hi = kBracketHi;
    double solved;
    if (gap_at(lo) >= 0.0) {
        solved = 0.0;  // constraint slack even in the greedy limit
    } else if (gap_at(hi) < 0.0) {
        solved = hi;  // only the (near-)uniform limit can satisfy the target
    } else {
        solved = hi;
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (lo + hi);
            double g = gap_at(mid);
            if (std::abs(g) <= kGapTolerance) {
                solved = mid;
                break;
            }
            if (g < 0.0)
                lo = mid;
            else
                hi = mid;
            solved = 0.5 * (lo + hi);
        }
    }
    alphas.alphas[t] = solved;

    SoftBackward sb = soft_backward(mdp, alphas);
    Marginals marg = marginals(mdp, sb.policy);
    EntropyGap gaps = policy_entropy_terms(sb.policy, marg, h0);

    DualStepSolution out;
    out.alpha = solved;
    out.entropy_gap = gaps.h[t];
    out.policy_t.resize(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a)
            out.policy_t[s * mdp.n_actions + a] = sb.policy.at(t, s, a);
    out.value_to_go = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        out.value_to_go += marg.state(t, s) * sb.v[t * mdp.n_states + s];
    for (std::size_t tau = t; tau < mdp.steps(); ++tau)
        out.value_to_go -= alphas.alphas[tau] * h0;
    return out;
}

DualSolution dual_solve(const FiniteMdp& mdp, double h0) {
    mdp.validate();
    check_feasible_target(mdp, h0);

    DualSolution sol;

    if (target_pins_uniform(mdp, h0)) {
        // H0 == log(n_actions): the uniform policy is the only feasible one
        // and the dual optimum is approached as alpha grows. Report the
        // bracket top with the exactly uniform policy; h is exactly zero.
        sol.alphas = TemperatureSchedule::constant(kBracketHi, mdp.horizon);
        sol.policy = PolicyTable::uniform(mdp.n_states, mdp.n_actions, mdp.horizon);
        Marginals m = marginals(mdp, sol.policy);
        double value = 0.0;
        for (std::size_t t = 0; t < mdp.steps(); ++t)
            for (std::size_t s = 0; s < mdp.n_states; ++s)
                for (std::size_t a = 0; a < mdp.n_actions; ++a)
                    value += m.state_action(t, s, a) * mdp.r(s, a);
        sol.dual_value = value;
        sol.entropy_gaps.assign(mdp.steps(), 0.0);
        sol.slackness.assign(mdp.steps(), 0.0);
        sol.value_to_go.assign(mdp.steps(), 0.0);
        double tail = 0.0;
        for (std::size_t ti = mdp.steps(); ti-- > 0;) {
            double step_reward = 0.0;
            for (std::size_t s = 0; s < mdp.n_states; ++s)
                for (std::size_t a = 0; a < mdp.n_actions; ++a)
                    step_reward += m.state_action(ti, s, a) * mdp.r(s, a);
            tail += step_reward;
            sol.value_to_go[ti] = tail;
        }
        sol.sweeps = 0;
        return sol;
    }

    TemperatureSchedule alphas = TemperatureSchedule::constant(1.0, mdp.horizon);
    int sweeps = 0;
    for (; sweeps < 300; ++sweeps) {
        std::vector<double> prev = alphas.alphas;
        for (std::size_t ti = mdp.steps(); ti-- > 0;) dual_solve_step(mdp, ti, alphas, h0);

        std::vector<double> gaps = dual_entropy_gaps(mdp, alphas, h0);
        double worst_slack = 0.0;
        for (std::size_t t = 0; t < mdp.steps(); ++t)
            worst_slack = std::max(worst_slack, std::abs(alphas.alphas[t] * gaps[t]));
        double drift = 0.0;
        for (std::size_t t = 0; t < mdp.steps(); ++t)
            drift = std::max(drift, std::abs(alphas.alphas[t] - prev[t]));
        if (worst_slack <= 1e-9 && drift <= 1e-10 * std::max(1.0, alphas.alphas[0])) {
            ++sweeps;
            break;
        }
    }

    SoftBackward sb = soft_backward(mdp, alphas);
    Marginals marg = marginals(mdp, sb.policy);
    EntropyGap gaps = policy_entropy_terms(sb.policy, marg, h0);

    sol.alphas = alphas;
    sol.policy = sb.policy;
    sol.dual_value = dual_function_value(mdp, alphas, h0);
    sol.entropy_gaps = gaps.h;
    sol.slackness.resize(mdp.steps());
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        sol.slackness[t] = alphas.alphas[t] * gaps.h[t];
    sol.value_to_go.resize(mdp.steps());
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        double v = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            v += marg.state(t, s) * sb.v[t * mdp.n_states + s];
        for (std::size_t tau = t; tau < mdp.steps(); ++tau) v -= alphas.alphas[tau] * h0;
        sol.value_to_go[t] = v;
    }
    sol.sweeps = sweeps;
    return sol;
}

namespace {

// Simplex grid: all distributions with coordinates k/(resolution-1).
struct SimplexGrid {
    std::vector<std::vector<double>> points;
    std::vector<double> entropy;
};

void compositions(std::size_t remaining, std::size_t slots, std::vector<std::size_t>& counts,
                  std::size_t denom, SimplexGrid& grid) {
    if (slots == 1) {
        counts.push_back(remaining);
        std::vector<double> point(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            point[i] = static_cast<double>(counts[i]) / static_cast<double>(denom);
        grid.entropy.push_back(distribution_entropy(point));
        grid.points.push_back(std::move(point));
        counts.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
        counts.push_back(k);
        compositions(remaining - k, slots - 1, counts, denom, grid);
        counts.pop_back();
    }
}

SimplexGrid make_simplex_grid(std::size_t n_actions, int resolution) {
    if (resolution < 2) throw ContractError("brute_force_primal: grid resolution must be >= 2");
    SimplexGrid grid;
    std::vector<std::size_t> counts;
    compositions(static_cast<std::size_t>(resolution - 1), n_actions, counts,
                 static_cast<std::size_t>(resolution - 1), grid);
    return grid;
}

// Exact evaluation machinery with per-(state, grid-point) tables so a full
// policy evaluation is a handful of flops.
struct GridEvaluator {
    const FiniteMdp& mdp;
    const SimplexGrid& grid;
    double h0;
    std::size_t n_points;
    std::vector<double> reward_dot;  // [s][pt]
    std::vector<double> trans_dot;   // [s][pt][s2]
    unsigned long long evaluations = 0;

    GridEvaluator(const FiniteMdp& m, const SimplexGrid& g, double target)
        : mdp(m), grid(g), h0(target), n_points(g.points.size()) {
        reward_dot.assign(mdp.n_states * n_points, 0.0);
        trans_dot.assign(mdp.n_states * n_points * mdp.n_states, 0.0);
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t pt = 0; pt < n_points; ++pt) {
                const auto& point = grid.points[pt];
                double rd = 0.0;
                for (std::size_t a = 0; a < mdp.n_actions; ++a) rd += point[a] * mdp.r(s, a);
                reward_dot[s * n_points + pt] = rd;
                double* td = &trans_dot[(s * n_points + pt) * mdp.n_states];
                for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                    if (point[a] == 0.0) continue;
                    for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                        td[s2] += point[a] * mdp.p(s, a, s2);
                }
            }
    }

    // Assignment: one grid-point index per (t, s). Returns the exact
    // objective; feasible = every step's entropy gap >= -1e-9.
    double evaluate(const std::vector<std::size_t>& assign, bool& feasible) {
        ++evaluations;
        feasible = true;
        std::vector<double> d = mdp.initial_dist;
        std::vector<double> dn(mdp.n_states);
        double value = 0.0;
        for (std::size_t t = 0; t < mdp.steps(); ++t) {
            const std::size_t* row = &assign[t * mdp.n_states];
            double ent = 0.0;
            double step_reward = 0.0;
            for (std::size_t s = 0; s < mdp.n_states; ++s) {
                ent += d[s] * grid.entropy[row[s]];
                step_reward += d[s] * reward_dot[s * n_points + row[s]];
            }
            if (ent - h0 < -kFeasibilitySlack) {
                feasible = false;
                return -std::numeric_limits<double>::infinity();
            }
            value += step_reward;
            if (t + 1 < mdp.steps()) {
                std::fill(dn.begin(), dn.end(), 0.0);
                for (std::size_t s = 0; s < mdp.n_states; ++s) {
                    if (d[s] == 0.0) continue;
                    const double* td = &trans_dot[(s * n_points + row[s]) * mdp.n_states];
                    for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) dn[s2] += d[s] * td[s2];
                }
                d.swap(dn);
            }
        }
        return value;
    }
};

PolicyTable assignment_to_policy(const FiniteMdp& mdp, const SimplexGrid& grid,
                                 const std::vector<std::size_t>& assign) {
    PolicyTable pt;
    pt.n_states = mdp.n_states;
    pt.n_actions = mdp.n_actions;
    pt.horizon = mdp.horizon;
    pt.probs.resize(mdp.steps() * mdp.n_states * mdp.n_actions);
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            const auto& point = grid.points[assign[t * mdp.n_states + s]];
            for (std::size_t a = 0; a < mdp.n_actions; ++a) pt.at(t, s, a) = point[a];
        }
    return pt;
}

// Nearest grid point to a distribution: round counts, repair the total on
// the largest-remainder coordinates.
std::size_t snap_to_grid(const SimplexGrid& grid, const std::vector<double>& probs,
                         int resolution) {
    std::size_t denom = static_cast<std::size_t>(resolution - 1);
    std::vector<std::size_t> counts(probs.size());
    std::vector<double> remainders(probs.size());
    long long total = 0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        double exact = probs[a] * static_cast<double>(denom);
        counts[a] = static_cast<std::size_t>(std::llround(exact));
        remainders[a] = exact - static_cast<double>(counts[a]);
        total += static_cast<long long>(counts[a]);
    }
    long long excess = total - static_cast<long long>(denom);
    while (excess != 0) {
        std::size_t pick = 0;
        for (std::size_t a = 1; a < probs.size(); ++a) {
            if (excess > 0 && remainders[a] < remainders[pick] && counts[a] > 0) pick = a;
            if (excess < 0 && remainders[a] > remainders[pick]) pick = a;
        }
        if (excess > 0) {
            if (counts[pick] == 0) {  // fall back to any positive count
                for (std::size_t a = 0; a < probs.size(); ++a)
                    if (counts[a] > 0) pick = a;
            }
            --counts[pick];
            remainders[pick] += 1.0;
            --excess;
        } else {
            ++counts[pick];
            remainders[pick] -= 1.0;
            ++excess;
        }
    }
    // Grid points are enumerated by compositions in lexicographic order;
    // recover the index by re-walking the composition ranks.
    std::size_t index = 0;
    std::size_t remaining = denom;
    std::size_t slots = probs.size();
    for (std::size_t a = 0; a + 1 < probs.size(); ++a) {
        for (std::size_t k = 0; k < counts[a]; ++k) {
            // count of compositions of (remaining - k) into (slots - 1) parts
            std::size_t n = remaining - k, m = slots - 1;
            // C(n + m - 1, m - 1)
            double c = 1.0;
            for (std::size_t i = 1; i < m; ++i)
                c = c * static_cast<double>(n + i) / static_cast<double>(i);
            index += static_cast<std::size_t>(std::llround(c));
        }
        remaining -= counts[a];
        slots -= 1;
    }
    return std::min(index, grid.points.size() - 1);
}

}  // namespace

BruteForceResult brute_force_primal(const FiniteMdp& mdp, double h0, int grid_resolution) {
    mdp.validate();
    SimplexGrid grid = make_simplex_grid(mdp.n_actions, grid_resolution);
    const std::size_t n_points = grid.points.size();
    const std::size_t slots = mdp.steps() * mdp.n_states;

    double joint_count = std::pow(static_cast<double>(n_points), static_cast<double>(slots));
    constexpr double kJointLimit = 2e6;
    // Per-step block sweeps enumerate n_points^n_states candidates at a time.
    double block_count = std::pow(static_cast<double>(n_points),
                                  static_cast<double>(mdp.n_states));
    if (joint_count > kJointLimit && block_count > 1e8)
        throw ContractError("brute_force_primal: grid too large (" +
                            std::to_string(block_count) + " candidates per step block)");

    GridEvaluator eval(mdp, grid, h0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_assign;

    auto consider = [&](const std::vector<std::size_t>& assign) {
        bool feasible;
        double v = eval.evaluate(assign, feasible);
        if (feasible && v > best) {
            best = v;
            best_assign = assign;
        }
    };

    if (joint_count <= kJointLimit) {
        // Full joint enumeration in lexicographic assignment order, so ties
        // keep the lexicographically smallest policy.
        std::vector<std::size_t> assign(slots, 0);
        while (true) {
            consider(assign);
            std::size_t pos = slots;
            while (pos > 0) {
                --pos;
                if (++assign[pos] < n_points) break;
                assign[pos] = 0;
                if (pos == 0) {
                    BruteForceResult out;
                    out.p_star = best;
                    out.policy = assignment_to_policy(mdp, grid, best_assign);
                    out.evaluations = eval.evaluations;
                    out.exhaustive = true;
                    return out;
                }
            }
        }
    }

    // Block-coordinate sweeps: per step, exhaustively enumerate the joint
    // simplex grid over all states while the other steps stay fixed.
    std::vector<std::vector<std::size_t>> starts;

    std::size_t uniform_pt = snap_to_grid(
        grid, std::vector<double>(mdp.n_actions, 1.0 / static_cast<double>(mdp.n_actions)),
        grid_resolution);
    starts.emplace_back(slots, uniform_pt);

    DualSolution dual = dual_solve(mdp, h0);
    std::vector<std::size_t> snapped(slots);
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            std::vector<double> probs(mdp.n_actions);
            for (std::size_t a = 0; a < mdp.n_actions; ++a) probs[a] = dual.policy.at(t, s, a);
            snapped[t * mdp.n_states + s] = snap_to_grid(grid, probs, grid_resolution);
        }
    starts.push_back(snapped);

    Rng rng(0x5eedbf0aceULL);
    for (int k = 0; k < 4; ++k) {
        std::vector<std::size_t> assign(slots);
        for (auto& idx : assign) idx = rng.index(n_points);
        starts.push_back(std::move(assign));
    }

    for (const auto& start : starts) {
        std::vector<std::size_t> current = start;
        bool feasible;
        double current_value = eval.evaluate(current, feasible);
        if (!feasible) {
            // Blend toward the uniform start until feasible, then sweep.
            current.assign(slots, uniform_pt);
            current_value = eval.evaluate(current, feasible);
            if (!feasible) continue;
        }
        for (int sweep = 0; sweep < 64; ++sweep) {
            bool improved = false;
            for (std::size_t t = 0; t < mdp.steps(); ++t) {
                std::vector<std::size_t> trial = current;
                std::vector<std::size_t> block(mdp.n_states, 0);
                std::vector<std::size_t> best_block(&current[t * mdp.n_states],
                                                    &current[t * mdp.n_states] + mdp.n_states);
                double block_best = current_value;
                while (true) {
                    for (std::size_t s = 0; s < mdp.n_states; ++s)
                        trial[t * mdp.n_states + s] = block[s];
                    bool ok;
                    double v = eval.evaluate(trial, ok);
                    if (ok && v > block_best + 1e-15) {
                        block_best = v;
                        best_block.assign(block.begin(), block.end());
                    }
                    std::size_t pos = mdp.n_states;
                    bool done = true;
                    while (pos > 0) {
                        --pos;
                        if (++block[pos] < n_points) {
                            done = false;
                            break;
                        }
                        block[pos] = 0;
                    }
                    if (done) break;
                }
                if (block_best > current_value + 1e-15) {
                    for (std::size_t s = 0; s < mdp.n_states; ++s)
                        current[t * mdp.n_states + s] = best_block[s];
                    current_value = block_best;
                    improved = true;
                }
            }
            if (!improved) break;
        }
        if (current_value > best) {
            best = current_value;
            best_assign = current;
        }
    }

    if (best_assign.empty())
        throw InternalError("brute_force_primal: no feasible grid policy found");

    BruteForceResult out;
    out.p_star = best;
    out.policy = assignment_to_policy(mdp, grid, best_assign);
    out.evaluations = eval.evaluations;
    out.exhaustive = false;
    return out;
}

std::string DualityReport::to_json_string() const {
    nlohmann::json doc = {
        {"n_states", n_states},
        {"n_actions", n_actions},
        {"horizon", horizon},
        {"h0", h0},
        {"grid_resolution", grid_resolution},
        {"p_star", p_star},
        {"d_star", d_star},
        {"gap", gap},
        {"alpha_star", alpha_star},
        {"entropy_gap", entropy_gaps},
        {"slackness", slackness},
        {"d_star_recursion", d_star_recursion},
        {"recursion_abs_diff", recursion_abs_diff},
        {"brute_force", {{"evaluations", evaluations}, {"exhaustive", exhaustive}}},
        {"dual_sweeps", sweeps},
    };
    return doc.dump(2);
}

DualityReport verify_duality_report(const FiniteMdp& mdp, double h0, int grid_resolution) {
    DualSolution dual = dual_solve(mdp, h0);
    BruteForceResult primal = brute_force_primal(mdp, h0, grid_resolution);

    // Cross-check: accumulate the per-step iterative system
    // qbar_t = E[r_t] + qbar_{t+1} + alpha_{t+1} h_{t+1}, then
    // d* = qbar_0 + alpha_0 h_0; must match the backward-induction value.
    Marginals marg = marginals(mdp, dual.policy);
    EntropyGap gaps = policy_entropy_terms(dual.policy, marg, h0);
    std::vector<double> step_reward(mdp.steps(), 0.0);
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                step_reward[t] += marg.state_action(t, s, a) * mdp.r(s, a);
    double qbar = step_reward[mdp.steps() - 1];
    for (std::size_t ti = mdp.steps() - 1; ti-- > 0;)
        qbar = step_reward[ti] + qbar + dual.alphas.alphas[ti + 1] * gaps.h[ti + 1];
    double d_recursion = qbar + dual.alphas.alphas[0] * gaps.h[0];

    DualityReport report;
    report.n_states = mdp.n_states;
    report.n_actions = mdp.n_actions;
    report.horizon = mdp.horizon;
    report.h0 = h0;
    report.grid_resolution = grid_resolution;
    report.p_star = primal.p_star;
    report.d_star = dual.dual_value;
    report.gap = std::abs(primal.p_star - dual.dual_value);
    report.alpha_star = dual.alphas.alphas;
    report.entropy_gaps = dual.entropy_gaps;
    report.slackness = dual.slackness;
    report.d_star_recursion = d_recursion;
    report.recursion_abs_diff = std::abs(d_recursion - dual.dual_value);
    report.evaluations = primal.evaluations;
    report.exhaustive = primal.exhaustive;
    report.sweeps = dual.sweeps;
    return report;
}

}  // namespace entsac
