#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entsac/dual.hpp"
#include "entsac/errors.hpp"
#include "entsac/mdp.hpp"
#include "entsac/rng.hpp"

using namespace entsac;

namespace {

PolicyTable random_policy(const FiniteMdp& mdp, Rng& rng) {
    PolicyTable pt = PolicyTable::uniform(mdp.n_states, mdp.n_actions, mdp.horizon);
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            double sum = 0.0;
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                pt.at(t, s, a) = -std::log(1.0 - rng.uniform());
                sum += pt.at(t, s, a);
            }
            for (std::size_t a = 0; a < mdp.n_actions; ++a) pt.at(t, s, a) /= sum;
        }
    return pt;
}

std::size_t sample_from(const double* probs, std::size_t n, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return n - 1;
}

// Plain (entropy-free) finite-horizon value iteration; the optimal
// expected return with no constraint.
double plain_value_iteration(const FiniteMdp& mdp) {
    std::vector<double> v(mdp.n_states, 0.0);
    for (std::size_t ti = mdp.steps(); ti-- > 0;) {
        std::vector<double> next(mdp.n_states, 0.0);
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            double best = -1e300;
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.r(s, a);
                if (ti + 1 < mdp.steps())
                    for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                        q += mdp.p(s, a, s2) * v[s2];
                best = std::max(best, q);
            }
            next[s] = best;
        }
        v = std::move(next);
    }
    double total = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) total += mdp.initial_dist[s] * v[s];
    return total;
}

}  // namespace

TEST_CASE("marginals: deterministic single-state MDP keeps d_t = [1]") {
    FiniteMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.horizon = 3;
    mdp.transition = {1.0, 1.0};  // both actions stay
    mdp.reward = {0.5, -0.5};
    mdp.initial_dist = {1.0};
    PolicyTable pi = PolicyTable::uniform(1, 2, 3);
    Marginals m = marginals(mdp, pi);
    for (std::size_t t = 0; t < mdp.steps(); ++t) CHECK(m.state(t, 0) == 1.0);
}

TEST_CASE("marginals: doubly stochastic chain keeps the uniform distribution") {
    FiniteMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.horizon = 4;
    // Both actions use doubly stochastic transitions.
    mdp.transition = {
        0.3, 0.7, 0.6, 0.4,  // from s0: a0, a1
        0.7, 0.3, 0.4, 0.6,  // from s1: a0, a1
    };
    mdp.reward = {0, 0, 0, 0};
    mdp.initial_dist = {0.5, 0.5};
    mdp.validate();
    PolicyTable pi = PolicyTable::uniform(2, 2, 4);
    Marginals m = marginals(mdp, pi);
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        CHECK(m.state(t, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(m.state(t, 1) == doctest::Approx(0.5).epsilon(1e-12));
        double sum = 0.0;
        for (std::size_t s = 0; s < 2; ++s)
            for (std::size_t a = 0; a < 2; ++a) sum += m.state_action(t, s, a);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("marginals: match Monte-Carlo rollout frequencies within 3 standard errors") {
    Rng rng(31);
    FiniteMdp mdp = FiniteMdp::random(3, 2, 2, rng);
    PolicyTable pi = random_policy(mdp, rng);
    Marginals m = marginals(mdp, pi);

    constexpr int kEpisodes = 1000000;
    std::vector<double> counts(mdp.steps() * mdp.n_states * mdp.n_actions, 0.0);
    Rng roller(32);
    for (int ep = 0; ep < kEpisodes; ++ep) {
        std::size_t s = sample_from(mdp.initial_dist.data(), mdp.n_states, roller);
        for (std::size_t t = 0; t < mdp.steps(); ++t) {
            std::size_t a =
                sample_from(&pi.probs[(t * mdp.n_states + s) * mdp.n_actions], mdp.n_actions,
                            roller);
            counts[(t * mdp.n_states + s) * mdp.n_actions + a] += 1.0;
            if (t + 1 < mdp.steps())
                s = sample_from(&mdp.transition[(s * mdp.n_actions + a) * mdp.n_states],
                                mdp.n_states, roller);
        }
    }
    for (std::size_t t = 0; t < mdp.steps(); ++t)
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                double expected = m.state_action(t, s, a);
                double observed =
                    counts[(t * mdp.n_states + s) * mdp.n_actions + a] / kEpisodes;
                double se = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / kEpisodes);
                CHECK(std::abs(observed - expected) <= 3.0 * se + 1e-9);
            }
}

TEST_CASE("entropy terms: uniform two-action policy has h = ln 2 when H0 = 0") {
    FiniteMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.horizon = 1;
    mdp.transition = {1.0, 1.0};
    mdp.reward = {0, 0};
    mdp.initial_dist = {1.0};
    PolicyTable pi = PolicyTable::uniform(1, 2, 1);
    EntropyGap gap = policy_entropy_terms(pi, marginals(mdp, pi), 0.0);
    for (double h : gap.h) CHECK(h == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Deterministic policy: h = 0.
    pi.at(0, 0, 0) = 1.0;
    pi.at(0, 0, 1) = 0.0;
    pi.at(1, 0, 0) = 1.0;
    pi.at(1, 0, 1) = 0.0;
    EntropyGap det = policy_entropy_terms(pi, marginals(mdp, pi), 0.0);
    CHECK(det.h[0] == 0.0);
    CHECK(det.h[1] == 0.0);
    CHECK_FALSE(det.degenerate);
}

TEST_CASE("entropy terms: random policy matches an independent summation to 1e-12") {
    Rng rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        FiniteMdp mdp = FiniteMdp::random(3, 3, 2, rng);
        PolicyTable pi = random_policy(mdp, rng);
        Marginals m = marginals(mdp, pi);
        double h0 = rng.uniform(-1.0, 1.0);
        EntropyGap gap = policy_entropy_terms(pi, m, h0);

        for (std::size_t t = 0; t < mdp.steps(); ++t) {
            double direct = 0.0;
            for (std::size_t s = 0; s < mdp.n_states; ++s)
                for (std::size_t a = 0; a < mdp.n_actions; ++a)
                    direct += m.state_action(t, s, a) * -std::log(pi.at(t, s, a));
            CHECK(std::abs(gap.h[t] - (direct - h0)) <= 1e-12);
        }
    }
}

TEST_CASE("evaluate_recursion: H0 = 0 makes both variants identical") {
    Rng rng(59);
    FiniteMdp mdp = FiniteMdp::random(2, 2, 3, rng);
    PolicyTable pi = random_policy(mdp, rng);
    TemperatureSchedule alphas = TemperatureSchedule::constant(0.7, mdp.horizon);
    QTable corrected = evaluate_recursion(mdp, pi, alphas, 0.0, BackupVariant::kCorrected);
    QTable missing = evaluate_recursion(mdp, pi, alphas, 0.0, BackupVariant::kMissingTarget);
    CHECK(corrected.q == missing.q);
}

TEST_CASE("evaluate_recursion: horizon 0 gives Q = r for both variants") {
    Rng rng(61);
    FiniteMdp mdp = FiniteMdp::random(2, 3, 0, rng);
    PolicyTable pi = random_policy(mdp, rng);
    TemperatureSchedule alphas = TemperatureSchedule::constant(1.3, 0);
    for (auto variant : {BackupVariant::kCorrected, BackupVariant::kMissingTarget}) {
        QTable qt = evaluate_recursion(mdp, pi, alphas, 0.4, variant);
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                CHECK(qt.at(0, s, a) == mdp.r(s, a));
    }
}

TEST_CASE("evaluate_recursion: corrected - missing = -(T - t) * alpha * H0 (property, 50 MDPs)") {
    Rng rng(67);
    for (int trial = 0; trial < 50; ++trial) {
        int horizon = static_cast<int>(rng.index(4));
        FiniteMdp mdp = FiniteMdp::random(1 + rng.index(3), 1 + rng.index(3), horizon, rng);
        PolicyTable pi = random_policy(mdp, rng);
        double alpha = rng.uniform(0.0, 2.0);
        double h0 = rng.uniform(-1.0, 1.0);
        TemperatureSchedule alphas = TemperatureSchedule::constant(alpha, mdp.horizon);

        QTable corrected = evaluate_recursion(mdp, pi, alphas, h0, BackupVariant::kCorrected);
        QTable missing = evaluate_recursion(mdp, pi, alphas, h0, BackupVariant::kMissingTarget);
        for (std::size_t t = 0; t < mdp.steps(); ++t) {
            double expected = -(static_cast<double>(mdp.steps() - 1 - t)) * alpha * h0;
            for (std::size_t s = 0; s < mdp.n_states; ++s)
                for (std::size_t a = 0; a < mdp.n_actions; ++a)
                    CHECK(std::abs(corrected.at(t, s, a) - missing.at(t, s, a) - expected) <=
                          1e-9);
        }
    }
}

TEST_CASE("evaluate_recursion: qbar matches the rho-weighted mean of q to 1e-12") {
    Rng rng(71);
    FiniteMdp mdp = FiniteMdp::random(3, 2, 3, rng);
    PolicyTable pi = random_policy(mdp, rng);
    TemperatureSchedule alphas = TemperatureSchedule::constant(0.5, mdp.horizon);
    QTable qt = evaluate_recursion(mdp, pi, alphas, 0.3, BackupVariant::kCorrected);
    Marginals m = marginals(mdp, pi);
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                acc += m.state_action(t, s, a) * qt.at(t, s, a);
        CHECK(std::abs(qt.qbar[t] - acc) <= 1e-12);
    }
}

TEST_CASE("boltzmann_policy: symmetry, large-alpha limit, closed form") {
    auto equal = boltzmann_policy({3.4, 3.4}, 0.9);
    CHECK(equal[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(equal[1] == doctest::Approx(0.5).epsilon(1e-15));

    auto nearly_uniform = boltzmann_policy({1.0, 0.0}, 1e6);
    CHECK(std::abs(nearly_uniform[0] - 0.5) <= 1e-6);
    CHECK(std::abs(nearly_uniform[1] - 0.5) <= 1e-6);

    auto softmax = boltzmann_policy({1.0, 0.0}, 1.0);
    double e = std::exp(1.0);
    CHECK(softmax[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
    CHECK(softmax[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(boltzmann_policy({1.0, 0.0}, 0.0), ContractError);
    CHECK_THROWS_AS(boltzmann_policy({1.0, 0.0}, -1.0), ContractError);

    auto greedy = greedy_policy({1.0, 1.0, 0.5});
    CHECK(greedy == std::vector<double>{1.0, 0.0, 0.0});  // lowest index wins ties
}

TEST_CASE("dual_solve_step: constant rewards give alpha* = 0 at any feasible H0 < log n") {
    FiniteMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.horizon = 0;
    mdp.transition = {1.0, 1.0};
    mdp.reward = {0.7, 0.7};
    mdp.initial_dist = {1.0};
    TemperatureSchedule alphas = TemperatureSchedule::constant(1.0, 0);
    DualStepSolution step = dual_solve_step(mdp, 0, alphas, 0.5);
    CHECK(step.alpha == 0.0);
    // The Boltzmann maximizer is uniform at any alpha > 0 (reward ties), so
    // the constraint is slack there and the coordinate collapses to 0.
    alphas.alphas[0] = 1e-8;
    CHECK(dual_entropy_gaps(mdp, alphas, 0.5)[0] >= 0.0);
    CHECK(step.alpha * step.entropy_gap == 0.0);
}

TEST_CASE("dual_solve: H0 = log(n_actions) forces the uniform policy with zero slackness") {
    Rng rng(83);
    FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
    DualSolution sol = dual_solve(mdp, std::log(2.0));
    for (std::size_t t = 0; t < mdp.steps(); ++t) {
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                CHECK(sol.policy.at(t, s, a) == 0.5);
        CHECK(sol.entropy_gaps[t] == 0.0);
        CHECK(sol.slackness[t] == 0.0);
    }
}

TEST_CASE("dual_solve: infeasible H0 raises InfeasibleError") {
    Rng rng(89);
    FiniteMdp mdp = FiniteMdp::random(2, 2, 1, rng);
    CHECK_THROWS_AS(dual_solve(mdp, std::log(2.0) + 0.01), InfeasibleError);
    TemperatureSchedule alphas = TemperatureSchedule::constant(1.0, 1);
    CHECK_THROWS_AS(dual_solve_step(mdp, 0, alphas, 1.0), InfeasibleError);
}

TEST_CASE("dual_solve_step: random rewards satisfy |h| <= 1e-8 or alpha* = 0") {
    Rng rng(97);
    for (int trial = 0; trial < 20; ++trial) {
        FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
        TemperatureSchedule alphas = TemperatureSchedule::constant(1.0, mdp.horizon);
        DualStepSolution step = dual_solve_step(mdp, 1, alphas, 0.5);
        bool boundary = step.alpha == 0.0 && step.entropy_gap >= -1e-12;
        bool interior = std::abs(step.entropy_gap) <= 1e-8;
        CHECK((boundary || interior));
    }
}

TEST_CASE("brute_force_primal: one-state horizon-0 with r=(1,0) and H0=0 achieves p*=1") {
    FiniteMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.horizon = 0;
    mdp.transition = {1.0, 1.0};
    mdp.reward = {1.0, 0.0};
    mdp.initial_dist = {1.0};
    BruteForceResult result = brute_force_primal(mdp, 0.0, 201);
    CHECK(result.p_star == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.policy.at(0, 0, 0) == 1.0);
    CHECK(result.exhaustive);
}

TEST_CASE("brute_force_primal: symmetric rewards peak at the uniform grid point") {
    FiniteMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.horizon = 0;
    mdp.transition = {1.0, 1.0};
    mdp.reward = {0.25, 0.25};
    mdp.initial_dist = {1.0};
    BruteForceResult result = brute_force_primal(mdp, 0.6, 201);
    // Every feasible policy ties at 0.25 (the uniform one included); the
    // returned argmax must be feasible and the value exact.
    CHECK(result.p_star == doctest::Approx(0.25).epsilon(1e-12));
    std::vector<double> row = {result.policy.at(0, 0, 0), result.policy.at(0, 0, 1)};
    CHECK(distribution_entropy(row) >= 0.6 - 1e-9);
}

TEST_CASE("duality: random 2-state/2-action/horizon-2 MDP at H0=0.3 has gap <= 1e-3") {
    Rng rng(103);
    FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
    DualityReport report = verify_duality_report(mdp, 0.3, 201);
    CHECK(report.gap <= 1e-3);
    CHECK(report.recursion_abs_diff <= 1e-9);
    for (double s : report.slackness) CHECK(std::abs(s) <= 1e-6);
}

TEST_CASE("duality: trivially slack constraint (H0 = -10) recovers plain value iteration") {
    Rng rng(107);
    for (int trial = 0; trial < 5; ++trial) {
        FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
        DualSolution sol = dual_solve(mdp, -10.0);
        for (double a : sol.alphas.alphas) CHECK(a <= 1e-6);
        CHECK(std::abs(sol.dual_value - plain_value_iteration(mdp)) <= 1e-6);
    }
}

TEST_CASE("duality: symmetric MDP has alpha * h = 0 at the uniform optimum") {
    FiniteMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.horizon = 1;
    mdp.transition = {
        0.5, 0.5, 0.5, 0.5,
        0.5, 0.5, 0.5, 0.5,
    };
    mdp.reward = {0.3, 0.3, 0.3, 0.3};
    mdp.initial_dist = {0.5, 0.5};
    DualSolution sol = dual_solve(mdp, 0.4);
    for (double s : sol.slackness) CHECK(std::abs(s) <= 1e-12);
    CHECK(sol.dual_value == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("duality: strong duality holds across H0 values (property sample)") {
    Rng rng(109);
    for (double h0 : {-1.0, 0.0, 0.3, 0.6}) {
        FiniteMdp mdp = FiniteMdp::random(2, 2, static_cast<int>(rng.index(3)), rng);
        DualityReport report = verify_duality_report(mdp, h0, 201);
        CHECK(report.gap <= 1e-3);
        CHECK(report.p_star <= report.d_star + 1e-9);  // weak duality: dual upper-bounds
    }
}

TEST_CASE("dual function: midpoint convexity on sampled alpha triples") {
    Rng rng(113);
    for (int trial = 0; trial < 20; ++trial) {
        FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
        double h0 = rng.uniform(-0.5, 0.6);
        TemperatureSchedule a = TemperatureSchedule::constant(0.0, mdp.horizon);
        TemperatureSchedule b = a, mid = a;
        for (std::size_t t = 0; t < mdp.steps(); ++t) {
            a.alphas[t] = rng.uniform(0.0, 3.0);
            b.alphas[t] = rng.uniform(0.0, 3.0);
            mid.alphas[t] = 0.5 * (a.alphas[t] + b.alphas[t]);
        }
        double ga = dual_function_value(mdp, a, h0);
        double gb = dual_function_value(mdp, b, h0);
        double gm = dual_function_value(mdp, mid, h0);
        CHECK(gm <= 0.5 * (ga + gb) + 1e-10);
    }
}

TEST_CASE("entropy bound: computed policy entropy never exceeds log(n_actions)") {
    Rng rng(127);
    for (int trial = 0; trial < 20; ++trial) {
        FiniteMdp mdp = FiniteMdp::random(2, 3, 2, rng);
        DualSolution sol = dual_solve(mdp, rng.uniform(-1.0, 1.0));
        double bound = std::log(3.0);
        for (std::size_t t = 0; t < mdp.steps(); ++t)
            for (std::size_t s = 0; s < mdp.n_states; ++s) {
                std::vector<double> row(mdp.n_actions);
                for (std::size_t a = 0; a < mdp.n_actions; ++a) row[a] = sol.policy.at(t, s, a);
                CHECK(distribution_entropy(row) <= bound + 1e-12);
            }
    }
}

TEST_CASE("mdp json: round-trip and malformed input") {
    Rng rng(131);
    FiniteMdp mdp = FiniteMdp::random(3, 2, 2, rng);
    FiniteMdp loaded = FiniteMdp::from_json_string(mdp.to_json_string());
    CHECK(loaded.transition == mdp.transition);
    CHECK(loaded.reward == mdp.reward);
    CHECK(loaded.initial_dist == mdp.initial_dist);
    CHECK(loaded.horizon == mdp.horizon);

    CHECK_THROWS_AS(FiniteMdp::from_json_string("{"), IoError);
    CHECK_THROWS_AS(FiniteMdp::from_json_string("{\"n_states\": 1}"), IoError);
}

TEST_CASE("marginals: horizon mismatch raises ContractError") {
    Rng rng(137);
    FiniteMdp mdp = FiniteMdp::random(2, 2, 2, rng);
    PolicyTable pi = PolicyTable::uniform(2, 2, 3);
    CHECK_THROWS_AS(marginals(mdp, pi), ContractError);
}
