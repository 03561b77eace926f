#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "entsac/rng.hpp"

namespace entsac {

struct ActionSpace {
    std::size_t dim = 0;
    std::vector<double> low;
    std::vector<double> high;

    // log |A| with |A| = prod(high_n - low_n); the uniform-distribution
    // entropy bound for the target entropy.
    double log_volume() const;
    void validate() const;
};

struct PendulumState {
    double theta = 0.0;      // radians, unwrapped
    double theta_dot = 0.0;  // rad/s, clamped to [-8, 8]
    int step_index = 0;
};

struct EpisodeOutcome {
    double return_sum = 0.0;
    int length = 0;
    bool truncated = false;
    bool terminal = false;
};

// Classic swing-up task: g = 10, m = 1, l = 1, dt = 0.05, torque in [-2, 2],
// 200-step time limit. Episodes only truncate, never terminate.
class PendulumEnv {
public:
    static constexpr double kGravity = 10.0;
    static constexpr double kMass = 1.0;
    static constexpr double kLength = 1.0;
    static constexpr double kDt = 0.05;
    static constexpr double kMaxSpeed = 8.0;
    static constexpr double kMaxTorque = 2.0;
    static constexpr int kTimeLimit = 200;

    struct StepResult {
        std::array<double, 3> obs;
        double reward = 0.0;
        bool truncated = false;
        bool terminal = false;  // always false for the pendulum
    };

    explicit PendulumEnv(std::uint64_t seed, std::uint64_t stream = 0);

    std::array<double, 3> reset();
    StepResult step(double action);

    const PendulumState& state() const { return state_; }
    std::array<double, 3> observation() const;
    static ActionSpace action_space();
    static std::size_t obs_dim() { return 3; }

private:
    Rng rng_;
    PendulumState state_;
};

// Maps any angle into [-pi, pi].
double wrap_angle(double theta);

struct TrajectoryRow {
    int step;
    double theta;
    double theta_dot;
    double action;
    double reward;
};

// CSV dump: step,theta,theta_dot,action,reward
void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<TrajectoryRow>& rows);

// Environment registry; only "pendulum-v1-local" exists.
bool is_known_env(const std::string& env_id);

}  // namespace entsac
