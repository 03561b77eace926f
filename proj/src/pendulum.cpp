#include "entsac/pendulum.hpp"

#include <cmath>
#include <fstream>

#include "entsac/errors.hpp"

namespace entsac {

double ActionSpace::log_volume() const {
    double v = 0.0;
    for (std::size_t i = 0; i < dim; ++i) v += std::log(high[i] - low[i]);
    return v;
}

void ActionSpace::validate() const {
    if (dim == 0 || low.size() != dim || high.size() != dim)
        throw ContractError("ActionSpace: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i)
        if (!(low[i] < high[i])) throw ContractError("ActionSpace: low must be < high");
}

double wrap_angle(double theta) {
    double wrapped = std::fmod(theta + M_PI, 2.0 * M_PI);
    if (wrapped < 0.0) wrapped += 2.0 * M_PI;
    return wrapped - M_PI;
}

PendulumEnv::PendulumEnv(std::uint64_t seed, std::uint64_t stream)
    : rng_(Rng::split(seed, "pendulum-env", stream)) {}

std::array<double, 3> PendulumEnv::observation() const {
    return {std::cos(state_.theta), std::sin(state_.theta), state_.theta_dot};
}

std::array<double, 3> PendulumEnv::reset() {
    state_.theta = rng_.uniform(-M_PI, M_PI);
    state_.theta_dot = rng_.uniform(-1.0, 1.0);
    state_.step_index = 0;
    return observation();
}

PendulumEnv::StepResult PendulumEnv::step(double action) {
    if (!std::isfinite(action)) throw ContractError("PendulumEnv::step: non-finite action");
    double u = std::clamp(action, -kMaxTorque, kMaxTorque);

    // Cost is charged on the entry state.
    double angle = wrap_angle(state_.theta);
    double reward =
        -(angle * angle + 0.1 * state_.theta_dot * state_.theta_dot + 0.001 * u * u);

    double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(state_.theta) +
                   3.0 / (kMass * kLength * kLength) * u;
    state_.theta_dot = std::clamp(state_.theta_dot + accel * kDt, -kMaxSpeed, kMaxSpeed);
    state_.theta += state_.theta_dot * kDt;
    state_.step_index += 1;

    StepResult out;
    out.obs = observation();
    out.reward = reward;
    out.truncated = state_.step_index >= kTimeLimit;
    out.terminal = false;
    return out;
}

ActionSpace PendulumEnv::action_space() {
    ActionSpace space;
    space.dim = 1;
    space.low = {-kMaxTorque};
    space.high = {kMaxTorque};
    return space;
}

void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<TrajectoryRow>& rows) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << "step,theta,theta_dot,action,reward\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", row.step, row.theta,
                      row.theta_dot, row.action, row.reward);
        out << buf;
    }
}

bool is_known_env(const std::string& env_id) { return env_id == "pendulum-v1-local"; }

}  // namespace entsac
