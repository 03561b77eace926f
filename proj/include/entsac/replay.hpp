#pragma once

#include <vector>

#include "entsac/rng.hpp"
#include "entsac/sac.hpp"

namespace entsac {

struct Transition {
    std::vector<double> obs;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
    bool truncated = false;
};

// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t logical) const;  // 0 = oldest

    SacBatch sample(std::size_t batch_size, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace entsac
