#include "entsac/replay.hpp"

#include <cmath>

#include "entsac/errors.hpp"

namespace entsac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ContractError("ReplayBuffer: capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (t.terminal && t.truncated)
        throw ContractError("ReplayBuffer: transition cannot be both terminal and truncated");
    for (double x : t.obs)
        if (!std::isfinite(x)) throw ContractError("ReplayBuffer: non-finite observation");
    for (double x : t.next_obs)
        if (!std::isfinite(x)) throw ContractError("ReplayBuffer: non-finite next observation");

    if (size_ < capacity_) {
        storage_.push_back(std::move(t));
        ++size_;
    } else {
        storage_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= size_) throw ContractError("ReplayBuffer::at: index out of range");
    if (size_ < capacity_) return storage_[logical];
    return storage_[(cursor_ + logical) % capacity_];
}

SacBatch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (size_ == 0) throw ContractError("ReplayBuffer::sample: buffer is empty");
    if (batch_size == 0) throw ContractError("ReplayBuffer::sample: batch size must be positive");

    std::size_t obs_dim = storage_[0].obs.size();
    std::size_t act_dim = storage_[0].action.size();

    SacBatch batch;
    batch.obs = Tensor({batch_size, obs_dim});
    batch.actions = Tensor({batch_size, act_dim});
    batch.next_obs = Tensor({batch_size, obs_dim});
    batch.rewards.resize(batch_size);
    batch.terminal.resize(batch_size);

    for (std::size_t i = 0; i < batch_size; ++i) {
        const Transition& t = storage_[rng.index(size_)];
        for (std::size_t j = 0; j < obs_dim; ++j) {
            batch.obs.at(i, j) = t.obs[j];
            batch.next_obs.at(i, j) = t.next_obs[j];
        }
        for (std::size_t j = 0; j < act_dim; ++j) batch.actions.at(i, j) = t.action[j];
        batch.rewards[i] = t.reward;
        batch.terminal[i] = t.terminal ? 1.0 : 0.0;
    }
    return batch;
}

}  // namespace entsac
