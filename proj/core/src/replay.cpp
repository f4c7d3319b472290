#include "covy/replay.hpp"

#include <stdexcept>
#include <unordered_set>

namespace covy {

void ReplayBuffer::add(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[write_] = std::move(t);
    }
    write_ = (write_ + 1) % capacity_;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0 || batch_size > storage_.size())
        throw std::invalid_argument("ReplayBuffer::sample: batch_size must be in [1, size]");

    // Without replacement inside a batch; rejection is cheap while the batch
    // stays small relative to the buffer, partial Fisher-Yates otherwise.
    std::vector<std::size_t> indices;
    indices.reserve(batch_size);
    if (batch_size * 2 <= storage_.size()) {
        std::unordered_set<std::size_t> seen;
        while (indices.size() < batch_size) {
            const std::size_t i = rng.uniform_index(storage_.size());
            if (seen.insert(i).second) indices.push_back(i);
        }
    } else {
        std::vector<std::size_t> all(storage_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (std::size_t k = 0; k < batch_size; ++k) {
            const std::size_t j = k + rng.uniform_index(all.size() - k);
            std::swap(all[k], all[j]);
            indices.push_back(all[k]);
        }
    }

    const Eigen::Index state_dim = storage_.front().state.size();
    Batch batch;
    batch.states.resize(static_cast<Eigen::Index>(batch_size), state_dim);
    batch.actions.resize(static_cast<Eigen::Index>(batch_size), 2);
    batch.rewards.resize(static_cast<Eigen::Index>(batch_size));
    batch.next_states.resize(static_cast<Eigen::Index>(batch_size), state_dim);
    batch.dones.resize(static_cast<Eigen::Index>(batch_size));
    for (std::size_t k = 0; k < batch_size; ++k) {
        const Transition& t = storage_[indices[k]];
        const Eigen::Index row = static_cast<Eigen::Index>(k);
        batch.states.row(row) = t.state.transpose();
        batch.actions.row(row) = t.action.transpose();
        batch.rewards(row) = t.reward;
        batch.next_states.row(row) = t.next_state.transpose();
        batch.dones(row) = t.done;
    }
    return batch;
}

}  // namespace covy
