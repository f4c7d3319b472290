#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "covy/rng.hpp"

namespace covy {

struct Transition {
    Eigen::VectorXd state;
    Eigen::Vector2d action;  // normalized to [-1, 1]^2
    double reward{0.0};
    Eigen::VectorXd next_state;
    double done{0.0};
};

struct Batch {
    Eigen::MatrixXd states;       // B x state_dim
    Eigen::MatrixXd actions;      // B x 2
    Eigen::VectorXd rewards;      // B
    Eigen::MatrixXd next_states;  // B x state_dim
    Eigen::VectorXd dones;        // B

    Eigen::Index size() const { return states.rows(); }
};

/// Ring buffer of transitions with uniform without-replacement batch
/// sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void add(Transition t);
    Batch sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::size_t write_{0};
    std::vector<Transition> storage_;
};

}  // namespace covy
