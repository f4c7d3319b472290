#pragma once

#include "covy/drl_env.hpp"
#include "covy/mlp.hpp"
#include "covy/replay.hpp"

namespace covy {

struct DdpgParams {
    std::vector<int> hidden{512, 512, 512};
    double actor_lr{1e-4};
    double critic_lr{1e-3};
    double gamma{0.99};
    double tau{0.005};
    double explore_sigma{0.1};        // initial Gaussian noise, normalized units
    double explore_sigma_final{0.01};
    std::int64_t explore_decay_steps{50000};
};

/// Deterministic actor-critic. The actor's linear-velocity head is a scaled
/// sigmoid and its angular head a scaled tanh, so raw network outputs always
/// land inside the action box.
class DdpgAgent {
public:
    DdpgAgent(const DdpgParams& params, const ActionBox& box, Rng& rng);

    /// Environment-frame action; exploration adds decayed Gaussian noise in
    /// normalized units and clamps back into the box.
    Eigen::Vector2d act(const Eigen::VectorXd& state, bool explore, Rng& rng);

    struct Losses {
        double critic{0.0};
        double actor{0.0};
    };
    Losses train_step(const Batch& batch);

    /// Loss cores used by both train_step and the finite-difference harness.
    /// Gradients go to the trained network only.
    double critic_loss(const Batch& batch, MlpGrads* grads) const;
    double actor_loss(const Batch& batch, MlpGrads* grads) const;

    /// Squashed normalized action for a state batch (rows in [-1,1]^2).
    Eigen::MatrixXd policy_actions(const Mlp& actor, const Eigen::MatrixXd& states,
                                   Mlp::Workspace* ws = nullptr) const;

    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic_target() const { return critic_target_; }
    const DdpgParams& params() const { return params_; }
    const ActionBox& action_box() const { return box_; }
    double current_explore_sigma() const;

    void sync_targets_hard();

    /// Replaces all four networks (checkpoint restore); optimizers restart.
    void set_networks(Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target);

private:
    DdpgParams params_;
    ActionBox box_;
    Mlp actor_, critic_, actor_target_, critic_target_;
    AdamOptimizer actor_opt_, critic_opt_;
    std::int64_t explore_steps_{0};
};

}  // namespace covy
