#pragma once

#include "covy/drl_env.hpp"
#include "covy/mlp.hpp"
#include "covy/replay.hpp"

namespace covy {

struct SacParams {
    std::vector<int> hidden{256, 256};
    double lr{3e-4};
    double gamma{0.99};
    double tau{0.005};
    double init_alpha{0.2};
    double target_entropy{-2.0};  // -dim(action)
    bool auto_alpha{true};
};

/// Soft actor-critic with a squashed-Gaussian policy, twin Q critics with
/// target copies and an auto-tuned entropy temperature; no value network.
class SacAgent {
public:
    SacAgent(const SacParams& params, const ActionBox& box, Rng& rng);

    struct ActResult {
        Eigen::Vector2d action_env;
        Eigen::Vector2d action_norm;
        double log_prob{0.0};
    };
    /// Samples the policy (or takes the mean when deterministic) and returns
    /// the environment action plus its log density over environment actions.
    ActResult act(const Eigen::VectorXd& state, bool deterministic, Rng& rng);

    struct Losses {
        double q1{0.0};
        double q2{0.0};
        double policy{0.0};
        double alpha{0.0};
    };
    Losses train_step(const Batch& batch, Rng& rng);

    /// Policy head evaluated on a state batch with externally supplied
    /// standard-normal noise (one row per sample); log_probs are densities
    /// over environment actions.
    struct PolicySample {
        Eigen::MatrixXd actions_norm;  // tanh(u), B x 2
        Eigen::VectorXd log_probs;     // B
    };
    PolicySample sample_policy(const Eigen::MatrixXd& states, const Eigen::MatrixXd& eps) const;

    /// Loss cores shared with the finite-difference harness; eps matrices fix
    /// the reparameterization noise so every loss is deterministic in the
    /// parameters.
    double q_loss(int which, const Batch& batch, const Eigen::MatrixXd& eps_next,
                  MlpGrads* grads) const;
    double policy_loss(const Batch& batch, const Eigen::MatrixXd& eps, MlpGrads* grads) const;
    double alpha_loss(const Batch& batch, const Eigen::MatrixXd& eps, double* grad_log_alpha) const;

    Mlp& policy() { return policy_; }
    Mlp& q1() { return q1_; }
    Mlp& q2() { return q2_; }
    const Mlp& policy() const { return policy_; }
    const Mlp& q1() const { return q1_; }
    const Mlp& q2() const { return q2_; }
    const Mlp& q1_target() const { return q1_target_; }
    const Mlp& q2_target() const { return q2_target_; }
    double alpha() const { return std::exp(log_alpha_); }
    double log_alpha() const { return log_alpha_; }
    void set_log_alpha(double v) { log_alpha_ = v; }
    const SacParams& params() const { return params_; }
    const ActionBox& action_box() const { return box_; }

    /// Replaces all five networks (checkpoint restore); optimizers restart.
    void set_networks(Mlp policy, Mlp q1, Mlp q2, Mlp q1_target, Mlp q2_target);

private:
    SacParams params_;
    ActionBox box_;
    Mlp policy_, q1_, q2_, q1_target_, q2_target_;
    AdamOptimizer policy_opt_, q1_opt_, q2_opt_;
    ScalarAdam alpha_opt_;
    double log_alpha_;
};

}  // namespace covy
