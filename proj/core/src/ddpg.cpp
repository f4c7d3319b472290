#include "covy/ddpg.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

namespace {

std::vector<int> net_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

DdpgAgent::DdpgAgent(const DdpgParams& params, const ActionBox& box, Rng& rng)
    : params_(params),
      box_(box),
      actor_(net_dims(kStateDim, params.hidden, kActionDim), rng),
      critic_(net_dims(kStateDim + kActionDim, params.hidden, 1), rng) {
    if (!(params.gamma > 0.0 && params.gamma < 1.0))
        throw std::invalid_argument("ddpg.gamma must be in (0, 1)");
    if (!(params.tau > 0.0 && params.tau <= 1.0))
        throw std::invalid_argument("ddpg.tau must be in (0, 1]");
    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_opt_ = AdamOptimizer(actor_, params_.actor_lr);
    critic_opt_ = AdamOptimizer(critic_, params_.critic_lr);
}

void DdpgAgent::sync_targets_hard() {
    actor_target_ = actor_;
    critic_target_ = critic_;
}

void DdpgAgent::set_networks(Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target) {
    actor_ = std::move(actor);
    critic_ = std::move(critic);
    actor_target_ = std::move(actor_target);
    critic_target_ = std::move(critic_target);
    actor_opt_ = AdamOptimizer(actor_, params_.actor_lr);
    critic_opt_ = AdamOptimizer(critic_, params_.critic_lr);
}

Eigen::MatrixXd DdpgAgent::policy_actions(const Mlp& actor, const Eigen::MatrixXd& states,
                                          Mlp::Workspace* ws) const {
    const Eigen::MatrixXd raw = actor.forward(states, ws);
    Eigen::MatrixXd a(raw.rows(), 2);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        a(i, 0) = 2.0 * sigmoid(raw(i, 0)) - 1.0;  // linear head: sigmoid
        a(i, 1) = std::tanh(raw(i, 1));            // angular head: tanh
    }
    return a;
}

double DdpgAgent::current_explore_sigma() const {
    if (params_.explore_decay_steps <= 0) return params_.explore_sigma_final;
    const double frac = std::min(
        1.0, static_cast<double>(explore_steps_) / static_cast<double>(params_.explore_decay_steps));
    return params_.explore_sigma + frac * (params_.explore_sigma_final - params_.explore_sigma);
}

Eigen::Vector2d DdpgAgent::act(const Eigen::VectorXd& state, bool explore, Rng& rng) {
    const Eigen::MatrixXd a = policy_actions(actor_, state.transpose());
    Eigen::Vector2d a_norm = a.row(0).transpose();
    if (explore) {
        const double sigma = current_explore_sigma();
        ++explore_steps_;
        a_norm(0) = std::clamp(a_norm(0) + rng.normal(0.0, sigma), -1.0, 1.0);
        a_norm(1) = std::clamp(a_norm(1) + rng.normal(0.0, sigma), -1.0, 1.0);
    }
    return box_.denormalize(a_norm);
}

double DdpgAgent::critic_loss(const Batch& batch, MlpGrads* grads) const {
    const Eigen::Index n = batch.size();

    // Bootstrap target from the target networks; constant for the regression.
    const Eigen::MatrixXd next_actions = policy_actions(actor_target_, batch.next_states);
    Eigen::MatrixXd next_in(n, kStateDim + kActionDim);
    next_in << batch.next_states, next_actions;
    const Eigen::VectorXd q_next = critic_target_.forward(next_in).col(0);

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = batch.rewards(i) + params_.gamma * (1.0 - batch.dones(i)) * q_next(i);
    }

    Eigen::MatrixXd in(n, kStateDim + kActionDim);
    in << batch.states, batch.actions;
    Mlp::Workspace ws;
    const Eigen::VectorXd q = critic_.forward(in, &ws).col(0);

    const Eigen::VectorXd err = q - y;
    const double loss = err.squaredNorm() / static_cast<double>(n);
    if (grads) {
        grads->set_zero(critic_);
        const Eigen::MatrixXd dq = (2.0 / static_cast<double>(n)) * err;
        critic_.backward(ws, dq, *grads);
    }
    return loss;
}

double DdpgAgent::actor_loss(const Batch& batch, MlpGrads* grads) const {
    const Eigen::Index n = batch.size();

    Mlp::Workspace actor_ws;
    const Eigen::MatrixXd raw = actor_.forward(batch.states, &actor_ws);
    Eigen::MatrixXd a(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 2.0 * sigmoid(raw(i, 0)) - 1.0;
        a(i, 1) = std::tanh(raw(i, 1));
    }

    Eigen::MatrixXd in(n, kStateDim + kActionDim);
    in << batch.states, a;
    Mlp::Workspace critic_ws;
    const Eigen::VectorXd q = critic_.forward(in, &critic_ws).col(0);
    const double loss = -q.mean();

    if (grads) {
        grads->set_zero(actor_);
        // Pull dQ/d(input) out of the critic; its own parameter gradients are
        // discarded here.
        MlpGrads critic_scratch;
        critic_scratch.set_zero(critic_);
        Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(n, 1, -1.0 / static_cast<double>(n));
        const Eigen::MatrixXd din = critic_.backward(critic_ws, dq, critic_scratch);

        Eigen::MatrixXd draw(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sigmoid(raw(i, 0));
            const double t = std::tanh(raw(i, 1));
            draw(i, 0) = din(i, kStateDim + 0) * 2.0 * s * (1.0 - s);
            draw(i, 1) = din(i, kStateDim + 1) * (1.0 - t * t);
        }
        actor_.backward(actor_ws, draw, *grads);
    }
    return loss;
}

DdpgAgent::Losses DdpgAgent::train_step(const Batch& batch) {
    Losses losses;

    MlpGrads critic_grads;
    losses.critic = critic_loss(batch, &critic_grads);
    critic_opt_.step(critic_, critic_grads);

    MlpGrads actor_grads;
    losses.actor = actor_loss(batch, &actor_grads);
    actor_opt_.step(actor_, actor_grads);

    actor_target_.soft_update_from(actor_, params_.tau);
    critic_target_.soft_update_from(critic_, params_.tau);
    return losses;
}

}  // namespace covy
