#include "covy/sac.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

namespace {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kSquashGuard = 1e-9;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

std::vector<int> net_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

/// Smooth squash of the raw log-std head into [kLogStdMin, kLogStdMax].
inline double squash_log_std(double raw) {
    return kLogStdMin + 0.5 * (kLogStdMax - kLogStdMin) * (std::tanh(raw) + 1.0);
}

}  // namespace

SacAgent::SacAgent(const SacParams& params, const ActionBox& box, Rng& rng)
    : params_(params),
      box_(box),
      policy_(net_dims(kStateDim, params.hidden, 2 * kActionDim), rng),
      q1_(net_dims(kStateDim + kActionDim, params.hidden, 1), rng),
      q2_(net_dims(kStateDim + kActionDim, params.hidden, 1), rng),
      log_alpha_(std::log(params.init_alpha)) {
    if (!(params.gamma > 0.0 && params.gamma < 1.0))
        throw std::invalid_argument("sac.gamma must be in (0, 1)");
    if (!(params.tau > 0.0 && params.tau <= 1.0))
        throw std::invalid_argument("sac.tau must be in (0, 1]");
    if (!(params.init_alpha > 0.0))
        throw std::invalid_argument("sac.init_alpha must be > 0");
    q1_target_ = q1_;
    q2_target_ = q2_;
    policy_opt_ = AdamOptimizer(policy_, params_.lr);
    q1_opt_ = AdamOptimizer(q1_, params_.lr);
    q2_opt_ = AdamOptimizer(q2_, params_.lr);
    alpha_opt_ = ScalarAdam(params_.lr);
}

void SacAgent::set_networks(Mlp policy, Mlp q1, Mlp q2, Mlp q1_target, Mlp q2_target) {
    policy_ = std::move(policy);
    q1_ = std::move(q1);
    q2_ = std::move(q2);
    q1_target_ = std::move(q1_target);
    q2_target_ = std::move(q2_target);
    policy_opt_ = AdamOptimizer(policy_, params_.lr);
    q1_opt_ = AdamOptimizer(q1_, params_.lr);
    q2_opt_ = AdamOptimizer(q2_, params_.lr);
}

SacAgent::PolicySample SacAgent::sample_policy(const Eigen::MatrixXd& states,
                                               const Eigen::MatrixXd& eps) const {
    const Eigen::Index n = states.rows();
    const Eigen::MatrixXd raw = policy_.forward(states);
    PolicySample out;
    out.actions_norm.resize(n, kActionDim);
    out.log_probs = Eigen::VectorXd::Zero(n);
    const double scales[2] = {0.5 * box_.v_max, box_.w_max};

    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kActionDim; ++d) {
            const double mean = raw(i, d);
            const double log_std = squash_log_std(raw(i, kActionDim + d));
            const double std = std::exp(log_std);
            const double u = mean + std * eps(i, d);
            const double t = std::tanh(u);
            out.actions_norm(i, d) = t;
            out.log_probs(i) += -0.5 * eps(i, d) * eps(i, d) - log_std - kHalfLog2Pi -
                                std::log(scales[d] * (1.0 - t * t) + kSquashGuard);
        }
    }
    return out;
}

SacAgent::ActResult SacAgent::act(const Eigen::VectorXd& state, bool deterministic, Rng& rng) {
    Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(1, kActionDim);
    if (!deterministic) {
        eps(0, 0) = rng.normal();
        eps(0, 1) = rng.normal();
    }
    const PolicySample ps = sample_policy(state.transpose(), eps);
    ActResult out;
    out.action_norm = ps.actions_norm.row(0).transpose();
    out.action_env = box_.denormalize(out.action_norm);
    out.log_prob = ps.log_probs(0);
    return out;
}

double SacAgent::q_loss(int which, const Batch& batch, const Eigen::MatrixXd& eps_next,
                        MlpGrads* grads) const {
    const Eigen::Index n = batch.size();
    const Mlp& q_net = which == 1 ? q1_ : q2_;

    // Entropy-regularized twin-Q bootstrap target, constant for this loss.
    const PolicySample next = sample_policy(batch.next_states, eps_next);
    Eigen::MatrixXd next_in(n, kStateDim + kActionDim);
    next_in << batch.next_states, next.actions_norm;
    const Eigen::VectorXd q1n = q1_target_.forward(next_in).col(0);
    const Eigen::VectorXd q2n = q2_target_.forward(next_in).col(0);
    const double alpha_v = alpha();

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double soft_q = std::min(q1n(i), q2n(i)) - alpha_v * next.log_probs(i);
        y(i) = batch.rewards(i) + params_.gamma * (1.0 - batch.dones(i)) * soft_q;
    }

    Eigen::MatrixXd in(n, kStateDim + kActionDim);
    in << batch.states, batch.actions;
    Mlp::Workspace ws;
    const Eigen::VectorXd q = q_net.forward(in, &ws).col(0);
    const Eigen::VectorXd err = q - y;
    const double loss = err.squaredNorm() / static_cast<double>(n);

    if (grads) {
        grads->set_zero(q_net);
        const Eigen::MatrixXd dq = (2.0 / static_cast<double>(n)) * err;
        q_net.backward(ws, dq, *grads);
    }
    return loss;
}

double SacAgent::policy_loss(const Batch& batch, const Eigen::MatrixXd& eps,
                             MlpGrads* grads) const {
    const Eigen::Index n = batch.size();
    const double alpha_v = alpha();
    const double scales[2] = {0.5 * box_.v_max, box_.w_max};

    Mlp::Workspace policy_ws;
    const Eigen::MatrixXd raw = policy_.forward(batch.states, &policy_ws);

    Eigen::MatrixXd t(n, kActionDim), u(n, kActionDim), stds(n, kActionDim),
        log_stds(n, kActionDim);
    Eigen::VectorXd log_probs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kActionDim; ++d) {
            log_stds(i, d) = squash_log_std(raw(i, kActionDim + d));
            stds(i, d) = std::exp(log_stds(i, d));
            u(i, d) = raw(i, d) + stds(i, d) * eps(i, d);
            t(i, d) = std::tanh(u(i, d));
            log_probs(i) += -0.5 * eps(i, d) * eps(i, d) - log_stds(i, d) - kHalfLog2Pi -
                            std::log(scales[d] * (1.0 - t(i, d) * t(i, d)) + kSquashGuard);
        }
    }

    Eigen::MatrixXd in(n, kStateDim + kActionDim);
    in << batch.states, t;
    Mlp::Workspace q1_ws, q2_ws;
    const Eigen::VectorXd qa = q1_.forward(in, &q1_ws).col(0);
    const Eigen::VectorXd qb = q2_.forward(in, &q2_ws).col(0);

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        loss += alpha_v * log_probs(i) - std::min(qa(i), qb(i));
    }
    loss /= static_cast<double>(n);

    if (grads) {
        grads->set_zero(policy_);
        const double inv_n = 1.0 / static_cast<double>(n);

        // dLoss/d(action) through the per-sample smaller Q head only.
        MlpGrads scratch;
        Eigen::MatrixXd dq1 = Eigen::MatrixXd::Zero(n, 1);
        Eigen::MatrixXd dq2 = Eigen::MatrixXd::Zero(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            (qa(i) <= qb(i) ? dq1(i, 0) : dq2(i, 0)) = -inv_n;
        }
        scratch.set_zero(q1_);
        const Eigen::MatrixXd din1 = q1_.backward(q1_ws, dq1, scratch);
        scratch.set_zero(q2_);
        const Eigen::MatrixXd din2 = q2_.backward(q2_ws, dq2, scratch);

        Eigen::MatrixXd draw = Eigen::MatrixXd::Zero(n, 2 * kActionDim);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int d = 0; d < kActionDim; ++d) {
                const double td = t(i, d);
                const double one_m_t2 = 1.0 - td * td;
                const double g = scales[d] * one_m_t2 + kSquashGuard;
                const double dlogp_du = 2.0 * scales[d] * td * one_m_t2 / g;
                const double dq_dt = din1(i, kStateDim + d) + din2(i, kStateDim + d);
                const double dl_du = inv_n * alpha_v * dlogp_du + dq_dt * one_m_t2;

                // mean head
                draw(i, d) = dl_du;
                // log-std head: direct -1 term plus the path through u.
                const double dl_dlogstd =
                    inv_n * alpha_v * (-1.0) + dl_du * stds(i, d) * eps(i, d);
                const double raw_lsr = raw(i, kActionDim + d);
                const double th = std::tanh(raw_lsr);
                draw(i, kActionDim + d) =
                    dl_dlogstd * 0.5 * (kLogStdMax - kLogStdMin) * (1.0 - th * th);
            }
        }
        policy_.backward(policy_ws, draw, *grads);
    }
    return loss;
}

double SacAgent::alpha_loss(const Batch& batch, const Eigen::MatrixXd& eps,
                            double* grad_log_alpha) const {
    const PolicySample ps = sample_policy(batch.states, eps);
    const double mean_term = (ps.log_probs.array() + params_.target_entropy).mean();
    if (grad_log_alpha) *grad_log_alpha = -mean_term;
    return -log_alpha_ * mean_term;
}

SacAgent::Losses SacAgent::train_step(const Batch& batch, Rng& rng) {
    const Eigen::Index n = batch.size();
    Eigen::MatrixXd eps_next(n, kActionDim), eps_cur(n, kActionDim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kActionDim; ++d) eps_next(i, d) = rng.normal();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kActionDim; ++d) eps_cur(i, d) = rng.normal();
    }

    Losses losses;
    MlpGrads g1;
    losses.q1 = q_loss(1, batch, eps_next, &g1);
    MlpGrads g2;
    losses.q2 = q_loss(2, batch, eps_next, &g2);
    q1_opt_.step(q1_, g1);
    q2_opt_.step(q2_, g2);

    MlpGrads gp;
    losses.policy = policy_loss(batch, eps_cur, &gp);
    policy_opt_.step(policy_, gp);

    if (params_.auto_alpha) {
        double grad = 0.0;
        losses.alpha = alpha_loss(batch, eps_cur, &grad);
        log_alpha_ = alpha_opt_.step(log_alpha_, grad);
    }

    q1_target_.soft_update_from(q1_, params_.tau);
    q2_target_.soft_update_from(q2_, params_.tau);
    return losses;
}

}  // namespace covy
