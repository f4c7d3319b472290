#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "covy/rng.hpp"

namespace covy {

class Mlp;

/// Parameter gradients with the same shapes as an Mlp's weights.
struct MlpGrads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    void set_zero(const Mlp& net);
    void accumulate(const MlpGrads& other, double scale = 1.0);
};

/// Fully connected network with ReLU hidden layers and a linear output.
/// Batches are row-major (one row per sample). Backpropagation is explicit:
/// forward fills a workspace, backward consumes it and also returns the
/// gradient with respect to the input batch.
class Mlp {
public:
    Mlp() = default;
    /// dims = {input, hidden..., output}; weights are He-initialized, the
    /// output layer near zero.
    Mlp(const std::vector<int>& dims, Rng& rng);

    /// Rebuilds a network from stored tensors (checkpoint loading).
    static Mlp from_weights(const std::vector<int>& dims, std::vector<Eigen::MatrixXd> weights,
                            std::vector<Eigen::VectorXd> biases);

    struct Workspace {
        std::vector<Eigen::MatrixXd> activations;  // [0] = input, per layer output
        std::vector<Eigen::MatrixXd> pre;          // pre-activation per layer
    };

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Workspace* ws = nullptr) const;

    /// dY is dLoss/dOutput for the batch used in the matching forward call.
    /// Adds parameter gradients into `grads` and returns dLoss/dInput.
    Eigen::MatrixXd backward(const Workspace& ws, const Eigen::MatrixXd& dy,
                             MlpGrads& grads) const;

    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t layer_count() const { return weights_.size(); }
    const Eigen::MatrixXd& weight(std::size_t l) const { return weights_[l]; }
    const Eigen::VectorXd& bias(std::size_t l) const { return biases_[l]; }

    /// Flat parameter indexing (layer by layer, weights row-major then bias);
    /// used by checkpoints and the finite-difference harness.
    std::size_t param_count() const;
    double param(std::size_t index) const;
    void set_param(std::size_t index, double value);
    static double grad_param(const MlpGrads& grads, std::size_t index);

    /// target <- tau * source + (1 - tau) * target
    void soft_update_from(const Mlp& source, double tau);

    friend class AdamOptimizer;
    friend struct MlpGrads;

private:
    std::vector<int> dims_;
    std::vector<Eigen::MatrixXd> weights_;  // layer l: (dims[l+1] x dims[l])
    std::vector<Eigen::VectorXd> biases_;
};

/// Adam with bias correction, one instance per network.
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    explicit AdamOptimizer(const Mlp& net, double lr);

    void step(Mlp& net, const MlpGrads& grads);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_{1e-3};
    double beta1_{0.9};
    double beta2_{0.999};
    double eps_{1e-8};
    std::int64_t t_{0};
    std::vector<Eigen::MatrixXd> mw_, vw_;
    std::vector<Eigen::VectorXd> mb_, vb_;
};

/// Adam on a single scalar (used for the SAC entropy temperature).
class ScalarAdam {
public:
    explicit ScalarAdam(double lr = 3e-4) : lr_(lr) {}

    double step(double value, double grad) {
        ++t_;
        m_ = 0.9 * m_ + 0.1 * grad;
        v_ = 0.999 * v_ + 0.001 * grad * grad;
        const double mh = m_ / (1.0 - std::pow(0.9, static_cast<double>(t_)));
        const double vh = v_ / (1.0 - std::pow(0.999, static_cast<double>(t_)));
        return value - lr_ * mh / (std::sqrt(vh) + 1e-8);
    }

private:
    double lr_;
    double m_{0.0};
    double v_{0.0};
    std::int64_t t_{0};
};

}  // namespace covy
