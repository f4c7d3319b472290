#include "covy/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace covy {

void MlpGrads::set_zero(const Mlp& net) {
    w.resize(net.weights_.size());
    b.resize(net.biases_.size());
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] = Eigen::MatrixXd::Zero(net.weights_[l].rows(), net.weights_[l].cols());
        b[l] = Eigen::VectorXd::Zero(net.biases_[l].size());
    }
}

void MlpGrads::accumulate(const MlpGrads& other, double scale) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] += scale * other.w[l];
        b[l] += scale * other.b[l];
    }
}

Mlp::Mlp(const std::vector<int>& dims, Rng& rng) : dims_(dims) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    const std::size_t layers = dims.size() - 1;
    weights_.resize(layers);
    biases_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        weights_[l].resize(dims[l + 1], dims[l]);
        biases_[l] = Eigen::VectorXd::Zero(dims[l + 1]);
        const bool output_layer = (l == layers - 1);
        const double scale =
            output_layer ? 3e-3 : std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
                weights_[l](r, c) =
                    output_layer ? rng.uniform(-scale, scale) : rng.normal(0.0, scale);
            }
        }
    }
}

Mlp Mlp::from_weights(const std::vector<int>& dims, std::vector<Eigen::MatrixXd> weights,
                      std::vector<Eigen::VectorXd> biases) {
    if (dims.size() < 2 || weights.size() != dims.size() - 1 || biases.size() != weights.size())
        throw std::invalid_argument("Mlp::from_weights: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != dims[l + 1] || weights[l].cols() != dims[l] ||
            biases[l].size() != dims[l + 1]) {
            throw std::invalid_argument("Mlp::from_weights: tensor shape mismatch");
        }
    }
    Mlp net;
    net.dims_ = dims;
    net.weights_ = std::move(weights);
    net.biases_ = std::move(biases);
    return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Workspace* ws) const {
    if (x.cols() != dims_.front()) throw std::invalid_argument("Mlp::forward: input dim mismatch");
    Eigen::MatrixXd a = x;
    if (ws) {
        ws->activations.assign(1, a);
        ws->pre.clear();
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = a * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        if (l + 1 < weights_.size()) {
            a = z.cwiseMax(0.0);  // ReLU on hidden layers
        } else {
            a = z;
        }
        if (ws) {
            ws->pre.push_back(std::move(z));
            ws->activations.push_back(a);
        }
    }
    return a;
}

Eigen::MatrixXd Mlp::backward(const Workspace& ws, const Eigen::MatrixXd& dy,
                              MlpGrads& grads) const {
    if (grads.w.size() != weights_.size()) grads.set_zero(*this);
    Eigen::MatrixXd da = dy;
    for (std::size_t li = weights_.size(); li-- > 0;) {
        Eigen::MatrixXd dz;
        if (li + 1 < weights_.size()) {
            dz = da.cwiseProduct(
                (ws.pre[li].array() > 0.0).cast<double>().matrix());
        } else {
            dz = da;
        }
        grads.w[li] += dz.transpose() * ws.activations[li];
        grads.b[li] += dz.colwise().sum().transpose();
        da = dz * weights_[li];
    }
    return da;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size()) + biases_[l].size();
    }
    return n;
}

namespace {

/// Locates flat index `i` inside the (weights, bias) sequence of layers.
template <typename W, typename B>
double* locate(std::vector<W>& weights, std::vector<B>& biases, std::size_t index) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t wn = static_cast<std::size_t>(weights[l].size());
        if (index < wn) {
            const Eigen::Index r = static_cast<Eigen::Index>(index) / weights[l].cols();
            const Eigen::Index c = static_cast<Eigen::Index>(index) % weights[l].cols();
            return &weights[l](r, c);
        }
        index -= wn;
        const std::size_t bn = static_cast<std::size_t>(biases[l].size());
        if (index < bn) return &biases[l](static_cast<Eigen::Index>(index));
        index -= bn;
    }
    throw std::out_of_range("Mlp: parameter index out of range");
}

}  // namespace

double Mlp::param(std::size_t index) const {
    auto* self = const_cast<Mlp*>(this);
    return *locate(self->weights_, self->biases_, index);
}

void Mlp::set_param(std::size_t index, double value) {
    *locate(weights_, biases_, index) = value;
}

double Mlp::grad_param(const MlpGrads& grads, std::size_t index) {
    auto* g = const_cast<MlpGrads*>(&grads);
    return *locate(g->w, g->b, index);
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l] = tau * source.weights_[l] + (1.0 - tau) * weights_[l];
        biases_[l] = tau * source.biases_[l] + (1.0 - tau) * biases_[l];
    }
}

AdamOptimizer::AdamOptimizer(const Mlp& net, double lr) : lr_(lr) {
    mw_.resize(net.weights_.size());
    vw_.resize(net.weights_.size());
    mb_.resize(net.biases_.size());
    vb_.resize(net.biases_.size());
    for (std::size_t l = 0; l < mw_.size(); ++l) {
        mw_[l] = Eigen::MatrixXd::Zero(net.weights_[l].rows(), net.weights_[l].cols());
        vw_[l] = mw_[l];
        mb_[l] = Eigen::VectorXd::Zero(net.biases_[l].size());
        vb_[l] = mb_[l];
    }
}

void AdamOptimizer::step(Mlp& net, const MlpGrads& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t l = 0; l < mw_.size(); ++l) {
        mw_[l] = beta1_ * mw_[l] + (1.0 - beta1_) * grads.w[l];
        vw_[l] = beta2_ * vw_[l] + (1.0 - beta2_) * grads.w[l].cwiseProduct(grads.w[l]);
        net.weights_[l] -=
            (lr_ * (mw_[l] / bc1).array() / ((vw_[l] / bc2).array().sqrt() + eps_)).matrix();

        mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * grads.b[l];
        vb_[l] = beta2_ * vb_[l] + (1.0 - beta2_) * grads.b[l].cwiseProduct(grads.b[l]);
        net.biases_[l] -=
            (lr_ * (mb_[l] / bc1).array() / ((vb_[l] / bc2).array().sqrt() + eps_)).matrix();
    }
}

}  // namespace covy
