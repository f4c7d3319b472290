#include "covy/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace covy {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'V', 'Y', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& in) {
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    if (n > 4096) throw std::runtime_error("checkpoint: corrupt string length");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

void write_net(std::ostream& out, const std::string& name, const Mlp& net) {
    write_string(out, name);
    write_u32(out, static_cast<std::uint32_t>(net.dims().size()));
    for (int d : net.dims()) write_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const Eigen::MatrixXd& w = net.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) write_f64(out, w(r, c));
        }
        const Eigen::VectorXd& b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) write_f64(out, b(i));
    }
}

struct NamedNet {
    std::string name;
    Mlp net;
};

NamedNet read_net(std::istream& in) {
    NamedNet out;
    out.name = read_string(in);
    const std::uint32_t ndims = read_u32(in);
    if (ndims < 2 || ndims > 64) throw std::runtime_error("checkpoint: corrupt layer count");
    std::vector<int> dims(ndims);
    for (std::uint32_t i = 0; i < ndims; ++i) {
        dims[i] = static_cast<int>(read_u32(in));
        if (dims[i] < 1 || dims[i] > 1 << 20)
            throw std::runtime_error("checkpoint: corrupt layer width");
    }
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (std::uint32_t l = 0; l + 1 < ndims; ++l) {
        Eigen::MatrixXd w(dims[l + 1], dims[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_f64(in);
        }
        Eigen::VectorXd b(dims[l + 1]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = read_f64(in);
        weights.push_back(std::move(w));
        biases.push_back(std::move(b));
    }
    out.net = Mlp::from_weights(dims, std::move(weights), std::move(biases));
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
    return in;
}

void write_header(std::ostream& out, const std::string& kind) {
    out.write(kMagic, 8);
    write_u32(out, kVersion);
    write_string(out, kind);
}

std::vector<int> hidden_of(const std::vector<int>& dims) {
    return {dims.begin() + 1, dims.end() - 1};
}

}  // namespace

const char* to_string(AgentKind kind) { return kind == AgentKind::Ddpg ? "ddpg" : "sac"; }

void save_checkpoint(const DdpgAgent& agent, const std::string& path) {
    std::ofstream out = open_out(path);
    write_header(out, "ddpg");
    write_u32(out, 4);
    write_net(out, "actor", agent.actor());
    write_net(out, "critic", agent.critic());
    write_net(out, "actor_target", agent.actor_target());
    write_net(out, "critic_target", agent.critic_target());
    write_f64(out, 0.0);  // reserved scalar slot
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

void save_checkpoint(const SacAgent& agent, const std::string& path) {
    std::ofstream out = open_out(path);
    write_header(out, "sac");
    write_u32(out, 5);
    write_net(out, "policy", agent.policy());
    write_net(out, "q1", agent.q1());
    write_net(out, "q2", agent.q2());
    write_net(out, "q1_target", agent.q1_target());
    write_net(out, "q2_target", agent.q2_target());
    write_f64(out, agent.log_alpha());
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

AgentKind peek_checkpoint_kind(const std::string& path) {
    std::ifstream in = open_in(path);
    const std::string kind = read_string(in);
    if (kind == "ddpg") return AgentKind::Ddpg;
    if (kind == "sac") return AgentKind::Sac;
    throw std::runtime_error("checkpoint: unknown agent kind \"" + kind + "\"");
}

DdpgAgent load_ddpg_checkpoint(const std::string& path, DdpgParams params, const ActionBox& box) {
    std::ifstream in = open_in(path);
    if (read_string(in) != "ddpg") throw std::runtime_error("checkpoint: not a ddpg checkpoint");
    const std::uint32_t count = read_u32(in);
    if (count != 4) throw std::runtime_error("checkpoint: ddpg expects 4 networks");

    NamedNet actor = read_net(in);
    NamedNet critic = read_net(in);
    NamedNet actor_t = read_net(in);
    NamedNet critic_t = read_net(in);
    if (actor.net.input_dim() != kStateDim || actor.net.output_dim() != kActionDim ||
        critic.net.input_dim() != kStateDim + kActionDim || critic.net.output_dim() != 1) {
        throw std::runtime_error("checkpoint: ddpg network shape mismatch");
    }
    params.hidden = hidden_of(actor.net.dims());
    Rng dummy(0);
    DdpgAgent agent(params, box, dummy);
    agent.set_networks(std::move(actor.net), std::move(critic.net), std::move(actor_t.net),
                       std::move(critic_t.net));
    return agent;
}

SacAgent load_sac_checkpoint(const std::string& path, SacParams params, const ActionBox& box) {
    std::ifstream in = open_in(path);
    if (read_string(in) != "sac") throw std::runtime_error("checkpoint: not a sac checkpoint");
    const std::uint32_t count = read_u32(in);
    if (count != 5) throw std::runtime_error("checkpoint: sac expects 5 networks");

    NamedNet policy = read_net(in);
    NamedNet q1 = read_net(in);
    NamedNet q2 = read_net(in);
    NamedNet q1_t = read_net(in);
    NamedNet q2_t = read_net(in);
    if (policy.net.input_dim() != kStateDim || policy.net.output_dim() != 2 * kActionDim ||
        q1.net.input_dim() != kStateDim + kActionDim || q1.net.output_dim() != 1) {
        throw std::runtime_error("checkpoint: sac network shape mismatch");
    }
    params.hidden = hidden_of(policy.net.dims());
    Rng dummy(0);
    SacAgent agent(params, box, dummy);
    agent.set_networks(std::move(policy.net), std::move(q1.net), std::move(q2.net),
                       std::move(q1_t.net), std::move(q2_t.net));
    const double log_alpha = read_f64(in);
    agent.set_log_alpha(log_alpha);
    return agent;
}

}  // namespace covy
