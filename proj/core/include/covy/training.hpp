#pragma once

#include <string>
#include <variant>

#include "covy/checkpoint.hpp"
#include "covy/ddpg.hpp"
#include "covy/drl_env.hpp"
#include "covy/replay.hpp"
#include "covy/sac.hpp"

namespace covy {

/// Either agent behind one action/train surface.
class AnyAgent {
public:
    explicit AnyAgent(DdpgAgent agent) : impl_(std::move(agent)) {}
    explicit AnyAgent(SacAgent agent) : impl_(std::move(agent)) {}

    AgentKind kind() const {
        return std::holds_alternative<DdpgAgent>(impl_) ? AgentKind::Ddpg : AgentKind::Sac;
    }

    /// explore=true samples (SAC) or adds exploration noise (DDPG);
    /// explore=false is the frozen deterministic policy.
    Eigen::Vector2d act(const Eigen::VectorXd& state, bool explore, Rng& rng);

    struct StepLosses {
        double critic_or_q1{0.0};
        double q2{0.0};
        double actor_or_policy{0.0};
        double alpha{0.0};

        bool finite() const;
    };
    StepLosses train(const Batch& batch, Rng& rng);

    void save(const std::string& path) const;

    DdpgAgent* ddpg() { return std::get_if<DdpgAgent>(&impl_); }
    SacAgent* sac() { return std::get_if<SacAgent>(&impl_); }

private:
    std::variant<DdpgAgent, SacAgent> impl_;
};

struct TrainingConfig {
    int episodes{500};
    std::size_t buffer_capacity{100000};
    std::size_t batch_size{128};
    std::size_t warmup_steps{1000};
    int updates_per_step{1};
    bool randomize_start_goal{true};
    bool random_warmup_actions{true};
};

struct EpisodeRecord {
    int episode{0};
    double episode_return{0.0};
    Terminal outcome{Terminal::Timeout};
    int steps{0};
};

struct TrainingLog {
    std::vector<EpisodeRecord> episodes;
    bool aborted{false};
    std::string abort_reason;

    double mean_return(int first_episode, int count) const;
};

/// Seeded episode loop: reset, act, step, store, learn each step once the
/// warmup budget is filled. A non-finite loss aborts the run with the
/// diagnostic recorded on the log.
TrainingLog run_training(NavEnv& env, AnyAgent& agent, const TrainingConfig& config,
                         std::uint64_t seed);

struct EvalSummary {
    int episodes{0};
    int successes{0};
    int collisions{0};
    int timeouts{0};

    double success_rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
};

/// Frozen-policy rollouts (no exploration, no learning).
EvalSummary evaluate_policy(NavEnv& env, AnyAgent& agent, int episodes, std::uint64_t seed,
                            bool randomize_start_goal = true);

}  // namespace covy
