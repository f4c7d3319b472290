#include "covy/training.hpp"

#include <cmath>

namespace covy {

Eigen::Vector2d AnyAgent::act(const Eigen::VectorXd& state, bool explore, Rng& rng) {
    if (auto* d = std::get_if<DdpgAgent>(&impl_)) {
        return d->act(state, explore, rng);
    }
    auto& s = std::get<SacAgent>(impl_);
    return s.act(state, !explore, rng).action_env;
}

bool AnyAgent::StepLosses::finite() const {
    return std::isfinite(critic_or_q1) && std::isfinite(q2) && std::isfinite(actor_or_policy) &&
           std::isfinite(alpha);
}

AnyAgent::StepLosses AnyAgent::train(const Batch& batch, Rng& rng) {
    StepLosses out;
    if (auto* d = std::get_if<DdpgAgent>(&impl_)) {
        const DdpgAgent::Losses l = d->train_step(batch);
        out.critic_or_q1 = l.critic;
        out.actor_or_policy = l.actor;
    } else {
        auto& s = std::get<SacAgent>(impl_);
        const SacAgent::Losses l = s.train_step(batch, rng);
        out.critic_or_q1 = l.q1;
        out.q2 = l.q2;
        out.actor_or_policy = l.policy;
        out.alpha = l.alpha;
    }
    return out;
}

void AnyAgent::save(const std::string& path) const {
    if (const auto* d = std::get_if<DdpgAgent>(&impl_)) {
        save_checkpoint(*d, path);
    } else {
        save_checkpoint(std::get<SacAgent>(impl_), path);
    }
}

double TrainingLog::mean_return(int first_episode, int count) const {
    double sum = 0.0;
    int n = 0;
    for (const EpisodeRecord& r : episodes) {
        if (r.episode >= first_episode && r.episode < first_episode + count) {
            sum += r.episode_return;
            ++n;
        }
    }
    return n ? sum / n : 0.0;
}

TrainingLog run_training(NavEnv& env, AnyAgent& agent, const TrainingConfig& config,
                         std::uint64_t seed) {
    TrainingLog log;
    ReplayBuffer buffer(config.buffer_capacity);
    Rng rng(derive_seed(seed, 0x7261696e));  // one stream drives the whole run
    const ActionBox box{env.robot().v_max, env.robot().w_max};

    std::size_t total_steps = 0;
    for (int episode = 0; episode < config.episodes; ++episode) {
        Eigen::VectorXd state = env.reset(rng, config.randomize_start_goal);
        EpisodeRecord record;
        record.episode = episode;

        Terminal terminal = Terminal::None;
        while (terminal == Terminal::None) {
            Eigen::Vector2d action;
            if (config.random_warmup_actions && total_steps < config.warmup_steps) {
                action = box.denormalize({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            } else {
                action = agent.act(state, true, rng);
            }
            const NavEnv::StepResult step = env.step(action, rng);

            Transition t;
            t.state = state;
            t.action = box.normalize(action(0), action(1));
            t.reward = step.reward;
            t.next_state = step.state;
            // Timeouts are a budget artifact, not environment dynamics, so
            // their value still bootstraps.
            t.done = (step.terminal == Terminal::Goal || step.terminal == Terminal::Collision)
                         ? 1.0
                         : 0.0;
            buffer.add(std::move(t));

            state = step.state;
            record.episode_return += step.reward;
            record.steps += 1;
            terminal = step.terminal;
            ++total_steps;

            if (total_steps >= config.warmup_steps && buffer.size() >= config.batch_size) {
                for (int u = 0; u < config.updates_per_step; ++u) {
                    const Batch batch = buffer.sample(config.batch_size, rng);
                    const AnyAgent::StepLosses losses = agent.train(batch, rng);
                    if (!losses.finite()) {
                        log.aborted = true;
                        log.abort_reason = "non-finite loss at episode " +
                                           std::to_string(episode) + ", step " +
                                           std::to_string(record.steps);
                        record.outcome = Terminal::Timeout;
                        log.episodes.push_back(record);
                        return log;
                    }
                }
            }
        }
        record.outcome = terminal;
        log.episodes.push_back(record);
    }
    return log;
}

EvalSummary evaluate_policy(NavEnv& env, AnyAgent& agent, int episodes, std::uint64_t seed,
                            bool randomize_start_goal) {
    EvalSummary summary;
    summary.episodes = episodes;
    for (int e = 0; e < episodes; ++e) {
        Rng rng(derive_seed(seed, 0x6576 + e));
        Eigen::VectorXd state = env.reset(rng, randomize_start_goal);
        Terminal terminal = Terminal::None;
        while (terminal == Terminal::None) {
            const Eigen::Vector2d action = agent.act(state, false, rng);
            const NavEnv::StepResult step = env.step(action, rng);
            state = step.state;
            terminal = step.terminal;
        }
        if (terminal == Terminal::Goal) ++summary.successes;
        if (terminal == Terminal::Collision) ++summary.collisions;
        if (terminal == Terminal::Timeout) ++summary.timeouts;
    }
    return summary;
}

}  // namespace covy
