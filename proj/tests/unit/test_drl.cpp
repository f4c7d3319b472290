#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "covy/checkpoint.hpp"
#include "covy/ddpg.hpp"
#include "covy/drl_env.hpp"
#include "covy/mlp.hpp"
#include "covy/replay.hpp"
#include "covy/sac.hpp"
#include "covy/scenario.hpp"
#include "covy/training.hpp"
#include "test_helpers.hpp"

using namespace covy;

namespace {

LidarScan make_scan(const std::vector<double>& ranges, double max_range = 6.0) {
    LidarScan scan;
    scan.ranges = ranges;
    scan.beam_count = static_cast<int>(ranges.size());
    scan.max_range = max_range;
    scan.angle_min = -kPi / 2;
    scan.angle_max = kPi / 2;
    return scan;
}

Batch random_batch(Eigen::Index n, Rng& rng) {
    Batch b;
    b.states.resize(n, kStateDim);
    b.actions.resize(n, 2);
    b.rewards.resize(n);
    b.next_states.resize(n, kStateDim);
    b.dones.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kStateDim; ++d) {
            b.states(i, d) = rng.uniform(-1.0, 1.0);
            b.next_states(i, d) = rng.uniform(-1.0, 1.0);
        }
        b.actions(i, 0) = rng.uniform(-1.0, 1.0);
        b.actions(i, 1) = rng.uniform(-1.0, 1.0);
        b.rewards(i) = rng.uniform(-10.0, 10.0);
        b.dones(i) = rng.uniform() < 0.3 ? 1.0 : 0.0;
    }
    return b;
}

/// Central finite differences of an arbitrary scalar loss against the
/// analytic gradient, on a deterministic sample of parameters.
template <typename LossFn>
void check_gradients(Mlp& net, LossFn&& loss_with_grads, int param_samples, Rng& rng,
                     double tolerance = 1e-4) {
    MlpGrads grads;
    loss_with_grads(&grads);
    const std::size_t count = net.param_count();
    for (int s = 0; s < param_samples; ++s) {
        const std::size_t idx = rng.uniform_index(count);
        const double original = net.param(idx);
        const double h = 1e-5;
        net.set_param(idx, original + h);
        const double up = loss_with_grads(nullptr);
        net.set_param(idx, original - h);
        const double down = loss_with_grads(nullptr);
        net.set_param(idx, original);

        const double numeric = (up - down) / (2.0 * h);
        const double analytic = Mlp::grad_param(grads, idx);
        const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-6});
        CHECK(std::fabs(numeric - analytic) / scale < tolerance);
    }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("build_state layout and conventions") {
    const WorldMap map = testing::empty_room();
    RobotState robot;
    robot.pose = {0.5, 0.5, 0.0};
    robot.v = 0.12;
    robot.w = -0.4;

    SUBCASE("distance and heading straight ahead") {
        robot.pose = {1.0, 1.0, 0.0};
        const auto s = build_state(make_scan(std::vector<double>(10, 3.0)), robot, {2.0, 1.0}, map);
        REQUIRE(s.size() == kStateDim);
        CHECK(s(12) == doctest::Approx(1.0));
        CHECK(s(13) == doctest::Approx(0.0));
        CHECK(s(10) == doctest::Approx(0.12));
        CHECK(s(11) == doctest::Approx(-0.4));
    }
    SUBCASE("heading sign for a robot facing +y") {
        robot.pose = {1.0, 1.0, kPi / 2};
        const auto s = build_state(make_scan(std::vector<double>(10, 3.0)), robot, {2.0, 1.0}, map);
        CHECK(s(13) == doctest::Approx(-kPi / 2));
    }
    SUBCASE("max-range beams normalize to 1") {
        const auto s = build_state(make_scan(std::vector<double>(10, 6.0)), robot, {2.0, 2.0}, map);
        for (int i = 0; i < 10; ++i) CHECK(s(i) == doctest::Approx(1.0));
    }
    SUBCASE("downsampling picks 10 evenly indexed front beams") {
        LidarScan full;
        full.beam_count = 361;
        full.angle_min = -kPi;
        full.angle_max = kPi;
        full.max_range = 6.0;
        full.ranges.assign(361, 6.0);
        // Mark the exact -90..90 degree beams with recognizable values.
        for (int i = 0; i < 361; ++i) {
            const double deg = rad_to_deg(full.beam_angle(i));
            if (deg >= -90.0 - 1e-9 && deg <= 90.0 + 1e-9) {
                full.ranges[i] = 3.0;
            }
        }
        const auto s = build_state(full, robot, {2.0, 2.0}, map);
        for (int i = 0; i < 10; ++i) CHECK(s(i) == doctest::Approx(0.5));
    }
    SUBCASE("target outside the map is rejected") {
        CHECK_THROWS_AS(build_state(make_scan(std::vector<double>(10, 3.0)), robot, {9.0, 9.0}, map),
                        std::invalid_argument);
    }
    SUBCASE("too few front beams rejected") {
        CHECK_THROWS_AS(build_state(make_scan(std::vector<double>(9, 3.0)), robot, {2.0, 2.0}, map),
                        std::invalid_argument);
    }
}

TEST_CASE("compute_reward cases, priority and timeout") {
    RewardParams p;  // defaults: +100/-100/500/-1, C_d 0.3, min_c 0.2, T_max 500
    const LidarScan clear = make_scan(std::vector<double>(10, 3.0));
    const LidarScan near_wall = make_scan({3.0, 0.15, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0});

    SUBCASE("case 1: goal") {
        const auto r = compute_reward(0.5, 0.1, clear, 10, p);
        CHECK(r.reward == doctest::Approx(100.0));
        CHECK(r.terminal == Terminal::Goal);
    }
    SUBCASE("case 2: collision") {
        const auto r = compute_reward(2.0, 1.9, near_wall, 10, p);
        CHECK(r.reward == doctest::Approx(-100.0));
        CHECK(r.terminal == Terminal::Collision);
    }
    SUBCASE("case 3: progress is proportional") {
        const auto r = compute_reward(2.0, 1.8, clear, 10, p);
        CHECK(r.reward == doctest::Approx(500.0 * 0.2));
        CHECK(r.terminal == Terminal::None);
    }
    SUBCASE("case 4: zero progress is the stall branch") {
        const auto r = compute_reward(2.0, 2.0, clear, 10, p);
        CHECK(r.reward == doctest::Approx(-1.0));
        CHECK(r.terminal == Terminal::None);
    }
    SUBCASE("priority: goal beats collision") {
        const auto r = compute_reward(0.5, 0.1, near_wall, 10, p);
        CHECK(r.terminal == Terminal::Goal);
        CHECK(r.reward == doctest::Approx(100.0));
    }
    SUBCASE("priority: collision beats progress") {
        const auto r = compute_reward(2.0, 1.0, near_wall, 10, p);
        CHECK(r.terminal == Terminal::Collision);
        CHECK(r.reward == doctest::Approx(-100.0));
    }
    SUBCASE("timeout forces the terminal but keeps the case-3/4 reward") {
        const auto r = compute_reward(2.0, 1.9, clear, 500, p);
        CHECK(r.reward == doctest::Approx(500.0 * 0.1));
        CHECK(r.terminal == Terminal::Timeout);
        const auto stall = compute_reward(2.0, 2.3, clear, 500, p);
        CHECK(stall.reward == doctest::Approx(-1.0));
        CHECK(stall.terminal == Terminal::Timeout);
    }
    SUBCASE("goal at the budget boundary still reports goal") {
        const auto r = compute_reward(0.5, 0.1, clear, 500, p);
        CHECK(r.terminal == Terminal::Goal);
    }
    SUBCASE("exactly one case fires per call") {
        Rng rng(17);
        for (int i = 0; i < 2000; ++i) {
            const double prev = rng.uniform(0.0, 4.0);
            const double cur = rng.uniform(0.0, 4.0);
            LidarScan scan = make_scan(std::vector<double>(10, rng.uniform(0.05, 6.0)));
            const auto r = compute_reward(prev, cur, scan, 10, p);
            int fired = 0;
            if (cur < p.goal_radius) {
                ++fired;
                CHECK(r.reward == doctest::Approx(p.r_arrive));
            } else if (scan.min_range() < p.min_clearance) {
                ++fired;
                CHECK(r.reward == doctest::Approx(p.r_collide));
            } else if (prev - cur > 0.0) {
                ++fired;
                CHECK(r.reward == doctest::Approx(p.r_progress * (prev - cur)));
            } else {
                ++fired;
                CHECK(r.reward == doctest::Approx(p.r_stall));
            }
            CHECK(fired == 1);
        }
    }
}

TEST_CASE("ddpg action heads: sigmoid linear, tanh angular") {
    const ActionBox box{0.2, 2.0};
    DdpgParams params;
    params.hidden = {16, 16};
    Rng rng(3);
    DdpgAgent agent(params, box, rng);

    // Zero the final layer: pre-activations are exactly 0 on both heads.
    Mlp& actor = agent.actor();
    const std::size_t n = actor.param_count();
    const std::size_t last_layer = actor.weight(actor.layer_count() - 1).size() +
                                   actor.bias(actor.layer_count() - 1).size();
    for (std::size_t i = n - last_layer; i < n; ++i) actor.set_param(i, 0.0);

    Eigen::VectorXd state = Eigen::VectorXd::Zero(kStateDim);
    const Eigen::Vector2d a = agent.act(state, false, rng);
    CHECK(a(0) == doctest::Approx(0.1));  // 0.2 * sigmoid(0)
    CHECK(a(1) == doctest::Approx(0.0));  // 2 * tanh(0)

    // Saturate the heads: actions pin to the box edge.
    Mlp::Workspace ws;
    Eigen::MatrixXd raw(1, 2);
    raw << 1e6, 1e6;
    Eigen::Vector2d saturated = box.denormalize(
        {2.0 / (1.0 + std::exp(-raw(0, 0))) - 1.0, std::tanh(raw(0, 1))});
    CHECK(saturated(0) == doctest::Approx(0.2));
    CHECK(saturated(1) == doctest::Approx(2.0));
}

TEST_CASE("exploration noise clamps back into the box") {
    const ActionBox box{0.2, 2.0};
    DdpgParams params;
    params.hidden = {16, 16};
    params.explore_sigma = 5.0;  // huge noise to force clamping
    params.explore_sigma_final = 5.0;
    Rng rng(4);
    DdpgAgent agent(params, box, rng);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(kStateDim);
    for (int i = 0; i < 500; ++i) {
        const Eigen::Vector2d a = agent.act(state, true, rng);
        CHECK(a(0) >= 0.0);
        CHECK(a(0) <= 0.2);
        CHECK(std::fabs(a(1)) <= 2.0);
    }
}

TEST_CASE("sac action is strictly inside the closed box and mid-box when centered") {
    const ActionBox box{0.2, 2.0};
    SacParams params;
    params.hidden = {16, 16};
    Rng rng(5);
    SacAgent agent(params, box, rng);

    Mlp& policy = agent.policy();
    const std::size_t n = policy.param_count();
    const std::size_t last_layer = policy.weight(policy.layer_count() - 1).size() +
                                   policy.bias(policy.layer_count() - 1).size();
    for (std::size_t i = n - last_layer; i < n; ++i) policy.set_param(i, 0.0);

    Eigen::VectorXd state = Eigen::VectorXd::Zero(kStateDim);
    const auto det = agent.act(state, true, rng);
    CHECK(det.action_env(0) == doctest::Approx(0.1));
    CHECK(det.action_env(1) == doctest::Approx(0.0));

    for (int i = 0; i < 500; ++i) {
        const auto sample = agent.act(state, false, rng);
        CHECK(sample.action_env(0) >= 0.0);
        CHECK(sample.action_env(0) <= 0.2);
        CHECK(std::fabs(sample.action_env(1)) <= 2.0);
    }
}

TEST_CASE("sac log_prob matches a CDF-difference quadrature oracle") {
    const ActionBox box{0.2, 2.0};
    SacParams params;
    params.hidden = {24, 24};
    Rng rng(6);
    SacAgent agent(params, box, rng);

    Eigen::MatrixXd states(1, kStateDim);
    for (int d = 0; d < kStateDim; ++d) states(0, d) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd eps(1, 2);
    eps << 0.37, -0.81;

    const SacAgent::PolicySample sample = agent.sample_policy(states, eps);

    // Recover the Gaussian head parameters the same way the agent does.
    const Eigen::MatrixXd raw = agent.policy().forward(states);
    const double scales[2] = {0.1, 2.0};
    const double centers[2] = {0.1, 0.0};
    double log_numeric = 0.0;
    for (int d = 0; d < 2; ++d) {
        const double mean = raw(0, d);
        const double log_std =
            -5.0 + 0.5 * (2.0 - (-5.0)) * (std::tanh(raw(0, d + 2)) + 1.0);
        const double std = std::exp(log_std);
        const double u = mean + std * eps(0, d);
        const double a_env = centers[d] + scales[d] * std::tanh(u);

        // Midpoint quadrature of the density over [a-h, a+h] via the CDF.
        const double h = 1e-5 * scales[d];
        const double z_hi = (std::atanh((a_env + h - centers[d]) / scales[d]) - mean) / std;
        const double z_lo = (std::atanh((a_env - h - centers[d]) / scales[d]) - mean) / std;
        const double mass = normal_cdf(z_hi) - normal_cdf(z_lo);
        log_numeric += std::log(mass / (2.0 * h));
    }
    CHECK(sample.log_probs(0) == doctest::Approx(log_numeric).epsilon(1e-3));
}

TEST_CASE("ddpg training-step contracts") {
    const ActionBox box{0.2, 2.0};
    DdpgParams params;
    params.hidden = {24, 24};
    Rng rng(7);
    DdpgAgent agent(params, box, rng);
    Rng batch_rng(8);
    Batch batch = random_batch(16, batch_rng);

    SUBCASE("done=1 makes the critic target equal r") {
        batch.dones.setOnes();
        // Train the critic to convergence on this one batch: the fixed
        // point is Q(s, a) = r, independent of the target networks.
        for (int i = 0; i < 4000; ++i) agent.train_step(batch);
        Eigen::MatrixXd in(batch.size(), kStateDim + kActionDim);
        in << batch.states, batch.actions;
        const Eigen::VectorXd q = agent.critic().forward(in).col(0);
        for (Eigen::Index i = 0; i < batch.size(); ++i) {
            CHECK(q(i) == doctest::Approx(batch.rewards(i)).epsilon(0.05));
        }
    }
    SUBCASE("tau = 1 copies sources onto targets") {
        DdpgParams hard = params;
        hard.tau = 1.0;
        DdpgAgent fresh(hard, box, rng);
        fresh.train_step(batch);
        for (std::size_t i = 0; i < fresh.actor().param_count(); i += 7) {
            CHECK(fresh.actor_target().param(i) == doctest::Approx(fresh.actor().param(i)));
        }
        for (std::size_t i = 0; i < fresh.critic().param_count(); i += 7) {
            CHECK(fresh.critic_target().param(i) == doctest::Approx(fresh.critic().param(i)));
        }
    }
}

TEST_CASE("ddpg gradients match finite differences") {
    const ActionBox box{0.2, 2.0};
    DdpgParams params;
    params.hidden = {24, 24};
    Rng rng(9);
    DdpgAgent agent(params, box, rng);
    Rng batch_rng(10);
    const Batch batch = random_batch(12, batch_rng);

    Rng pick(11);
    check_gradients(
        agent.critic(),
        [&](MlpGrads* g) { return agent.critic_loss(batch, g); }, 40, pick);
    check_gradients(
        agent.actor(), [&](MlpGrads* g) { return agent.actor_loss(batch, g); }, 40, pick);
}

TEST_CASE("sac gradients match finite differences") {
    const ActionBox box{0.2, 2.0};
    SacParams params;
    params.hidden = {24, 24};
    Rng rng(12);
    SacAgent agent(params, box, rng);
    Rng batch_rng(13);
    const Batch batch = random_batch(12, batch_rng);

    Eigen::MatrixXd eps_next(batch.size(), 2), eps_cur(batch.size(), 2);
    Rng noise(14);
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
        eps_next(i, 0) = noise.normal();
        eps_next(i, 1) = noise.normal();
        eps_cur(i, 0) = noise.normal();
        eps_cur(i, 1) = noise.normal();
    }

    Rng pick(15);
    check_gradients(
        agent.q1(), [&](MlpGrads* g) { return agent.q_loss(1, batch, eps_next, g); }, 40, pick);
    check_gradients(
        agent.q2(), [&](MlpGrads* g) { return agent.q_loss(2, batch, eps_next, g); }, 40, pick);
    check_gradients(
        agent.policy(), [&](MlpGrads* g) { return agent.policy_loss(batch, eps_cur, g); }, 40,
        pick);

    // Temperature gradient on the scalar log-alpha.
    double analytic = 0.0;
    agent.alpha_loss(batch, eps_cur, &analytic);
    const double original = agent.log_alpha();
    const double h = 1e-5;
    agent.set_log_alpha(original + h);
    const double up = agent.alpha_loss(batch, eps_cur, nullptr);
    agent.set_log_alpha(original - h);
    const double down = agent.alpha_loss(batch, eps_cur, nullptr);
    agent.set_log_alpha(original);
    CHECK(analytic == doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-6));
}

TEST_CASE("sac with alpha = 0 reduces to the min-twin-Q backup on a hand batch") {
    const ActionBox box{0.2, 2.0};
    SacParams params;
    params.hidden = {16, 16};
    params.init_alpha = 1e-300;  // alpha == 0 for doubles after exp/log round trip
    params.auto_alpha = false;
    Rng rng(16);
    SacAgent agent(params, box, rng);

    Rng batch_rng(17);
    Batch batch = random_batch(2, batch_rng);
    batch.dones << 0.0, 1.0;
    batch.rewards << 1.5, -2.0;

    Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(2, 2);
    const SacAgent::PolicySample next = agent.sample_policy(batch.next_states, eps);
    Eigen::MatrixXd next_in(2, kStateDim + kActionDim);
    next_in << batch.next_states, next.actions_norm;
    const Eigen::VectorXd q1n = agent.q1_target().forward(next_in).col(0);
    const Eigen::VectorXd q2n = agent.q2_target().forward(next_in).col(0);

    // Hand-computed targets: y_i = r_i + gamma (1 - done_i) min(q1n, q2n).
    const double y0 = 1.5 + params.gamma * std::min(q1n(0), q2n(0));
    const double y1 = -2.0;  // done row reduces to the raw reward

    Eigen::MatrixXd in(2, kStateDim + kActionDim);
    in << batch.states, batch.actions;
    const Eigen::VectorXd q = agent.q1().forward(in).col(0);
    const double expected_loss =
        ((q(0) - y0) * (q(0) - y0) + (q(1) - y1) * (q(1) - y1)) / 2.0;
    CHECK(agent.q_loss(1, batch, eps, nullptr) == doctest::Approx(expected_loss).epsilon(1e-12));
}

TEST_CASE("replay buffer uniformity and ring behavior") {
    ReplayBuffer buffer(100);
    Rng rng(18);
    for (int i = 0; i < 100; ++i) {
        Transition t;
        t.state = Eigen::VectorXd::Constant(kStateDim, static_cast<double>(i));
        t.action = {0.0, 0.0};
        t.reward = i;
        t.next_state = t.state;
        t.done = 0.0;
        buffer.add(std::move(t));
    }
    CHECK(buffer.size() == 100);
    CHECK_THROWS_AS(buffer.sample(101, rng), std::invalid_argument);

    SUBCASE("per-element frequency within 4 sigma of uniform") {
        // 10^4 batches of 10 = 10^5 draws; each batch hits an element with
        // p = 0.1, so counts are Binomial(1e4, 0.1): sigma = 30.
        std::vector<int> counts(100, 0);
        for (int s = 0; s < 10000; ++s) {
            const Batch b = buffer.sample(10, rng);
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                counts[static_cast<int>(b.rewards(i))] += 1;
            }
        }
        const double expected = 1000.0;
        const double sigma = std::sqrt(10000 * 0.1 * 0.9);
        for (int c : counts) {
            CHECK(std::fabs(c - expected) <= 4.0 * sigma);
        }
    }
    SUBCASE("no duplicates inside a batch") {
        for (int s = 0; s < 200; ++s) {
            const Batch b = buffer.sample(60, rng);  // forces the Fisher-Yates path
            std::set<double> seen;
            for (Eigen::Index i = 0; i < b.size(); ++i) seen.insert(b.rewards(i));
            CHECK(seen.size() == 60);
        }
    }
    SUBCASE("ring overwrites the oldest entries") {
        Transition t;
        t.state = Eigen::VectorXd::Constant(kStateDim, 999.0);
        t.action = {0, 0};
        t.reward = 999;
        t.next_state = t.state;
        buffer.add(std::move(t));
        CHECK(buffer.size() == 100);
    }
}

TEST_CASE("action box invariance over random parameterizations") {
    const ActionBox box{0.2, 2.0};
    Rng rng(19);
    for (int net = 0; net < 20; ++net) {
        DdpgParams dp;
        dp.hidden = {16, 16};
        DdpgAgent ddpg(dp, box, rng);
        SacParams sp;
        sp.hidden = {16, 16};
        SacAgent sac(sp, box, rng);
        for (int i = 0; i < 250; ++i) {
            Eigen::VectorXd state(kStateDim);
            for (int d = 0; d < kStateDim; ++d) state(d) = rng.uniform(-10.0, 10.0);
            const Eigen::Vector2d a = ddpg.act(state, i % 2 == 0, rng);
            CHECK(a(0) >= 0.0);
            CHECK(a(0) <= 0.2);
            CHECK(std::fabs(a(1)) <= 2.0);
            const auto s = sac.act(state, i % 2 == 0, rng);
            CHECK(s.action_env(0) >= 0.0);
            CHECK(s.action_env(0) <= 0.2);
            CHECK(std::fabs(s.action_env(1)) <= 2.0);
        }
    }
}

TEST_CASE("soft update shadows the exponentially weighted source history") {
    // Scalar network: one 1x1 weight, bias zeroed. After t updates,
    // target_t = (1-tau)^t target_0 + tau * sum_k (1-tau)^(t-1-k) source_k.
    Rng rng(20);
    Mlp source({1, 1}, rng);
    Mlp target = source;
    source.set_param(1, 0.0);
    target.set_param(1, 0.0);

    const double tau = 0.1;
    double analytic = target.param(0);
    for (int t = 0; t < 50; ++t) {
        const double w = std::sin(0.3 * t);  // arbitrary source trajectory
        source.set_param(0, w);
        target.soft_update_from(source, tau);
        analytic = tau * w + (1.0 - tau) * analytic;
        CHECK(target.param(0) == doctest::Approx(analytic).epsilon(1e-12));
    }
}

TEST_CASE("checkpoint round trip preserves behavior; corrupt files rejected") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "covy_ckpt_test";
    fs::create_directories(dir);
    const ActionBox box{0.2, 2.0};
    Rng rng(21);

    SacParams sp;
    sp.hidden = {24, 24};
    SacAgent sac(sp, box, rng);
    const std::string sac_path = (dir / "agent.ckpt").string();
    save_checkpoint(sac, sac_path);
    CHECK(peek_checkpoint_kind(sac_path) == AgentKind::Sac);

    SacAgent loaded = load_sac_checkpoint(sac_path, sp, box);
    Eigen::VectorXd state(kStateDim);
    for (int d = 0; d < kStateDim; ++d) state(d) = 0.1 * d;
    Rng a(1), b(1);
    const auto act_orig = sac.act(state, true, a);
    const auto act_loaded = loaded.act(state, true, b);
    CHECK(act_orig.action_env(0) == doctest::Approx(act_loaded.action_env(0)));
    CHECK(act_orig.action_env(1) == doctest::Approx(act_loaded.action_env(1)));
    CHECK(act_orig.log_prob == doctest::Approx(act_loaded.log_prob));

    DdpgParams dp;
    dp.hidden = {16, 16};
    DdpgAgent ddpg(dp, box, rng);
    const std::string ddpg_path = (dir / "ddpg.ckpt").string();
    save_checkpoint(ddpg, ddpg_path);
    CHECK(peek_checkpoint_kind(ddpg_path) == AgentKind::Ddpg);
    CHECK_THROWS_AS(load_sac_checkpoint(ddpg_path, sp, box), std::runtime_error);

    std::ofstream bad((dir / "bad.ckpt").string(), std::ios::binary);
    bad << "not a checkpoint";
    bad.close();
    CHECK_THROWS_AS(peek_checkpoint_kind((dir / "bad.ckpt").string()), std::runtime_error);

    // Truncated file: shape/size inconsistency must be a load error.
    std::ifstream in(sac_path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream cut((dir / "cut.ckpt").string(), std::ios::binary);
    cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    cut.close();
    CHECK_THROWS_AS(load_sac_checkpoint((dir / "cut.ckpt").string(), sp, box),
                    std::runtime_error);
}

TEST_CASE("run_training determinism and warmup semantics") {
    Scenario scenario;
    scenario.map = testing::empty_room();
    scenario.robot_start = {0.5, 0.5, 0.0};
    scenario.goal = {3.5, 3.5};
    scenario.limits.max_steps = 40;
    scenario.validate();

    RewardParams reward;
    LidarConfig lidar;  // 10-beam front scan
    const ActionBox box{0.2, 2.0};

    TrainingConfig tc;
    tc.episodes = 6;
    tc.batch_size = 16;
    tc.warmup_steps = 64;
    tc.buffer_capacity = 10000;

    const auto run = [&](std::uint64_t seed) {
        Rng rng(100);
        SacParams sp;
        sp.hidden = {16, 16};
        AnyAgent agent{SacAgent(sp, box, rng)};
        NavEnv env(scenario, reward, lidar);
        return run_training(env, agent, tc, seed);
    };

    const TrainingLog log_a = run(7);
    const TrainingLog log_b = run(7);
    REQUIRE(log_a.episodes.size() == 6);
    CHECK_FALSE(log_a.aborted);
    for (std::size_t i = 0; i < log_a.episodes.size(); ++i) {
        CHECK(log_a.episodes[i].episode_return == log_b.episodes[i].episode_return);
        CHECK(log_a.episodes[i].steps == log_b.episodes[i].steps);
        CHECK(log_a.episodes[i].outcome == log_b.episodes[i].outcome);
    }

    SUBCASE("warmup beyond the budget still logs every episode") {
        TrainingConfig no_learn = tc;
        no_learn.warmup_steps = 1000000;  // never learns
        Rng rng(100);
        SacParams sp;
        sp.hidden = {16, 16};
        AnyAgent agent{SacAgent(sp, box, rng)};
        NavEnv env(scenario, reward, lidar);
        const TrainingLog log = run_training(env, agent, no_learn, 7);
        CHECK(log.episodes.size() == 6);
        CHECK_FALSE(log.aborted);
    }
}
