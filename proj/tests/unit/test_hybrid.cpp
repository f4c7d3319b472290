#include <doctest.h>

#include <cmath>

#include "covy/hybrid.hpp"
#include "test_helpers.hpp"

using namespace covy;

namespace {

/// A scripted "agent" is inconvenient here; the smallest real SAC works.
AnyAgent tiny_agent(std::uint64_t seed) {
    Rng rng(seed);
    SacParams sp;
    sp.hidden = {16, 16};
    return AnyAgent{SacAgent(sp, ActionBox{0.2, 2.0}, rng)};
}

Scenario empty_scenario(int max_steps = 120) {
    Scenario s;
    s.map = testing::empty_room();
    s.robot_start = {2.0, 2.0, 0.5};  // center: a wandering policy stays clear of walls
    s.goal = {3.5, 3.5};
    s.limits.max_steps = max_steps;
    s.validate();
    return s;
}

LidarConfig full_scan() {
    LidarConfig cfg;
    cfg.beam_count = 361;
    cfg.angle_min = -kPi;
    cfg.angle_max = kPi;
    cfg.max_range = 6.0;
    cfg.noise_sigma = 0.01;
    return cfg;
}

EpisodeTrace synthetic_trace(int steps, int goal_at, int collide_at) {
    EpisodeTrace t;
    t.goal = {3.0, 3.0};
    t.goal_radius = 0.3;
    for (int i = 1; i <= steps; ++i) {
        HybridStepRecord r;
        r.step = i;
        r.true_goal_distance = (goal_at > 0 && i >= goal_at) ? 0.1 : 2.0;
        r.collision = collide_at > 0 && i >= collide_at;
        t.steps.push_back(r);
    }
    t.path_length = 0.02 * steps;
    t.elapsed_s = 0.1 * steps;
    return t;
}

}  // namespace

TEST_CASE("pose_divergence distances and wrap") {
    {
        const auto [dp, dth] = pose_divergence({1, 2, 0.5}, {1, 2, 0.5});
        CHECK(dp == doctest::Approx(0.0));
        CHECK(dth == doctest::Approx(0.0));
    }
    {
        const auto [dp, dth] = pose_divergence({0, 0, 0}, {3, 4, 0});
        CHECK(dp == doctest::Approx(5.0));
        CHECK(dth == doctest::Approx(0.0));
    }
    {
        const auto [dp, dth] = pose_divergence({0, 0, 3.1}, {0, 0, -3.1});
        CHECK(dth == doctest::Approx(2.0 * kPi - 6.2).epsilon(1e-9));  // ~0.083, not 6.2
    }
}

TEST_CASE("classify_episode is exclusive and exhaustive") {
    SUBCASE("goal reach") {
        const EpisodeOutcome o = classify_episode(synthetic_trace(100, 80, 0));
        CHECK(o.kind == EpisodeOutcome::Kind::Success);
        CHECK(o.steps == 80);
    }
    SUBCASE("collision") {
        const EpisodeOutcome o = classify_episode(synthetic_trace(100, 0, 30));
        CHECK(o.kind == EpisodeOutcome::Kind::Collision);
        CHECK(o.steps == 30);
    }
    SUBCASE("budget exhausted is lost") {
        const EpisodeOutcome o = classify_episode(synthetic_trace(500, 0, 0));
        CHECK(o.kind == EpisodeOutcome::Kind::Lost);
        CHECK(o.steps == 500);
    }
    SUBCASE("goal before collision wins") {
        const EpisodeOutcome o = classify_episode(synthetic_trace(100, 20, 50));
        CHECK(o.kind == EpisodeOutcome::Kind::Success);
    }
    SUBCASE("average speed is path over elapsed") {
        EpisodeTrace t = synthetic_trace(100, 0, 0);
        t.path_length = 2.0;
        t.elapsed_s = 10.0;
        CHECK(classify_episode(t).average_speed() == doctest::Approx(0.2));
    }
}

TEST_CASE("set_target transforms robot-frame targets into the world") {
    Scenario s = empty_scenario();
    HybridConfig cfg;
    HybridController ctrl(s, RewardParams{}, cfg, AmclParams{}, full_scan(), 50);

    SUBCASE("target transforms through the believed pose") {
        // The believed pose starts at the scenario start; the report target
        // is robot-frame.
        BreachReport report;
        report.target = Vec2{1.5, 0.0};
        REQUIRE(ctrl.set_target(report));
        const Pose2D start = s.robot_start;
        const Vec2 expected = start.transform({1.5, 0.0});
        CHECK(ctrl.goal().x == doctest::Approx(expected.x));
        CHECK(ctrl.goal().y == doctest::Approx(expected.y));
    }
    SUBCASE("report without a target is a signaled no-op") {
        const Vec2 before = ctrl.goal();
        BreachReport empty;
        CHECK_FALSE(ctrl.set_target(empty));
        CHECK(ctrl.goal() == before);
    }
}

TEST_CASE("set_target frame transform example") {
    // Robot believed at (1, 1, pi/2); robot-frame target (1, 0) lands at (1, 2).
    const Pose2D believed{1.0, 1.0, kPi / 2};
    const Vec2 world = believed.transform({1.0, 0.0});
    CHECK(world.x == doctest::Approx(1.0));
    CHECK(world.y == doctest::Approx(2.0));
}

TEST_CASE("hybrid episode bookkeeping: reinit schedule and fault response") {
    Scenario s = empty_scenario(90);
    AnyAgent agent = tiny_agent(42);

    RewardParams reward;
    AmclParams amcl;
    HybridConfig cfg;
    cfg.check_interval = 20;
    cfg.pos_threshold = 0.3;

    FaultConfig fault;
    fault.enabled = true;
    fault.trigger_step = 50;
    fault.jump = {1.0, 0.0, 0.0};

    SUBCASE("no fault, no reinit events") {
        HybridController ctrl(s, reward, cfg, amcl, full_scan(), 300);
        Rng rng(1);
        const EpisodeTrace trace = ctrl.run_episode(agent, rng, false, {});
        CHECK(trace.reinit_events == 0);
        for (const auto& rec : trace.steps) CHECK_FALSE(rec.reinit);
    }

    SUBCASE("1.0 m jump at step 50 reinitializes at step 60") {
        HybridController ctrl(s, reward, cfg, amcl, full_scan(), 300);
        Rng rng(1);
        const EpisodeTrace trace = ctrl.run_episode(agent, rng, false, fault);
        REQUIRE(trace.steps.size() >= 60);
        int first_reinit = -1;
        for (const auto& rec : trace.steps) {
            if (rec.reinit) {
                first_reinit = static_cast<int>(rec.step);
                break;
            }
        }
        CHECK(first_reinit == 60);
        // Reinit events only on multiples of the check interval.
        for (const auto& rec : trace.steps) {
            if (rec.reinit) CHECK(rec.step % cfg.check_interval == 0);
        }
        // After the reinit the believed pose equals the filter mean exactly.
        const auto& at60 = trace.steps[59];
        CHECK(at60.reinit);
        CHECK(at60.believed_pose.x == at60.amcl_mean.x);
        CHECK(at60.believed_pose.y == at60.amcl_mean.y);
        CHECK(at60.believed_pose.theta == at60.amcl_mean.theta);
        // Before the check, the believed pose carries most of the jump error.
        const auto& at55 = trace.steps[54];
        CHECK(distance(at55.believed_pose.position(), at55.true_pose.position()) > 0.7);
    }

    SUBCASE("pure odometry ignores the filter and keeps the error") {
        HybridConfig pure = cfg;
        pure.mode = HybridConfig::Mode::PureOdom;
        HybridController ctrl(s, reward, pure, amcl, full_scan(), 300);
        Rng rng(1);
        const EpisodeTrace trace = ctrl.run_episode(agent, rng, false, fault);
        CHECK(trace.reinit_events == 0);
        REQUIRE(trace.steps.size() > 55);
        bool saw_large_error = false;
        for (const auto& rec : trace.steps) {
            if (rec.step > 50 &&
                distance(rec.believed_pose.position(), rec.true_pose.position()) > 0.7) {
                saw_large_error = true;
            }
        }
        CHECK(saw_large_error);
    }

    SUBCASE("without reinits, hybrid and pure issue identical action sequences") {
        // The AMCL check is passive when thresholds are never crossed: same
        // seed, same trajectory, only the bookkeeping differs.
        HybridController hybrid_ctrl(s, reward, cfg, amcl, full_scan(), 300);
        HybridConfig pure = cfg;
        pure.mode = HybridConfig::Mode::PureOdom;
        HybridController pure_ctrl(s, reward, pure, amcl, full_scan(), 300);
        Rng rng_a(5), rng_b(5);
        const EpisodeTrace th = hybrid_ctrl.run_episode(agent, rng_a, false, {});
        const EpisodeTrace tp = pure_ctrl.run_episode(agent, rng_b, false, {});
        CHECK(th.reinit_events == 0);
        REQUIRE(th.steps.size() == tp.steps.size());
        for (std::size_t i = 0; i < th.steps.size(); ++i) {
            CHECK(th.steps[i].v_cmd == tp.steps[i].v_cmd);
            CHECK(th.steps[i].w_cmd == tp.steps[i].w_cmd);
            CHECK(th.steps[i].true_pose == tp.steps[i].true_pose);
        }
    }

    SUBCASE("hybrid elapsed time carries the localization budget") {
        HybridController hybrid_ctrl(s, reward, cfg, amcl, full_scan(), 300);
        HybridConfig pure = cfg;
        pure.mode = HybridConfig::Mode::PureOdom;
        HybridController pure_ctrl(s, reward, pure, amcl, full_scan(), 300);
        Rng rng_a(2), rng_b(2);
        const EpisodeTrace th = hybrid_ctrl.run_episode(agent, rng_a, false, {});
        const EpisodeTrace tp = pure_ctrl.run_episode(agent, rng_b, false, {});
        CHECK(th.elapsed_s ==
              doctest::Approx(th.steps.size() * (s.limits.dt + cfg.amcl_step_cost_s)));
        CHECK(tp.elapsed_s == doctest::Approx(tp.steps.size() * s.limits.dt));
    }
}
