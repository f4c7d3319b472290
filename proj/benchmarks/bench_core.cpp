#include <benchmark/benchmark.h>

#include "covy/amcl.hpp"
#include "covy/hungarian.hpp"
#include "covy/sac.hpp"
#include "covy/scan_match.hpp"
#include "covy/world.hpp"

namespace {

using namespace covy;

WorldMap bench_map() {
    WorldMap map;
    map.bounds = {0, 0, 4, 4};
    map.resolution = 0.05;
    map.obstacles = {
        {{2.6, 2.6}, {3.6, 2.6}, {3.6, 2.9}, {2.9, 2.9}, {2.9, 3.6}, {2.6, 3.6}},
        {{0.7, 0.9}, {1.2, 0.9}, {1.2, 1.3}, {0.7, 1.3}},
    };
    return map;
}

LidarConfig full_scan() {
    LidarConfig cfg;
    cfg.beam_count = 361;
    cfg.angle_min = -kPi;
    cfg.angle_max = kPi;
    cfg.max_range = 6.0;
    return cfg;
}

void BM_CastLidar361(benchmark::State& state) {
    const WorldMap map = bench_map();
    Rng rng(1);
    const LidarConfig cfg = full_scan();
    for (auto _ : state) {
        LidarScan scan = cast_lidar(map, {}, {1.5, 1.8, 0.4}, cfg, rng);
        benchmark::DoNotOptimize(scan.ranges.data());
    }
}
BENCHMARK(BM_CastLidar361);

void BM_ScanMatch(benchmark::State& state) {
    const WorldMap map = bench_map();
    Rng rng(2);
    const LidarConfig cfg = full_scan();
    const Pose2D p0{1.5, 1.8, 0.4};
    const Pose2D p1 = integrate_odometry(p0, {0.02, 0.0, 0.05});
    const LidarScan s0 = cast_lidar(map, {}, p0, cfg, rng);
    const LidarScan s1 = cast_lidar(map, {}, p1, cfg, rng);
    for (auto _ : state) {
        PoseDelta d = scan_match(s0, s1);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_ScanMatch);

void BM_AmclUpdate500(benchmark::State& state) {
    const WorldMap map = bench_map();
    const DistanceField df(map.rasterize());
    Rng rng(3);
    const LidarConfig cfg = full_scan();
    const LidarScan scan = cast_lidar(map, {}, {1.5, 1.8, 0.4}, cfg, rng);
    ParticleSet ps = init_particles_gaussian({1.5, 1.8, 0.4}, 0.1, 0.1, 500, rng);
    const AmclParams params;
    for (auto _ : state) {
        amcl_update(ps, {0.02, 0.0, 0.01}, scan, map, df, params, rng);
        benchmark::DoNotOptimize(ps.particles.data());
    }
}
BENCHMARK(BM_AmclUpdate500);

void BM_Hungarian6x6(benchmark::State& state) {
    Rng rng(4);
    CostMatrix m{6, 6, std::vector<double>(36)};
    for (double& c : m.cost) c = rng.uniform(0.0, 10.0);
    for (auto _ : state) {
        auto pairs = hungarian_assign(m);
        benchmark::DoNotOptimize(pairs.data());
    }
}
BENCHMARK(BM_Hungarian6x6);

void BM_SacTrainStep(benchmark::State& state) {
    Rng rng(5);
    SacParams sp;
    sp.hidden = {static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
    SacAgent agent(sp, ActionBox{0.2, 2.0}, rng);
    Batch batch;
    const Eigen::Index n = 64;
    batch.states = Eigen::MatrixXd::Random(n, kStateDim);
    batch.actions = Eigen::MatrixXd::Random(n, 2);
    batch.rewards = Eigen::VectorXd::Random(n);
    batch.next_states = Eigen::MatrixXd::Random(n, kStateDim);
    batch.dones = Eigen::VectorXd::Zero(n);
    for (auto _ : state) {
        auto losses = agent.train_step(batch, rng);
        benchmark::DoNotOptimize(losses);
    }
}
BENCHMARK(BM_SacTrainStep)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
