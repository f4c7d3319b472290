#include <chrono>
#include <exception>
#include <functional>
#include <memory>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "covy/checkpoint.hpp"
#include "covy/config.hpp"
#include "covy/experiments.hpp"
#include "covy/export.hpp"
#include "covy/scenario.hpp"

namespace {

using covy::Config;
using json = nlohmann::json;

struct GlobalOpts {
    std::string scenario_path;
    std::string config_path;
    std::string out;
    std::uint64_t seed{0};
    bool seed_set{false};
    std::vector<std::string> overrides;
};

Config make_config(const GlobalOpts& g) {
    Config cfg = covy::load_config(g.config_path);
    for (const std::string& assignment : g.overrides) cfg.apply_override(assignment);
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

covy::AnyAgent make_fresh_agent(const Config& cfg, const covy::Scenario& scenario) {
    covy::Rng init_rng(covy::derive_seed(cfg.seed, 0x496e6974));
    const covy::ActionBox box{scenario.v_max, scenario.w_max};
    if (cfg.agent == "ddpg") {
        return covy::AnyAgent(covy::DdpgAgent(cfg.ddpg, box, init_rng));
    }
    return covy::AnyAgent(covy::SacAgent(cfg.sac, box, init_rng));
}

covy::AnyAgent load_agent(const std::string& checkpoint, const Config& cfg,
                          const covy::Scenario& scenario) {
    const covy::ActionBox box{scenario.v_max, scenario.w_max};
    if (covy::peek_checkpoint_kind(checkpoint) == covy::AgentKind::Ddpg) {
        return covy::AnyAgent(covy::load_ddpg_checkpoint(checkpoint, cfg.ddpg, box));
    }
    return covy::AnyAgent(covy::load_sac_checkpoint(checkpoint, cfg.sac, box));
}

int cmd_train(const GlobalOpts& g, int episodes_override, int curve_window) {
    Config cfg = make_config(g);
    if (episodes_override > 0) cfg.training.episodes = episodes_override;
    covy::Scenario scenario = covy::load_scenario(g.scenario_path);

    covy::NavEnv env(scenario, cfg.reward, cfg.nav_lidar);
    covy::AnyAgent agent = make_fresh_agent(cfg, scenario);

    const auto t0 = std::chrono::steady_clock::now();
    const covy::TrainingLog log = covy::run_training(env, agent, cfg.training, cfg.seed);
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    covy::export_result(covy::to_table(log), covy::ExportFormat::Csv, g.out + ".train.csv");
    covy::export_result(covy::to_table(covy::smooth_returns(log, curve_window), curve_window),
                        covy::ExportFormat::Csv, g.out + ".curve.csv");
    agent.save(g.out + ".ckpt");

    // Wall-clock and other non-reproducible run facts live in a sidecar so
    // the data outputs above stay bit-identical across reruns of a seed.
    json meta{{"schema", "covy.run_meta.v1"},
              {"subcommand", "train"},
              {"agent", cfg.agent},
              {"episodes", static_cast<int>(log.episodes.size())},
              {"seed", cfg.seed},
              {"wall_time_s", wall_s},
              {"aborted", log.aborted},
              {"abort_reason", log.abort_reason}};
    std::ofstream meta_out(g.out + ".meta.json");
    meta_out << meta.dump(2) << "\n";

    if (log.aborted) {
        std::cerr << json{{"error", log.abort_reason}}.dump() << "\n";
        return 2;
    }
    std::cout << "trained " << log.episodes.size() << " episodes, checkpoint " << g.out
              << ".ckpt\n";
    return 0;
}

int cmd_eval_nav(const GlobalOpts& g, const std::string& checkpoint, const std::string& mode_name,
                 int episodes, double fault_jump_dx, std::int64_t fault_step, bool write_trace) {
    Config cfg = make_config(g);
    covy::Scenario scenario = covy::load_scenario(g.scenario_path);
    covy::AnyAgent agent = load_agent(checkpoint, cfg, scenario);

    covy::HybridConfig::Mode mode = covy::HybridConfig::Mode::Hybrid;
    if (mode_name == "pure_odom") {
        mode = covy::HybridConfig::Mode::PureOdom;
    } else if (mode_name != "hybrid") {
        throw std::invalid_argument("--mode must be hybrid|pure_odom");
    }

    covy::FaultConfig fault;
    if (fault_step >= 0) {
        fault.enabled = true;
        fault.trigger_step = fault_step;
        fault.jump = {fault_jump_dx, 0.0, 0.0};
    }

    const covy::NavStats stats =
        covy::run_nav_eval(scenario, agent, cfg, mode, episodes, cfg.seed, fault);
    covy::export_result(covy::summary_table(stats), covy::ExportFormat::Csv,
                        g.out + ".summary.csv");
    covy::export_result(covy::episodes_table(stats), covy::ExportFormat::Csv,
                        g.out + ".episodes.csv");

    if (write_trace) {
        // Re-run the first episode deterministically for a step-level trace.
        covy::HybridConfig hybrid = cfg.hybrid;
        hybrid.mode = mode;
        covy::HybridController controller(scenario, cfg.reward, hybrid, cfg.amcl, cfg.full_lidar,
                                          cfg.amcl_particles);
        covy::Rng rng(covy::derive_seed(cfg.seed, 0xE9000));
        const covy::EpisodeTrace trace = controller.run_episode(agent, rng, true, fault);
        covy::JsonlWriter writer(g.out + ".trace.jsonl");
        for (const covy::HybridStepRecord& rec : trace.steps) writer.write(covy::to_json(rec));
    }

    std::cout << "episodes " << stats.episodes << " success% " << stats.success_pct()
              << " failure% " << stats.failure_pct() << " (collision " << stats.collisions
              << " / lost " << stats.lost << ") avg speed " << stats.average_speed << " m/s\n";
    return 0;
}

int cmd_sweep_ale(const GlobalOpts& g, const std::string& mode_name, const std::string& format) {
    Config cfg = make_config(g);
    const covy::DetectorProfile& profile = mode_name == "rgb" ? cfg.rgb : cfg.rgbd;
    covy::SweepConfig sweep;
    const covy::AleTable table = covy::run_localization_sweep(profile, sweep, cfg.seed);
    covy::export_result(covy::to_table(table), covy::parse_export_format(format), g.out);
    std::cout << "ale sweep (" << mode_name << "): " << table.rows.size() << " stations -> "
              << g.out << "\n";
    return 0;
}

int cmd_eval_breach(const GlobalOpts& g, int scenes, const std::string& format,
                    const std::string& log_path) {
    Config cfg = make_config(g);
    covy::BreachEvalConfig bcfg;
    bcfg.scenes = scenes;
    bcfg.threshold = cfg.breach_threshold;
    bcfg.window = cfg.breach_window;
    bcfg.warm_frames = cfg.breach_window + 5;
    std::unique_ptr<covy::JsonlWriter> log;
    std::function<void(const covy::VisionFrame&, bool)> on_scene;
    if (!log_path.empty()) {
        log = std::make_unique<covy::JsonlWriter>(log_path);
        on_scene = [&log](const covy::VisionFrame& frame, bool truth) {
            json record = covy::to_json(frame);
            record["truth_breach"] = truth;
            log->write(record);
        };
    }
    const auto results =
        covy::run_breach_eval(cfg.rgbd, cfg.rgb, cfg.tracker, bcfg, cfg.seed, on_scene);
    covy::export_result(covy::to_table(results), covy::parse_export_format(format), g.out);
    for (const covy::BreachEvalResult& r : results) {
        std::cout << covy::to_string(r.mode) << ": accuracy "
                  << (r.matrix.accuracy() ? covy::format_g6(*r.matrix.accuracy()) : "undefined")
                  << " over " << r.matrix.total() << " scenes\n";
    }
    return 0;
}

int cmd_export(const std::string& in_path, const std::string& format, const std::string& out) {
    const covy::ResultTable table = covy::import_result_json(in_path);
    covy::export_result(table, covy::parse_export_format(format), out);
    std::cout << "exported " << table.rows.size() << " rows -> " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covy: breach-detection, localization and navigation experiments"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--scenario", g.scenario_path, "Scenario file")->envname("COVY_SCENARIO");
    app.add_option("--config", g.config_path, "Layered config file (JSON)");
    app.add_option("--out", g.out, "Output path or prefix");
    auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--set", g.overrides, "Config override, e.g. reward.goal_radius=0.3");

    // Global flags may appear after the subcommand name.
    app.fallthrough();

    auto* train = app.add_subcommand("train", "Train a DDPG or SAC agent");
    train->fallthrough();
    int episodes_override = -1;
    int curve_window = 25;
    std::string agent_name;
    train->add_option("--agent", agent_name, "sac|ddpg (overrides config)");
    train->add_option("--episodes", episodes_override, "Episode budget (overrides config)");
    train->add_option("--curve-window", curve_window, "Reward-curve block size");

    auto* eval_nav = app.add_subcommand("eval-nav", "Evaluate a checkpoint with hybrid-nav");
    eval_nav->fallthrough();
    std::string checkpoint;
    std::string mode_name = "hybrid";
    int nav_episodes = 100;
    double fault_jump_dx = 1.0;
    std::int64_t fault_step = -1;
    bool write_trace = false;
    eval_nav->add_option("--checkpoint", checkpoint, "Agent checkpoint")->required();
    eval_nav->add_option("--mode", mode_name, "hybrid|pure_odom");
    eval_nav->add_option("--episodes", nav_episodes, "Episode count");
    eval_nav->add_option("--fault-step", fault_step, "Inject an odometry jump at this step");
    eval_nav->add_option("--fault-jump-dx", fault_jump_dx, "Jump magnitude, meters");
    eval_nav->add_flag("--trace", write_trace, "Also write a step-level trace of episode 0");

    auto* sweep = app.add_subcommand("sweep-ale", "Localization-error sweep over distance");
    sweep->fallthrough();
    std::string sweep_mode = "rgbd";
    std::string sweep_format = "csv";
    sweep->add_option("--mode", sweep_mode, "rgbd|rgb");
    sweep->add_option("--format", sweep_format, "csv|json");

    auto* breach = app.add_subcommand("eval-breach", "Breach-classification accuracy");
    breach->fallthrough();
    int scenes = 200;
    std::string breach_format = "csv";
    std::string breach_log;
    breach->add_option("--scenes", scenes, "Scene count (balanced)");
    breach->add_option("--format", breach_format, "csv|json");
    breach->add_option("--log", breach_log, "Also write a per-scene detection log (jsonl)");

    auto* exp = app.add_subcommand("export", "Convert a result JSON to csv/json");
    exp->fallthrough();
    std::string export_in;
    std::string export_format = "csv";
    exp->add_option("--in", export_in, "Result table JSON")->required();
    exp->add_option("--format", export_format, "csv|json");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (train->parsed()) {
            if (!agent_name.empty()) g.overrides.push_back("agent=" + agent_name);
            if (g.scenario_path.empty() || g.out.empty())
                throw std::invalid_argument("train needs --scenario and --out");
            return cmd_train(g, episodes_override, curve_window);
        }
        if (eval_nav->parsed()) {
            if (g.scenario_path.empty() || g.out.empty())
                throw std::invalid_argument("eval-nav needs --scenario and --out");
            return cmd_eval_nav(g, checkpoint, mode_name, nav_episodes, fault_jump_dx, fault_step,
                                write_trace);
        }
        if (sweep->parsed()) {
            if (g.out.empty()) throw std::invalid_argument("sweep-ale needs --out");
            return cmd_sweep_ale(g, sweep_mode, sweep_format);
        }
        if (breach->parsed()) {
            if (g.out.empty()) throw std::invalid_argument("eval-breach needs --out");
            return cmd_eval_breach(g, scenes, breach_format, breach_log);
        }
        if (exp->parsed()) {
            if (g.out.empty()) throw std::invalid_argument("export needs --out");
            return cmd_export(export_in, export_format, g.out);
        }
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
