#include "covy/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace covy {

using json = nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;
using FieldMap = std::map<std::string, Setter>;

void apply_fields(const json& j, const std::string& section, const FieldMap& fields) {
    if (!j.is_object()) throw std::invalid_argument("config: " + section + " must be an object");
    for (const auto& [key, value] : j.items()) {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw std::invalid_argument("config: unknown key " + section + "." + key);
        it->second(value);
    }
}

FieldMap lidar_fields(LidarConfig& c) {
    return {
        {"beam_count", [&c](const json& v) { c.beam_count = v.get<int>(); }},
        {"angle_min_deg", [&c](const json& v) { c.angle_min = deg_to_rad(v.get<double>()); }},
        {"angle_max_deg", [&c](const json& v) { c.angle_max = deg_to_rad(v.get<double>()); }},
        {"max_range", [&c](const json& v) { c.max_range = v.get<double>(); }},
        {"noise_sigma", [&c](const json& v) { c.noise_sigma = v.get<double>(); }},
    };
}

FieldMap detector_fields(DetectorProfile& p) {
    return {
        {"max_range", [&p](const json& v) { p.max_range = v.get<double>(); }},
        {"fov_deg", [&p](const json& v) { p.fov = deg_to_rad(v.get<double>()); }},
        {"ale_intercept", [&p](const json& v) { p.ale_intercept = v.get<double>(); }},
        {"ale_slope", [&p](const json& v) { p.ale_slope = v.get<double>(); }},
        {"occlusion_enabled", [&p](const json& v) { p.occlusion_enabled = v.get<bool>(); }},
        {"detect_falloff_width", [&p](const json& v) { p.detect_falloff_width = v.get<double>(); }},
    };
}

FieldMap tracker_fields(TrackerParams& t) {
    return {
        {"initial_position_var", [&t](const json& v) { t.initial_position_var = v.get<double>(); }},
        {"initial_velocity_var", [&t](const json& v) { t.initial_velocity_var = v.get<double>(); }},
        {"process_noise_var", [&t](const json& v) { t.process_noise_var = v.get<double>(); }},
        {"measurement_var_floor",
         [&t](const json& v) { t.measurement_var_floor = v.get<double>(); }},
        {"gate", [&t](const json& v) { t.gate = v.get<double>(); }},
        {"gate_sigma_scale", [&t](const json& v) { t.gate_sigma_scale = v.get<double>(); }},
        {"max_age", [&t](const json& v) { t.max_age = v.get<int>(); }},
        {"min_hits", [&t](const json& v) { t.min_hits = v.get<int>(); }},
        {"history_window", [&t](const json& v) { t.history_window = v.get<int>(); }},
    };
}

FieldMap amcl_fields(AmclParams& a) {
    return {
        {"alpha1", [&a](const json& v) { a.alpha1 = v.get<double>(); }},
        {"alpha2", [&a](const json& v) { a.alpha2 = v.get<double>(); }},
        {"alpha3", [&a](const json& v) { a.alpha3 = v.get<double>(); }},
        {"alpha4", [&a](const json& v) { a.alpha4 = v.get<double>(); }},
        {"z_hit", [&a](const json& v) { a.z_hit = v.get<double>(); }},
        {"z_rand", [&a](const json& v) { a.z_rand = v.get<double>(); }},
        {"sigma_hit", [&a](const json& v) { a.sigma_hit = v.get<double>(); }},
        {"beams_used", [&a](const json& v) { a.beams_used = v.get<int>(); }},
        {"alpha_slow", [&a](const json& v) { a.alpha_slow = v.get<double>(); }},
        {"alpha_fast", [&a](const json& v) { a.alpha_fast = v.get<double>(); }},
        {"ess_floor_fraction", [&a](const json& v) { a.ess_floor_fraction = v.get<double>(); }},
        {"explore_inject", [&a](const json& v) { a.explore_inject = v.get<double>(); }},
        {"explore_updates", [&a](const json& v) { a.explore_updates = v.get<int>(); }},
    };
}

FieldMap scan_match_fields(ScanMatchParams& s) {
    return {
        {"max_iter", [&s](const json& v) { s.max_iter = v.get<int>(); }},
        {"tol", [&s](const json& v) { s.tol = v.get<double>(); }},
        {"correspondence_limit",
         [&s](const json& v) { s.correspondence_limit = v.get<double>(); }},
    };
}

FieldMap reward_fields(RewardParams& r) {
    return {
        {"r_arrive", [&r](const json& v) { r.r_arrive = v.get<double>(); }},
        {"r_collide", [&r](const json& v) { r.r_collide = v.get<double>(); }},
        {"r_progress", [&r](const json& v) { r.r_progress = v.get<double>(); }},
        {"r_stall", [&r](const json& v) { r.r_stall = v.get<double>(); }},
        {"goal_radius", [&r](const json& v) { r.goal_radius = v.get<double>(); }},
        {"min_clearance", [&r](const json& v) { r.min_clearance = v.get<double>(); }},
        {"max_steps", [&r](const json& v) { r.max_steps = v.get<int>(); }},
    };
}

FieldMap ddpg_fields(DdpgParams& d) {
    return {
        {"hidden", [&d](const json& v) { d.hidden = v.get<std::vector<int>>(); }},
        {"actor_lr", [&d](const json& v) { d.actor_lr = v.get<double>(); }},
        {"critic_lr", [&d](const json& v) { d.critic_lr = v.get<double>(); }},
        {"gamma", [&d](const json& v) { d.gamma = v.get<double>(); }},
        {"tau", [&d](const json& v) { d.tau = v.get<double>(); }},
        {"explore_sigma", [&d](const json& v) { d.explore_sigma = v.get<double>(); }},
        {"explore_sigma_final",
         [&d](const json& v) { d.explore_sigma_final = v.get<double>(); }},
        {"explore_decay_steps",
         [&d](const json& v) { d.explore_decay_steps = v.get<std::int64_t>(); }},
    };
}

FieldMap sac_fields(SacParams& s) {
    return {
        {"hidden", [&s](const json& v) { s.hidden = v.get<std::vector<int>>(); }},
        {"lr", [&s](const json& v) { s.lr = v.get<double>(); }},
        {"gamma", [&s](const json& v) { s.gamma = v.get<double>(); }},
        {"tau", [&s](const json& v) { s.tau = v.get<double>(); }},
        {"init_alpha", [&s](const json& v) { s.init_alpha = v.get<double>(); }},
        {"target_entropy", [&s](const json& v) { s.target_entropy = v.get<double>(); }},
        {"auto_alpha", [&s](const json& v) { s.auto_alpha = v.get<bool>(); }},
    };
}

FieldMap training_fields(TrainingConfig& t) {
    return {
        {"episodes", [&t](const json& v) { t.episodes = v.get<int>(); }},
        {"buffer_capacity", [&t](const json& v) { t.buffer_capacity = v.get<std::size_t>(); }},
        {"batch_size", [&t](const json& v) { t.batch_size = v.get<std::size_t>(); }},
        {"warmup_steps", [&t](const json& v) { t.warmup_steps = v.get<std::size_t>(); }},
        {"updates_per_step", [&t](const json& v) { t.updates_per_step = v.get<int>(); }},
        {"randomize_start_goal",
         [&t](const json& v) { t.randomize_start_goal = v.get<bool>(); }},
        {"random_warmup_actions",
         [&t](const json& v) { t.random_warmup_actions = v.get<bool>(); }},
    };
}

FieldMap hybrid_fields(HybridConfig& h) {
    return {
        {"mode",
         [&h](const json& v) {
             const std::string m = v.get<std::string>();
             if (m == "hybrid") {
                 h.mode = HybridConfig::Mode::Hybrid;
             } else if (m == "pure_odom") {
                 h.mode = HybridConfig::Mode::PureOdom;
             } else {
                 throw std::invalid_argument("config: hybrid.mode must be hybrid|pure_odom");
             }
         }},
        {"check_interval", [&h](const json& v) { h.check_interval = v.get<int>(); }},
        {"pos_threshold", [&h](const json& v) { h.pos_threshold = v.get<double>(); }},
        {"heading_threshold_deg",
         [&h](const json& v) { h.heading_threshold = deg_to_rad(v.get<double>()); }},
        {"amcl_step_cost_s", [&h](const json& v) { h.amcl_step_cost_s = v.get<double>(); }},
        {"fault_affects_amcl", [&h](const json& v) { h.fault_affects_amcl = v.get<bool>(); }},
        {"believed_goal_fraction",
         [&h](const json& v) { h.believed_goal_fraction = v.get<double>(); }},
    };
}

}  // namespace

void Config::apply_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: document must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "nav_lidar") {
            apply_fields(value, key, lidar_fields(nav_lidar));
        } else if (key == "full_lidar") {
            apply_fields(value, key, lidar_fields(full_lidar));
        } else if (key == "detector") {
            for (const auto& [mode_key, mode_value] : value.items()) {
                if (mode_key == "rgbd") {
                    apply_fields(mode_value, "detector.rgbd", detector_fields(rgbd));
                } else if (mode_key == "rgb") {
                    apply_fields(mode_value, "detector.rgb", detector_fields(rgb));
                } else {
                    throw std::invalid_argument("config: unknown key detector." + mode_key);
                }
            }
        } else if (key == "tracker") {
            apply_fields(value, key, tracker_fields(tracker));
        } else if (key == "breach") {
            apply_fields(value, key,
                         {{"threshold", [this](const json& v) { breach_threshold = v.get<double>(); }},
                          {"window", [this](const json& v) { breach_window = v.get<int>(); }}});
        } else if (key == "amcl") {
            apply_fields(value, key, amcl_fields(amcl));
        } else if (key == "amcl_particles") {
            amcl_particles = value.get<std::size_t>();
        } else if (key == "scan_match") {
            apply_fields(value, key, scan_match_fields(scan_match));
        } else if (key == "reward") {
            apply_fields(value, key, reward_fields(reward));
        } else if (key == "ddpg") {
            apply_fields(value, key, ddpg_fields(ddpg));
        } else if (key == "sac") {
            apply_fields(value, key, sac_fields(sac));
        } else if (key == "training") {
            apply_fields(value, key, training_fields(training));
        } else if (key == "agent") {
            agent = value.get<std::string>();
            if (agent != "sac" && agent != "ddpg")
                throw std::invalid_argument("config: agent must be sac|ddpg");
        } else if (key == "hybrid") {
            apply_fields(value, key, hybrid_fields(hybrid));
        } else if (key == "seed") {
            seed = value.get<std::uint64_t>();
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
}

void Config::apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("config: override must look like section.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // unquoted strings (e.g. hybrid.mode=hybrid)
    }

    // Build the nested patch from the dotted path, innermost first.
    json patch = value;
    std::size_t end = path.size();
    while (true) {
        const std::size_t dot = path.rfind('.', end - 1);
        const std::string key =
            dot == std::string::npos ? path.substr(0, end) : path.substr(dot + 1, end - dot - 1);
        if (key.empty()) throw std::invalid_argument("config: bad override path " + path);
        json wrapped;
        wrapped[key] = patch;
        patch = std::move(wrapped);
        if (dot == std::string::npos) break;
        end = dot;
    }
    apply_json(patch);
}

Config load_config(const std::string& path) {
    Config cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    cfg.apply_json(j);
    return cfg;
}

}  // namespace covy
