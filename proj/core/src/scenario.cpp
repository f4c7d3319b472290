#include "covy/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace covy {

using json = nlohmann::json;

namespace {

Vec2 parse_vec2(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(field + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

PedestrianAgent parse_pedestrian(const json& j, int index) {
    const std::string name = "pedestrians[" + std::to_string(index) + "]";
    PedestrianAgent ped;
    ped.id = j.value("id", index + 1);
    ped.position = parse_vec2(j.at("position"), name + ".position");
    ped.radius = j.value("radius", 0.25);
    if (ped.radius <= 0.0) throw std::invalid_argument(name + ".radius must be > 0");
    const std::string mode = j.value("mode", "static");
    if (mode == "static") {
        ped.mode = PedestrianAgent::Mode::Static;
    } else if (mode == "waypoint") {
        ped.mode = PedestrianAgent::Mode::Waypoint;
        ped.speed = j.value("speed", 0.5);
        if (ped.speed <= 0.0) throw std::invalid_argument(name + ".speed must be > 0");
        if (!j.contains("waypoints") || !j.at("waypoints").is_array() || j.at("waypoints").empty())
            throw std::invalid_argument(name + ".waypoints required for waypoint mode");
        int wi = 0;
        for (const auto& w : j.at("waypoints")) {
            ped.waypoints.push_back(
                parse_vec2(w, name + ".waypoints[" + std::to_string(wi++) + "]"));
        }
    } else {
        throw std::invalid_argument(name + ".mode must be \"static\" or \"waypoint\"");
    }
    return ped;
}

}  // namespace

void Scenario::validate() const {
    map.validate();
    if (robot_radius <= 0.0) throw std::invalid_argument("robot.radius must be > 0");
    if (v_max <= 0.0) throw std::invalid_argument("robot.v_max must be > 0");
    if (w_max <= 0.0) throw std::invalid_argument("robot.w_max must be > 0");
    if (limits.max_steps < 1) throw std::invalid_argument("limits.max_steps must be >= 1");
    if (!(limits.dt > 0.0)) throw std::invalid_argument("limits.dt must be > 0");

    if (check_collision(map, {}, robot_start, robot_radius))
        throw std::invalid_argument("robot.start is not collision-free");
    if (!map.bounds.contains(goal) || map.inside_obstacle(goal) ||
        map.distance_to_nearest_obstacle(goal) < robot_radius) {
        throw std::invalid_argument("goal is not collision-free");
    }
    for (std::size_t i = 0; i < pedestrians.size(); ++i) {
        const PedestrianAgent& ped = pedestrians[i];
        const std::string name = "pedestrians[" + std::to_string(i) + "]";
        if (!map.bounds.contains(ped.position))
            throw std::invalid_argument(name + ".position outside map bounds");
        if (ped.mode == PedestrianAgent::Mode::Waypoint) {
            for (const Vec2& w : ped.waypoints) {
                if (!map.bounds.contains(w))
                    throw std::invalid_argument(name + " waypoint outside map bounds");
            }
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (pedestrians[k].id == ped.id)
                throw std::invalid_argument(name + ".id duplicates an earlier pedestrian");
        }
    }
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario parse error: ") + e.what());
    }

    Scenario s;
    try {
        const json& jm = j.at("map");
        const auto& jb = jm.at("bounds");
        if (!jb.is_array() || jb.size() != 4)
            throw std::invalid_argument("map.bounds must be [min_x, min_y, max_x, max_y]");
        s.map.bounds = {jb[0].get<double>(), jb[1].get<double>(), jb[2].get<double>(),
                        jb[3].get<double>()};
        s.map.resolution = jm.value("resolution", 0.05);
        if (jm.contains("obstacles")) {
            int oi = 0;
            for (const auto& jp : jm.at("obstacles")) {
                Polygon poly;
                int vi = 0;
                for (const auto& jv : jp) {
                    poly.push_back(parse_vec2(jv, "map.obstacles[" + std::to_string(oi) + "][" +
                                                      std::to_string(vi++) + "]"));
                }
                s.map.obstacles.push_back(std::move(poly));
                ++oi;
            }
        }

        const json& jr = j.at("robot");
        const auto& jstart = jr.at("start");
        if (!jstart.is_array() || jstart.size() != 3)
            throw std::invalid_argument("robot.start must be [x, y, theta]");
        s.robot_start = {jstart[0].get<double>(), jstart[1].get<double>(),
                         wrap_angle(jstart[2].get<double>())};
        s.robot_radius = jr.value("radius", 0.11);
        s.v_max = jr.value("v_max", 0.2);
        s.w_max = jr.value("w_max", 2.0);

        s.goal = parse_vec2(j.at("goal"), "goal");

        if (j.contains("pedestrians")) {
            int pi = 0;
            for (const auto& jp : j.at("pedestrians")) {
                s.pedestrians.push_back(parse_pedestrian(jp, pi++));
            }
        }
        if (j.contains("limits")) {
            s.limits.max_steps = j.at("limits").value("max_steps", 500);
            s.limits.dt = j.at("limits").value("dt", 0.1);
        }
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario parse error: ") + e.what());
    }

    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["map"]["bounds"] = {s.map.bounds.min_x, s.map.bounds.min_y, s.map.bounds.max_x,
                          s.map.bounds.max_y};
    j["map"]["resolution"] = s.map.resolution;
    json obstacles = json::array();
    for (const Polygon& poly : s.map.obstacles) {
        json jp = json::array();
        for (const Vec2& v : poly) jp.push_back({v.x, v.y});
        obstacles.push_back(jp);
    }
    j["map"]["obstacles"] = obstacles;
    j["robot"] = {{"start", {s.robot_start.x, s.robot_start.y, s.robot_start.theta}},
                  {"radius", s.robot_radius},
                  {"v_max", s.v_max},
                  {"w_max", s.w_max}};
    j["goal"] = {s.goal.x, s.goal.y};
    json peds = json::array();
    for (const PedestrianAgent& ped : s.pedestrians) {
        json jp = {{"id", ped.id},
                   {"position", {ped.position.x, ped.position.y}},
                   {"radius", ped.radius}};
        if (ped.mode == PedestrianAgent::Mode::Static) {
            jp["mode"] = "static";
        } else {
            jp["mode"] = "waypoint";
            jp["speed"] = ped.speed;
            json ws = json::array();
            for (const Vec2& w : ped.waypoints) ws.push_back({w.x, w.y});
            jp["waypoints"] = ws;
        }
        peds.push_back(jp);
    }
    j["pedestrians"] = peds;
    j["limits"] = {{"max_steps", s.limits.max_steps}, {"dt", s.limits.dt}};
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json_text(scenario);
}

}  // namespace covy
