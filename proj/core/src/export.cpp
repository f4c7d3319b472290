#include "covy/export.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace covy {

using json = nlohmann::json;

ExportFormat parse_export_format(const std::string& name) {
    if (name == "csv") return ExportFormat::Csv;
    if (name == "json") return ExportFormat::Json;
    throw std::invalid_argument("export format must be csv|json");
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

std::string format_opt(const std::optional<double>& v) {
    return v ? format_g6(*v) : "undefined";
}

}  // namespace

ResultTable to_table(const AleTable& table) {
    ResultTable out;
    out.schema = "covy.ale_table.v1";
    out.columns = {"distance_m", "mean_ale_m", "ci_half_width_m", "samples"};
    for (const AleRow& row : table.rows) {
        out.rows.push_back({format_g6(row.distance), format_g6(row.mean_ale),
                            format_g6(row.ci_half_width), std::to_string(row.samples)});
    }
    return out;
}

ResultTable to_table(const std::vector<BreachEvalResult>& results) {
    ResultTable out;
    out.schema = "covy.breach_eval.v1";
    out.columns = {"mode", "tp", "fp", "tn", "fn", "accuracy", "precision", "recall"};
    for (const BreachEvalResult& r : results) {
        out.rows.push_back({to_string(r.mode), std::to_string(r.matrix.tp),
                            std::to_string(r.matrix.fp), std::to_string(r.matrix.tn),
                            std::to_string(r.matrix.fn), format_opt(r.matrix.accuracy()),
                            format_opt(r.matrix.precision()), format_opt(r.matrix.recall())});
    }
    return out;
}

ResultTable summary_table(const NavStats& stats) {
    ResultTable out;
    out.schema = "covy.nav_stats.v1";
    out.columns = {"episodes",      "successes",  "collisions", "lost",
                   "failure_pct",   "collision_pct", "lost_pct", "success_pct",
                   "average_speed_mps"};
    out.rows.push_back({std::to_string(stats.episodes), std::to_string(stats.successes),
                        std::to_string(stats.collisions), std::to_string(stats.lost),
                        format_g6(stats.failure_pct()), format_g6(stats.collision_pct()),
                        format_g6(stats.lost_pct()), format_g6(stats.success_pct()),
                        format_g6(stats.average_speed)});
    return out;
}

ResultTable episodes_table(const NavStats& stats) {
    ResultTable out;
    out.schema = "covy.nav_episodes.v1";
    out.columns = {"episode", "outcome", "steps", "path_length_m", "elapsed_s",
                   "average_speed_mps", "reinit_events"};
    for (const NavEpisodeRecord& r : stats.records) {
        out.rows.push_back({std::to_string(r.episode), to_string(r.outcome.kind),
                            std::to_string(r.outcome.steps), format_g6(r.outcome.path_length),
                            format_g6(r.outcome.elapsed_s),
                            format_g6(r.outcome.average_speed()),
                            std::to_string(r.reinit_events)});
    }
    return out;
}

ResultTable to_table(const TrainingLog& log) {
    ResultTable out;
    out.schema = "covy.training_log.v1";
    out.columns = {"episode", "return", "outcome", "steps"};
    for (const EpisodeRecord& r : log.episodes) {
        out.rows.push_back({std::to_string(r.episode), format_g6(r.episode_return),
                            to_string(r.outcome), std::to_string(r.steps)});
    }
    return out;
}

ResultTable to_table(const std::vector<CurvePoint>& curve, int window) {
    ResultTable out;
    out.schema = "covy.reward_curve.v1";
    out.columns = {"episode_end", "mean_return_" + std::to_string(window)};
    for (const CurvePoint& p : curve) {
        out.rows.push_back({std::to_string(p.episode_end), format_g6(p.mean_return)});
    }
    return out;
}

void export_result(const ResultTable& table, ExportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("export: cannot write " + path);

    if (format == ExportFormat::Csv) {
        out << "# schema: " << table.schema << "\n";
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
        }
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << row[i] << (i + 1 < row.size() ? "," : "");
            }
            out << "\n";
        }
    } else {
        json j;
        j["schema"] = table.schema;
        j["columns"] = table.columns;
        j["rows"] = table.rows;
        out << j.dump(2) << "\n";
    }
    if (!out) throw std::runtime_error("export: write failed for " + path);
}

ResultTable import_result_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("export: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("export: parse error: ") + e.what());
    }
    ResultTable table;
    try {
        table.schema = j.at("schema").get<std::string>();
        table.columns = j.at("columns").get<std::vector<std::string>>();
        table.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("export: not a result table: ") + e.what());
    }
    return table;
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("jsonl: cannot write " + path);
}

void JsonlWriter::write(const json& record) {
    out_ << record.dump() << "\n";
}

json to_json(const HybridStepRecord& rec) {
    return json{{"step", rec.step},
                {"true_pose", {rec.true_pose.x, rec.true_pose.y, rec.true_pose.theta}},
                {"believed_pose",
                 {rec.believed_pose.x, rec.believed_pose.y, rec.believed_pose.theta}},
                {"amcl_mean", {rec.amcl_mean.x, rec.amcl_mean.y, rec.amcl_mean.theta}},
                {"amcl_cov_trace", rec.amcl_cov_trace},
                {"action", {rec.v_cmd, rec.w_cmd}},
                {"reward", rec.reward},
                {"goal_distance", rec.true_goal_distance},
                {"collision", rec.collision},
                {"reinit", rec.reinit},
                {"recovery", rec.recovery}};
}

json to_json(const VisionFrame& frame) {
    json detections = json::array();
    for (const DetectionObservation& d : frame.detections) {
        detections.push_back({{"position", {d.position_robot_frame.x, d.position_robot_frame.y}},
                              {"confidence", d.confidence}});
    }
    json positions = json::object();
    for (const auto& [id, p] : frame.report.averaged_positions) {
        positions[std::to_string(id)] = {p.x, p.y};
    }
    json pairs = json::array();
    for (const auto& [a, b] : frame.report.breach_pairs) pairs.push_back({a, b});
    json groups = json::array();
    for (const auto& g : frame.report.groups) groups.push_back(g);
    json out{{"frame", frame.report.frame},
             {"mode", to_string(frame.active_mode)},
             {"detections", detections},
             {"averaged_positions", positions},
             {"breach_pairs", pairs},
             {"groups", groups}};
    if (frame.report.target) {
        out["target"] = {frame.report.target->x, frame.report.target->y};
    } else {
        out["target"] = nullptr;
    }
    return out;
}

}  // namespace covy
