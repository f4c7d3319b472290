#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covy/experiments.hpp"

namespace covy {

enum class ExportFormat { Csv, Json };

ExportFormat parse_export_format(const std::string& name);

/// Floats serialize with 6 significant digits everywhere results leave the
/// process.
std::string format_g6(double v);

/// Generic tabular result: a schema tag, a stable column order and rows of
/// pre-formatted cells. Undefined metrics serialize as "undefined".
struct ResultTable {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

ResultTable to_table(const AleTable& table);
ResultTable to_table(const std::vector<BreachEvalResult>& results);
ResultTable summary_table(const NavStats& stats);
ResultTable episodes_table(const NavStats& stats);
ResultTable to_table(const TrainingLog& log);
ResultTable to_table(const std::vector<CurvePoint>& curve, int window);

/// Writes a table as CSV (schema comment line, header, rows) or JSON
/// (schema field, columns, rows). An empty table produces a header-only
/// file.
void export_result(const ResultTable& table, ExportFormat format, const std::string& path);

/// Reads a table back from the JSON form (for format conversion).
ResultTable import_result_json(const std::string& path);

/// Line-delimited JSON record stream (trajectory, detection and episode
/// trace logs).
class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path);

    void write(const nlohmann::json& record);

private:
    std::ofstream out_;
};

nlohmann::json to_json(const HybridStepRecord& rec);

/// Detection-log record: frame, active mode, detections, breach pairs,
/// groups and target.
nlohmann::json to_json(const VisionFrame& frame);

}  // namespace covy
