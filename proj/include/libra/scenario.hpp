#pragma once

#include "libra/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace libra {

enum class TaskKind { Flow, FindChords, ClassifyOrbit, ReturnMap, CheckReversibility, LinsysCheck, MatrixLab };
std::string to_string(TaskKind k);

struct SystemSpec {
  std::string kind;
  std::map<std::string, double> params;
};

struct TaskSpec {
  std::string id;  ///< prefix of the item's artifacts
  TaskKind kind = TaskKind::Flow;
  std::optional<SystemSpec> system;  ///< absent for LinsysCheck and MatrixLab
  nlohmann::json options;            ///< task keys other than task, id and system
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  Tolerances tol;
  std::string output_dir = "out";
  std::vector<TaskSpec> tasks;
  nlohmann::json source;  ///< the parsed document, echoed into the run summary
};

/// Parses and validates a scenario document. Every problem found is listed in the
/// message of one ConfigError: unknown keys, wrong types, missing required fields,
/// non-positive tolerances, unknown systems or parameters and an empty task list.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

enum class ItemStatus { Ok, Inconclusive, Error };
std::string to_string(ItemStatus s);

/// One judged quantity. Informational rows still carry the tolerance that governs them.
struct ReportRow {
  std::string quantity;
  double value = 0.0;
  double tol = 0.0;
  std::string verdict;  ///< pass, fail or info
};

struct ItemResult {
  std::string id;
  TaskKind kind = TaskKind::Flow;
  ItemStatus status = ItemStatus::Ok;
  std::string message;
  std::vector<ReportRow> rows;
  std::vector<std::string> artifacts;  ///< file names relative to the output directory
};

struct RunReport {
  std::string scenario;
  std::vector<ItemResult> items;
  double wall_clock_seconds = 0.0;
  std::string version;
  int exit_code() const;  ///< 1 on any error, else 2 on any inconclusive item, else 0
};

enum class PlotMode { None, Svg };

struct RunOptions {
  std::filesystem::path out_dir;
  int jobs = 1;
  PlotMode plots = PlotMode::None;
};

/// Runs every task on a pool of `jobs` workers; each item writes only its own files.
/// Writes report.csv (ordered by task index) and run.json (scenario echo, wall clock,
/// version) into the output directory. Item failures are recorded, not thrown.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& opt);

/// Per-item seed derived from the scenario seed and the task index, so results do not
/// depend on the number of workers.
std::uint64_t item_seed(std::uint64_t seed, std::size_t index);

/// Catalog of built-in systems as structured text.
nlohmann::json builtin_catalog();

extern const char* const kVersion;

}  // namespace libra
