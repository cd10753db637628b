#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartsnap/log.hpp"
#include "smartsnap/task.hpp"

namespace smartsnap {

inline constexpr double kRrrCap = 200.0;

// Percentages for sr, sub_sr, rrr, ror; plain means for the rest.
struct MetricsRow {
  int n = 0;
  double sr = 0.0;
  double sub_sr = 0.0;
  double rrr = 0.0;
  int rrr_n = 0;  // successful records contributing to rrr
  double ror = 0.0;
  int exec_actions = 0;  // world-acting calls contributing to ror
  double mean_evidence = 0.0;
  double mean_turns = 0.0;
};

struct MetricsTable {
  std::map<std::string, MetricsRow> per_app;
  MetricsRow overall;
};

// SR: share of records judged SUCCESS. Sub-SR: mean satisfied-subgoal share
// on the final world. RRR: over successes, 100 * reference steps / agent
// steps, capped. ROR: share of world-acting calls that changed the state.
// Throws InvalidArgument for unscored records or unknown task ids.
MetricsTable compute_metrics(const std::vector<LogRecord>& records, const TaskSuite& suite);

nlohmann::ordered_json metrics_to_json(const MetricsTable& t);
std::string format_metrics(const MetricsTable& t);

// One step of a training run as written to the metrics log.
struct StepMetrics {
  int step = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double sr = 0.0;  // percent
  double mean_evidence = 0.0;
  double mean_turns = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int trajectories = 0;
};

nlohmann::ordered_json step_metrics_to_json(const StepMetrics& m);
StepMetrics step_metrics_from_json(const nlohmann::json& j);

// Writes <dir>/<name>.tsv files ("step\tvalue") for every per-step series.
void export_series(const std::vector<StepMetrics>& steps, const std::string& dir);

}  // namespace smartsnap
