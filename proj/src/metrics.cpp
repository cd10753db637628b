#include "smartsnap/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace smartsnap {

namespace {

struct Acc {
  int n = 0;
  int success = 0;
  double sub = 0.0;
  double rrr = 0.0;
  int rrr_n = 0;
  int exec = 0;
  int mutating = 0;
  double evidence = 0.0;
  double turns = 0.0;

  MetricsRow row() const {
    MetricsRow r;
    r.n = n;
    if (n == 0) return r;
    r.sr = 100.0 * success / n;
    r.sub_sr = 100.0 * sub / n;
    r.rrr_n = rrr_n;
    r.rrr = rrr_n > 0 ? rrr / rrr_n : 0.0;
    r.exec_actions = exec;
    r.ror = exec > 0 ? 100.0 * mutating / exec : 0.0;
    r.mean_evidence = evidence / n;
    r.mean_turns = turns / n;
    return r;
  }
};

nlohmann::ordered_json row_json(const MetricsRow& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["sr"] = r.sr;
  j["sub_sr"] = r.sub_sr;
  j["rrr"] = r.rrr;
  j["rrr_n"] = r.rrr_n;
  j["ror"] = r.ror;
  j["exec_actions"] = r.exec_actions;
  j["mean_evidence"] = r.mean_evidence;
  j["mean_turns"] = r.mean_turns;
  return j;
}

}  // namespace

MetricsTable compute_metrics(const std::vector<LogRecord>& records, const TaskSuite& suite) {
  std::map<std::string, Acc> apps;
  Acc all;
  for (const auto& rec : records) {
    if (!rec.score) throw InvalidArgument("record for " + rec.traj.task_id + " has not been scored");
    const TaskSpec* task = suite.try_find(rec.traj.task_id);
    if (task == nullptr) throw InvalidArgument("unknown task id " + rec.traj.task_id);
    const auto checks = ground_truth_check(rec.traj.final_world, *task);
    const double sub = checks.empty()
                           ? 1.0
                           : static_cast<double>(std::count_if(checks.begin(), checks.end(),
                                                               [](const auto& c) { return c.second; })) /
                                 static_cast<double>(checks.size());
    const bool success = rec.score->verdict.outcome == Outcome::kSuccess;
    const int exec = rec.traj.exec_action_count();
    for (Acc* a : {&apps[task->app], &all}) {
      ++a->n;
      a->sub += sub;
      a->exec += exec;
      a->mutating += rec.traj.mutating_action_count();
      a->evidence += rec.score->evidence_count;
      a->turns += static_cast<double>(rec.traj.rounds.size());
      if (success) {
        ++a->success;
        ++a->rrr_n;
        const double ratio = exec > 0 ? 100.0 * task->solution_exec_steps() / exec : kRrrCap;
        a->rrr += std::min(ratio, kRrrCap);
      }
    }
  }
  MetricsTable t;
  for (const auto& [app, acc] : apps) t.per_app[app] = acc.row();
  t.overall = all.row();
  return t;
}

nlohmann::ordered_json metrics_to_json(const MetricsTable& t) {
  nlohmann::ordered_json j;
  j["overall"] = row_json(t.overall);
  j["per_app"] = nlohmann::ordered_json::object();
  for (const auto& [app, row] : t.per_app) j["per_app"][app] = row_json(row);
  return j;
}

std::string format_metrics(const MetricsTable& t) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %5s %7s %7s %7s %7s %7s %7s\n", "app", "n", "SR", "Sub-SR", "RRR", "ROR",
                "evid", "turns");
  out += buf;
  auto line = [&](const std::string& name, const MetricsRow& r) {
    std::snprintf(buf, sizeof buf, "%-10s %5d %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n", name.c_str(), r.n, r.sr,
                  r.sub_sr, r.rrr, r.ror, r.mean_evidence, r.mean_turns);
    out += buf;
  };
  for (const auto& [app, row] : t.per_app) line(app, row);
  line("overall", t.overall);
  return out;
}

nlohmann::ordered_json step_metrics_to_json(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["mean_reward"] = m.mean_reward;
  j["std_reward"] = m.std_reward;
  j["sr"] = m.sr;
  j["mean_evidence"] = m.mean_evidence;
  j["mean_turns"] = m.mean_turns;
  j["objective"] = m.objective;
  j["grad_norm"] = m.grad_norm;
  j["trajectories"] = m.trajectories;
  return j;
}

StepMetrics step_metrics_from_json(const nlohmann::json& j) {
  try {
    StepMetrics m;
    m.step = j.at("step").get<int>();
    m.mean_reward = j.at("mean_reward").get<double>();
    m.std_reward = j.at("std_reward").get<double>();
    m.sr = j.at("sr").get<double>();
    m.mean_evidence = j.at("mean_evidence").get<double>();
    m.mean_turns = j.at("mean_turns").get<double>();
    m.objective = j.at("objective").get<double>();
    m.grad_norm = j.at("grad_norm").get<double>();
    m.trajectories = j.at("trajectories").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed metrics record: ") + e.what());
  }
}

void export_series(const std::vector<StepMetrics>& steps, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, double StepMetrics::*> series[] = {
      {"mean_reward", &StepMetrics::mean_reward}, {"std_reward", &StepMetrics::std_reward},
      {"sr", &StepMetrics::sr},                   {"mean_evidence", &StepMetrics::mean_evidence},
      {"mean_turns", &StepMetrics::mean_turns},   {"objective", &StepMetrics::objective},
  };
  for (const auto& [name, field] : series) {
    std::ofstream out(std::filesystem::path(dir) / (std::string(name) + ".tsv"));
    if (!out) throw ConfigError("cannot write series " + std::string(name) + " under " + dir);
    out << "step\t" << name << '\n';
    for (const auto& s : steps) out << s.step << '\t' << nlohmann::json(s.*field).dump() << '\n';
  }
}

}  // namespace smartsnap
