// smartsnap: rollouts, training, evaluation and log inspection.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "smartsnap/config.hpp"
#include "smartsnap/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace smartsnap;

namespace {

struct Common {
  std::string config = "default";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_config(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

std::unique_ptr<ChatClient> judge_client(const RunConfig& cfg) {
  if (cfg.verifier != "judge") return nullptr;
  return std::make_unique<HttpChatClient>(resolved_judge_config(cfg).endpoint_config());
}

PolicyParams initial_params(const RunConfig& cfg) {
  return cfg.policy.checkpoint.empty() ? PolicyParams::zeros() : load_checkpoint(cfg.policy.checkpoint);
}

PolicyFactory policy_factory(const RunConfig& cfg, double temperature) {
  if (cfg.policy.kind == "scripted") return [] { return std::make_unique<ScriptedPolicy>(); };
  if (cfg.policy.kind == "remote") {
    auto client = std::make_shared<HttpChatClient>(cfg.policy.remote.endpoint);
    auto remote = cfg.policy.remote;
    return [client, remote] { return std::make_unique<LlmPolicy>(client, remote); };
  }
  auto params = initial_params(cfg);
  return [params, temperature] { return std::make_unique<ToyPolicy>(params, temperature); };
}

std::vector<const TaskSpec*> select_tasks(const TaskSuite& suite, const std::vector<std::string>& ids) {
  std::vector<const TaskSpec*> out;
  if (ids.empty()) {
    for (const auto& t : suite.tasks) out.push_back(&t);
  } else {
    for (const auto& id : ids) {
      try {
        out.push_back(&suite.find(id));
      } catch (const InvalidArgument&) {
        throw ConfigError("unknown task '" + id + "'");
      }
    }
  }
  return out;
}

void print_record(const LogRecord& rec, std::ostream& os) {
  const Trajectory& t = rec.traj;
  os << "task " << t.task_id << "  seed " << t.seed << "  rounds " << t.rounds.size()
     << (t.truncated ? "  (truncated)" : "") << "\n";
  for (const auto& r : t.rounds) {
    os << "\n" << tool_call_label(r.round_id) << (r.mutated ? " *" : "") << " " << describe(r.action) << "\n";
    if (r.thought) os << "  thought: " << *r.thought << "\n";
    std::string resp = r.tool_response;
    if (resp.size() > 600) resp = resp.substr(0, 600) + "...\n";
    os << resp;
    if (!resp.empty() && resp.back() != '\n') os << '\n';
  }
  for (const auto& e : t.format_errors) os << "format error: " << e << "\n";
  if (t.terminal) {
    os << "\nsubmit: \"" << t.terminal->message << "\" evidences [";
    for (std::size_t i = 0; i < t.terminal->evidences.size(); ++i) {
      os << (i ? ", " : "") << t.terminal->evidences[i];
    }
    os << "]\n";
  }
  if (rec.score) {
    const auto& s = *rec.score;
    os << "format " << (s.format.ok ? "ok" : "violated");
    for (const auto& v : s.format.violations) os << "; " << v;
    os << "\nverdict (" << s.provenance << "): " << to_string(s.verdict.outcome)
       << ", evidence " << (s.verdict.valid_evidence ? "valid" : "invalid") << "\n";
    if (!s.verdict.reasoning.empty()) os << s.verdict.reasoning << "\n";
    os << "reward " << s.reward.total << " (format " << s.reward.format << ", validity " << s.reward.validity
       << ", complete " << s.reward.complete << ", concise " << s.reward.concise << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smartsnap: self-verifying GUI agent harness"};
  app.require_subcommand(1);
  app.footer(config_help());
  // Global options may also follow the subcommand.
  app.fallthrough();
  Common common;
  app.add_option("-c,--config", common.config, "config file, or \"default\"");
  app.add_option("-s,--set", common.overrides, "override a config key (key=value)");
  app.add_option("--seed", common.seed, "master seed");
  app.add_flag("-v,--verbose", common.verbosity, "more output");

  // CLI11 resets an option's variable when a sibling subcommand binds it too,
  // so every subcommand gets its own.
  std::vector<std::string> rollout_tasks, eval_tasks, replay_tasks;
  int episodes = 1;
  std::string verify_log, replay_log, metrics_in, export_dir, metrics_log, verifier_kind;
  int index = -1;

  auto* rollout_cmd = app.add_subcommand("rollout", "run episodes and write a scored trajectory log");
  rollout_cmd->add_option("-t,--task", rollout_tasks, "task id (repeatable; default: whole suite)");
  rollout_cmd->add_option("-n,--episodes", episodes, "episodes per task")->check(CLI::PositiveNumber);

  auto* train_cmd = app.add_subcommand("train", "GRPO training of the toy policy");
  bool traj_log = false;
  train_cmd->add_flag("--trajectory-log", traj_log, "also log every training trajectory");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy over the task suite");
  eval_cmd->add_option("-t,--task", eval_tasks, "task id (repeatable; default: whole suite)");

  auto* verify_cmd = app.add_subcommand("verify", "re-score a trajectory log and compare verdicts");
  verify_cmd->add_option("-l,--log", verify_log, "trajectory log")->required();
  verify_cmd->add_option("--verifier", verifier_kind, "oracle | judge (default: config)");

  auto* replay_cmd = app.add_subcommand("replay", "pretty-print trajectories from a log");
  replay_cmd->add_option("-l,--log", replay_log, "trajectory log")->required();
  replay_cmd->add_option("-i,--index", index, "record index (default: all)");
  replay_cmd->add_option("-t,--task", replay_tasks, "only records of these tasks");

  auto* metrics_cmd = app.add_subcommand("metrics", "aggregate a trajectory log and export training curves");
  metrics_cmd->add_option("-l,--log", metrics_in, "trajectory log");
  metrics_cmd->add_option("-m,--metrics-log", metrics_log, "training metrics log");
  metrics_cmd->add_option("-e,--export", export_dir, "subdirectory of output_dir for series files");

  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = resolve(common);
    const TaskSuite suite = load_task_suite(cfg.task_suite);

    if (config_cmd->parsed()) {
      std::cout << config_to_json(cfg).dump(2) << "\n";
      return 0;
    }

    if (rollout_cmd->parsed()) {
      auto judge = judge_client(cfg);
      auto make = policy_factory(cfg, cfg.policy.temperature);
      auto tasks = select_tasks(suite, rollout_tasks);
      const std::string path = out_path(cfg, "rollouts.jsonl");
      JsonlWriter log(path, kTrajectoryLogFormat);
      std::vector<LogRecord> records;
      for (const TaskSpec* task : tasks) {
        for (int e = 0; e < episodes; ++e) {
          auto policy = make();
          auto r = rollout(*task, *policy, cfg.max_turns, mix_seed(mix_seed(cfg.seed, string_seed(task->task_id)),
                                                                   static_cast<std::uint64_t>(e)));
          LogRecord rec{std::move(r.traj), std::nullopt};
          rec.score = score(rec.traj, *task, cfg, judge.get());
          log.write(record_to_json(rec));
          if (common.verbosity > 0) {
            std::cerr << task->task_id << " #" << e << ": " << to_string(rec.score->verdict.outcome) << " reward "
                      << rec.score->reward.total << "\n";
          }
          records.push_back(std::move(rec));
        }
      }
      std::cout << format_metrics(compute_metrics(records, suite));
      std::cout << "log: " << path << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      auto judge = judge_client(cfg);
      const std::string run_dir = cfg.output_dir;
      fs::create_directories(run_dir);
      JsonlWriter mlog(out_path(cfg, "metrics.jsonl"), kMetricsLogFormat);
      std::unique_ptr<JsonlWriter> tlog;
      if (traj_log) tlog = std::make_unique<JsonlWriter>(out_path(cfg, "train_trajectories.jsonl"), kTrajectoryLogFormat);
      TrainHooks hooks;
      hooks.on_step = [&](const StepMetrics& m) {
        mlog.write(step_metrics_to_json(m));
        if (common.verbosity > 0) {
          std::fprintf(stderr, "step %4d  reward %+.3f  SR %5.1f%%  evidence %.2f  turns %.1f\n", m.step,
                       m.mean_reward, m.sr, m.mean_evidence, m.mean_turns);
        }
      };
      if (tlog) hooks.on_record = [&](const LogRecord& r) { tlog->write(record_to_json(r)); };
      hooks.on_checkpoint = [&](int step, const PolicyParams& p) {
        save_checkpoint(out_path(cfg, "checkpoint_" + std::to_string(step) + ".json"), p, cfg, step);
      };
      auto report = train(cfg, suite, initial_params(cfg), judge.get(), hooks);
      save_checkpoint(out_path(cfg, "final.json"), report.final_params, cfg, cfg.total_steps);
      if (report.initial_eval && report.final_eval) {
        nlohmann::ordered_json ev;
        ev["initial"] = metrics_to_json(report.initial_eval->table);
        ev["final"] = metrics_to_json(report.final_eval->table);
        std::ofstream(out_path(cfg, "eval.json")) << ev.dump(2) << "\n";
        std::cout << "initial policy\n" << format_metrics(report.initial_eval->table);
        std::cout << "trained policy\n" << format_metrics(report.final_eval->table);
      }
      std::cout << "outputs: " << run_dir << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      auto judge = judge_client(cfg);
      auto result = evaluate(select_tasks(suite, eval_tasks), policy_factory(cfg, cfg.policy.eval_temperature), cfg,
                             suite, judge.get());
      write_trajectory_log(out_path(cfg, "eval_log.jsonl"), result.records);
      std::ofstream(out_path(cfg, "eval.json")) << metrics_to_json(result.table).dump(2) << "\n";
      std::cout << format_metrics(result.table);
      return 0;
    }

    if (verify_cmd->parsed()) {
      if (!verifier_kind.empty()) cfg.verifier = verifier_kind;
      cfg.validate();
      auto judge = judge_client(cfg);
      auto records = read_trajectory_log(verify_log);
      std::map<std::pair<std::string, std::string>, int> confusion;
      int agree = 0, compared = 0;
      JsonlWriter out(out_path(cfg, "verified.jsonl"), kTrajectoryLogFormat);
      for (auto& rec : records) {
        const TaskSpec& task = suite.find(rec.traj.task_id);
        ScoreRecord fresh = score(rec.traj, task, cfg, judge.get());
        if (rec.score) {
          const std::string before(to_string(rec.score->verdict.outcome));
          const std::string after(to_string(fresh.verdict.outcome));
          ++confusion[{before, after}];
          ++compared;
          agree += before == after ? 1 : 0;
          if (before != after) {
            std::cout << "disagreement: " << rec.traj.task_id << " seed " << rec.traj.seed << ": "
                      << rec.score->provenance << " " << before << ", " << fresh.provenance << " " << after << "\n";
          }
        }
        rec.score = fresh;
        out.write(record_to_json(rec));
      }
      std::cout << "agreement report (rows: recorded verdict, columns: " << cfg.verifier << ")\n";
      std::cout << "            SUCCESS  FAILURE\n";
      for (const char* row : {"SUCCESS", "FAILURE"}) {
        std::printf("%-10s %8d %8d\n", row, confusion[{row, "SUCCESS"}], confusion[{row, "FAILURE"}]);
      }
      if (compared > 0) std::printf("agreement %d/%d (%.1f%%)\n", agree, compared, 100.0 * agree / compared);
      return 0;
    }

    if (replay_cmd->parsed()) {
      auto records = read_trajectory_log(replay_log);
      if (index >= static_cast<int>(records.size())) throw ConfigError("record index out of range");
      for (int i = 0; i < static_cast<int>(records.size()); ++i) {
        if (index >= 0 && i != index) continue;
        const auto& rec = records[static_cast<std::size_t>(i)];
        if (!replay_tasks.empty() && std::find(replay_tasks.begin(), replay_tasks.end(), rec.traj.task_id) == replay_tasks.end()) {
          continue;
        }
        std::cout << "==== record " << i << " ====\n";
        print_record(rec, std::cout);
      }
      return 0;
    }

    if (metrics_cmd->parsed()) {
      if (metrics_in.empty() && metrics_log.empty()) throw ConfigError("metrics needs --log and/or --metrics-log");
      nlohmann::ordered_json summary;
      if (!metrics_in.empty()) {
        auto table = compute_metrics(read_trajectory_log(metrics_in), suite);
        std::cout << format_metrics(table);
        summary["table"] = metrics_to_json(table);
      }
      if (!metrics_log.empty()) {
        std::vector<StepMetrics> steps;
        for (const auto& j : read_jsonl(metrics_log, kMetricsLogFormat)) steps.push_back(step_metrics_from_json(j));
        std::cout << steps.size() << " training steps\n";
        if (!export_dir.empty()) {
          const fs::path rel(export_dir);
          if (rel.is_absolute() || rel.lexically_normal().string().rfind("..", 0) == 0) {
            throw ConfigError("--export must be a path inside output_dir");
          }
          const std::string dir = out_path(cfg, export_dir);
          export_series(steps, dir);
          std::cout << "series written to " << dir << "\n";
        }
      }
      if (!export_dir.empty() && summary.contains("table")) {
        std::ofstream(out_path(cfg, (fs::path(export_dir) / "table.json").string())) << summary.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
