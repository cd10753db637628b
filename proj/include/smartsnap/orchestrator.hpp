#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smartsnap/config.hpp"
#include "smartsnap/grpo.hpp"
#include "smartsnap/log.hpp"
#include "smartsnap/metrics.hpp"
#include "smartsnap/policy.hpp"
#include "smartsnap/task.hpp"

namespace smartsnap {

// splitmix64-style combination used for every derived seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t string_seed(std::string_view s);

inline constexpr const char* kSubmitResponse = "submission received";

struct RolloutResult {
  Trajectory traj;
  std::vector<Decision> decisions;  // toy policy only
  double logprob = 0.0;             // sum of decision log-probabilities
};

// Reset, record the implicit get_current_xml round, then act until a submit
// or until max_turns rounds (format errors count as turns) are used up.
RolloutResult rollout(const TaskSpec& task, Policy& policy, int max_turns, std::uint64_t seed);

// Judge guidance from cfg.judge_prompt ("builtin" keeps the shipped prompt).
JudgeConfig resolved_judge_config(const RunConfig& cfg);

// validate_submit, curate_format, verify, compute_reward. A trajectory without
// a submit skips verification. judge may be null for the oracle verifier.
ScoreRecord score(const Trajectory& traj, const TaskSpec& task, const RunConfig& cfg, ChatClient* judge);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Runs fn(0..n-1) on up to `parallelism` threads; the first exception is rethrown.
void parallel_for(int n, int parallelism, const std::function<void(int)>& fn);

struct EvalResult {
  MetricsTable table;
  std::vector<LogRecord> records;  // task-major, then seed
};

EvalResult evaluate(const std::vector<const TaskSpec*>& tasks, const PolicyFactory& make_policy,
                    const RunConfig& cfg, const TaskSuite& suite, ChatClient* judge);
EvalResult evaluate_toy(const PolicyParams& params, const RunConfig& cfg, const TaskSuite& suite, ChatClient* judge);

struct TrainHooks {
  std::function<void(const StepMetrics&)> on_step;
  std::function<void(const LogRecord&)> on_record;
  std::function<void(int step, const PolicyParams&)> on_checkpoint;
};

struct TrainingReport {
  std::vector<StepMetrics> steps;
  PolicyParams initial;
  PolicyParams final_params;
  std::optional<EvalResult> initial_eval;
  std::optional<EvalResult> final_eval;
};

// GRPO on the toy policy. Throws ConfigError for non-toy policies.
TrainingReport train(const RunConfig& cfg, const TaskSuite& suite, PolicyParams init, ChatClient* judge,
                     const TrainHooks& hooks = {});

nlohmann::ordered_json checkpoint_to_json(const PolicyParams& p, const RunConfig& cfg, int step);
void save_checkpoint(const std::string& path, const PolicyParams& p, const RunConfig& cfg, int step);
// Throws ConfigError for unreadable files or a feature-version mismatch.
PolicyParams load_checkpoint(const std::string& path);

}  // namespace smartsnap
