#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartsnap/grpo.hpp"
#include "smartsnap/policy.hpp"
#include "smartsnap/reward.hpp"
#include "smartsnap/trajectory.hpp"
#include "smartsnap/verifier.hpp"

namespace smartsnap {

struct PolicyConfig {
  std::string kind = "toy";  // toy | scripted | remote
  double temperature = 1.0;
  double eval_temperature = 0.1;
  std::string checkpoint;  // initial toy weights; empty means zeros
  LlmPolicyConfig remote;
};

struct RunConfig {
  std::string task_suite = "builtin";
  PolicyConfig policy;
  std::string verifier = "oracle";  // oracle | judge
  std::string judge_prompt = "builtin";
  RewardConfig reward;
  GrpoConfig grpo;
  SubmitRules submit;
  JudgeConfig judge;
  int max_turns = kDefaultMaxTurns;
  // When false, a trajectory without a submit scores zero instead of the format penalty.
  bool truncation_is_format_error = true;
  int parallelism = 4;
  int total_steps = 180;
  int checkpoint_every = 20;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> eval_seeds{0, 1, 2};
  bool eval_after_train = true;
  std::string output_dir = "runs/default";

  // Throws ConfigError.
  void validate() const;
};

struct ConfigKey {
  std::string key;
  std::string help;
  nlohmann::json default_value;
};

// Every configurable key with its default, in declaration order.
std::vector<ConfigKey> config_schema();
std::string config_help();

RunConfig default_run_config();
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
// Nested or dotted keys; unknown keys raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = default_run_config());
// "default" (or empty) means built-in defaults, otherwise a JSON file.
RunConfig load_config(const std::string& path);
// "grpo.learning_rate=0.05"; the value is parsed as JSON, falling back to a string.
void apply_override(RunConfig& cfg, const std::string& assignment);

// FNV-1a over the canonical config JSON minus output_dir, stored in checkpoints.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace smartsnap
