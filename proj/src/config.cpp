#include "smartsnap/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "smartsnap/assets.hpp"

namespace smartsnap {

namespace {

struct Entry {
  const char* key;
  const char* help;
  std::function<nlohmann::json(const RunConfig&)> get;
  std::function<void(RunConfig&, const nlohmann::json&)> set;
};

template <class T>
Entry field(const char* key, const char* help, T RunConfig::*member) {
  return {key, help, [member](const RunConfig& c) { return nlohmann::json(c.*member); },
          [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); }};
}

template <class Sub, class T>
Entry nested(const char* key, const char* help, Sub RunConfig::*sub, T Sub::*member) {
  return {key, help, [sub, member](const RunConfig& c) { return nlohmann::json(c.*sub.*member); },
          [sub, member](RunConfig& c, const nlohmann::json& v) { c.*sub.*member = v.get<T>(); }};
}

template <class T>
Entry remote(const char* key, const char* help, T LlmPolicyConfig::*member) {
  return {key, help, [member](const RunConfig& c) { return nlohmann::json(c.policy.remote.*member); },
          [member](RunConfig& c, const nlohmann::json& v) { c.policy.remote.*member = v.get<T>(); }};
}

template <class T>
Entry remote_endpoint(const char* key, const char* help, T EndpointConfig::*member) {
  return {key, help, [member](const RunConfig& c) { return nlohmann::json(c.policy.remote.endpoint.*member); },
          [member](RunConfig& c, const nlohmann::json& v) { c.policy.remote.endpoint.*member = v.get<T>(); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> kEntries = {
      field("task_suite", "task suite file, or \"builtin\"", &RunConfig::task_suite),
      field("verifier", "oracle | judge", &RunConfig::verifier),
      field("max_turns", "rounds per episode including the initial observation", &RunConfig::max_turns),
      field("truncation_is_format_error", "score episodes without a submit with the format penalty",
            &RunConfig::truncation_is_format_error),
      field("parallelism", "concurrent rollouts", &RunConfig::parallelism),
      field("total_steps", "training steps", &RunConfig::total_steps),
      field("checkpoint_every", "write a checkpoint every K steps (0 disables)", &RunConfig::checkpoint_every),
      field("seed", "master seed", &RunConfig::seed),
      field("eval_seeds", "seeds used by evaluation, one rollout per task per seed", &RunConfig::eval_seeds),
      field("eval_after_train", "evaluate the initial and final policy around training",
            &RunConfig::eval_after_train),
      field("output_dir", "directory for logs and checkpoints", &RunConfig::output_dir),
      nested("policy.kind", "toy | scripted | remote", &RunConfig::policy, &PolicyConfig::kind),
      nested("policy.temperature", "sampling temperature during training rollouts", &RunConfig::policy,
             &PolicyConfig::temperature),
      nested("policy.eval_temperature", "sampling temperature during evaluation", &RunConfig::policy,
             &PolicyConfig::eval_temperature),
      nested("policy.checkpoint", "initial toy weights (empty: all zeros)", &RunConfig::policy,
             &PolicyConfig::checkpoint),
      remote_endpoint("policy.remote.endpoint", "chat-completion URL of the remote policy", &EndpointConfig::url),
      remote_endpoint("policy.remote.api_key_env", "environment variable holding the policy API key",
                      &EndpointConfig::api_key_env),
      remote_endpoint("policy.remote.timeout_seconds", "request timeout", &EndpointConfig::timeout_seconds),
      remote_endpoint("policy.remote.max_retries", "retries on transport errors", &EndpointConfig::max_retries),
      remote_endpoint("policy.remote.max_in_flight", "concurrent requests", &EndpointConfig::max_in_flight),
      remote("policy.remote.model", "model name", &LlmPolicyConfig::model),
      remote("policy.remote.temperature", "sampling temperature", &LlmPolicyConfig::temperature),
      remote("policy.remote.max_tokens", "completion token limit", &LlmPolicyConfig::max_tokens),
      remote("policy.remote.context_budget_tokens", "transcript budget, estimated as characters / 4",
             &LlmPolicyConfig::context_budget_tokens),
      nested("reward.r_format_penalty", "reward for malformed or missing submissions", &RunConfig::reward,
             &RewardConfig::r_format_penalty),
      nested("reward.r_validity", "bonus for valid evidence", &RunConfig::reward, &RewardConfig::r_validity),
      nested("reward.r_complete", "bonus for a SUCCESS verdict", &RunConfig::reward, &RewardConfig::r_complete),
      nested("reward.lambda_concise", "penalty per exhibit beyond the threshold", &RunConfig::reward,
             &RewardConfig::lambda_concise),
      nested("reward.concise_threshold", "exhibits allowed without penalty", &RunConfig::reward,
             &RewardConfig::concise_threshold),
      nested("submit.max_evidences", "largest accepted evidence set (0 disables the check)", &RunConfig::submit,
             &SubmitRules::max_evidences),
      nested("grpo.group_size", "rollouts per task per step", &RunConfig::grpo, &GrpoConfig::group_size),
      nested("grpo.clip_epsilon", "ratio clip range", &RunConfig::grpo, &GrpoConfig::clip_epsilon),
      nested("grpo.kl_beta", "KL coefficient (only 0 is supported)", &RunConfig::grpo, &GrpoConfig::kl_beta),
      nested("grpo.learning_rate", "gradient-ascent step size for the toy policy", &RunConfig::grpo,
             &GrpoConfig::learning_rate),
      nested("grpo.std_epsilon", "added to the group reward std", &RunConfig::grpo, &GrpoConfig::std_epsilon),
      nested("grpo.train_batch_tasks", "tasks sampled per step (with replacement)", &RunConfig::grpo,
             &GrpoConfig::train_batch_tasks),
      field("judge_prompt", "judge guidance prompt file, or \"builtin\"", &RunConfig::judge_prompt),
      nested("judge.endpoint", "chat-completion URL of the judge", &RunConfig::judge, &JudgeConfig::endpoint),
      nested("judge.model", "judge model name", &RunConfig::judge, &JudgeConfig::model),
      nested("judge.api_key_env", "environment variable holding the judge API key", &RunConfig::judge,
             &JudgeConfig::api_key_env),
      nested("judge.votes", "independent judge calls per verdict", &RunConfig::judge, &JudgeConfig::votes),
      nested("judge.pass_threshold", "SUCCESS votes needed", &RunConfig::judge, &JudgeConfig::pass_threshold),
      nested("judge.temperature", "judge sampling temperature", &RunConfig::judge, &JudgeConfig::temperature),
      nested("judge.max_tokens", "judge completion token limit", &RunConfig::judge, &JudgeConfig::max_tokens),
      nested("judge.max_retries", "retries on transport errors", &RunConfig::judge, &JudgeConfig::max_retries),
      nested("judge.max_in_flight", "concurrent judge requests", &RunConfig::judge, &JudgeConfig::max_in_flight),
      nested("judge.timeout_seconds", "request timeout", &RunConfig::judge, &JudgeConfig::timeout_seconds),
  };
  return kEntries;
}

const Entry& entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (key == e.key) return e;
  }
  throw ConfigError("unknown config key " + key);
}

void set_key(RunConfig& cfg, const std::string& key, const nlohmann::json& value) {
  try {
    entry(key).set(cfg, value);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key " + key + " cannot take the value " + value.dump());
  }
}

void flatten(const nlohmann::json& j, const std::string& prefix, RunConfig& cfg) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    const bool is_leaf_key = [&] {
      for (const auto& e : entries()) {
        if (key == e.key) return true;
      }
      return false;
    }();
    if (!is_leaf_key && v.is_object()) {
      flatten(v, key, cfg);
    } else {
      set_key(cfg, key, v);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (policy.kind != "toy" && policy.kind != "scripted" && policy.kind != "remote") {
    throw ConfigError("policy.kind must be toy, scripted or remote");
  }
  if (verifier != "oracle" && verifier != "judge") throw ConfigError("verifier must be oracle or judge");
  if (!(policy.temperature > 0.0) || !(policy.eval_temperature > 0.0)) {
    throw ConfigError("policy temperatures must be > 0");
  }
  if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (submit.max_evidences < 0) throw ConfigError("submit.max_evidences must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  reward.validate();
  grpo.validate();
  judge.validate();
}

std::vector<ConfigKey> config_schema() {
  const RunConfig d = default_run_config();
  std::vector<ConfigKey> out;
  for (const auto& e : entries()) out.push_back({e.key, e.help, e.get(d)});
  return out;
}

std::string config_help() {
  std::ostringstream os;
  os << "Configuration keys (override with --set key=value):\n";
  for (const auto& k : config_schema()) {
    os << "  " << k.key << " = " << k.default_value.dump() << "\n      " << k.help << "\n";
  }
  return os.str();
}

RunConfig default_run_config() {
  RunConfig c;
  c.judge = default_judge_config();
  auto shipped = nlohmann::json::parse(asset("default_config.json"));
  flatten(shipped, "", c);
  return c;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& e : entries()) j[e.key] = nlohmann::ordered_json::parse(e.get(cfg).dump());
  return j;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  flatten(j, "", base);
  return base;
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg = default_run_config();
  if (!path.empty() && path != "default") {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    cfg = config_from_json(j, std::move(cfg));
  }
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  auto value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  try {
    set_key(cfg, key, value);
  } catch (const ConfigError&) {
    // "--set judge.model=123" should still be able to mean the string "123".
    if (value.is_string()) throw;
    set_key(cfg, key, nlohmann::json(text));
  }
}

std::uint64_t config_hash(const RunConfig& cfg) {
  auto j = config_to_json(cfg);
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace smartsnap
