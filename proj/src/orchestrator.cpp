#include "smartsnap/orchestrator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace smartsnap {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t string_seed(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RolloutResult rollout(const TaskSpec& task, Policy& policy, int max_turns, std::uint64_t seed) {
  if (max_turns < 1) throw InvalidArgument("max_turns must be >= 1");
  RolloutResult out;
  Trajectory& t = out.traj;
  t.task_id = task.task_id;
  t.seed = seed;
  t.max_turns = max_turns;
  World world;
  Observation obs = world.reset(task);
  t.record(act::GetCurrentXml{}, obs.xml);
  while (!t.closed()) {
    if (static_cast<int>(t.rounds.size() + t.format_errors.size()) >= max_turns) {
      t.truncated = true;
      break;
    }
    PolicyStep ps = policy.act(obs, t, task, mix_seed(seed, t.rounds.size() + t.format_errors.size()));
    if (ps.decision) {
      out.logprob += ps.decision->logprob;
      out.decisions.push_back(std::move(*ps.decision));
    }
    if (!ps.action) {
      t.format_errors.push_back(ps.format_error.empty() ? "unparsable tool call" : ps.format_error);
      continue;
    }
    if (is_submit(*ps.action)) {
      t.record(*ps.action, kSubmitResponse, ps.thought, false);
      break;
    }
    StepResult r = world.step(*ps.action);
    t.record(*ps.action, r.tool_response, ps.thought, r.mutated);
    obs = std::move(r.observation);
  }
  t.final_world = world.state();
  return out;
}

JudgeConfig resolved_judge_config(const RunConfig& cfg) {
  JudgeConfig j = cfg.judge;
  if (!cfg.judge_prompt.empty() && cfg.judge_prompt != "builtin") {
    std::ifstream in(cfg.judge_prompt);
    if (!in) throw ConfigError("judge prompt not found: " + cfg.judge_prompt);
    std::ostringstream ss;
    ss << in.rdbuf();
    j.guidance_prompt = ss.str();
  } else if (j.guidance_prompt.empty()) {
    j.guidance_prompt = default_judge_config().guidance_prompt;
  }
  return j;
}

ScoreRecord score(const Trajectory& traj, const TaskSpec& task, const RunConfig& cfg, ChatClient* judge) {
  ScoreRecord s;
  s.provenance = cfg.verifier;
  if (!traj.terminal) {
    s.format.ok = false;
    s.format.violations.push_back(traj.truncated ? "no submit within " + std::to_string(traj.max_turns) + " turns"
                                                 : "no submit");
    s.verdict.reasoning = "not verified: the episode ended without a submission";
    if (cfg.truncation_is_format_error) s.reward = compute_reward(cfg.reward, s.format, s.verdict, 0);
    return s;
  }
  const act::Submit& sub = *traj.terminal;
  s.evidence_count = static_cast<int>(sub.evidences.size());
  s.format = validate_submit(traj, sub, cfg.submit);
  if (!s.format.ok) {
    s.verdict.reasoning = "not verified: malformed submission";
  } else {
    const EvidenceSet e{sub.evidences};
    if (cfg.verifier == "judge") {
      if (judge == nullptr) throw ConfigError("judge verifier selected but no judge client is configured");
      auto res = judge_verify(*judge, resolved_judge_config(cfg), task.instruction, sub.message,
                              curate_format(traj, e));
      s.verdict = res.verdict;
      s.votes = VoteSummary{static_cast<int>(res.tally.votes.size()), res.tally.success_votes,
                            res.tally.valid_votes, res.tally.flagged_votes};
    } else {
      s.verdict = oracle_verify(traj.final_world, task, e, traj);
    }
  }
  s.reward = compute_reward(cfg.reward, s.format, s.verdict, s.evidence_count);
  return s;
}

void parallel_for(int n, int parallelism, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(parallelism, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

EvalResult evaluate(const std::vector<const TaskSpec*>& tasks, const PolicyFactory& make_policy,
                    const RunConfig& cfg, const TaskSuite& suite, ChatClient* judge) {
  EvalResult out;
  const int n_seeds = static_cast<int>(cfg.eval_seeds.size());
  const int n = static_cast<int>(tasks.size()) * n_seeds;
  out.records.resize(static_cast<std::size_t>(n));
  parallel_for(n, cfg.parallelism, [&](int i) {
    const TaskSpec& task = *tasks[static_cast<std::size_t>(i / n_seeds)];
    const std::uint64_t seed = mix_seed(cfg.eval_seeds[static_cast<std::size_t>(i % n_seeds)],
                                        string_seed(task.task_id));
    auto policy = make_policy();
    auto r = rollout(task, *policy, cfg.max_turns, seed);
    LogRecord rec{std::move(r.traj), std::nullopt};
    rec.score = score(rec.traj, task, cfg, judge);
    out.records[static_cast<std::size_t>(i)] = std::move(rec);
  });
  out.table = compute_metrics(out.records, suite);
  return out;
}

EvalResult evaluate_toy(const PolicyParams& params, const RunConfig& cfg, const TaskSuite& suite, ChatClient* judge) {
  std::vector<const TaskSpec*> tasks;
  for (const auto& t : suite.tasks) tasks.push_back(&t);
  const double temp = cfg.policy.eval_temperature;
  return evaluate(tasks, [&] { return std::make_unique<ToyPolicy>(params, temp); }, cfg, suite, judge);
}

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TrainingReport train(const RunConfig& cfg, const TaskSuite& suite, PolicyParams init, ChatClient* judge,
                     const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.policy.kind != "toy") throw ConfigError("only the toy policy can be trained");
  if (suite.tasks.empty()) throw ConfigError("task suite is empty");
  init.validate();
  TrainingReport report;
  report.initial = init;
  if (cfg.eval_after_train) report.initial_eval = evaluate_toy(init, cfg, suite, judge);

  PolicyParams params = std::move(init);
  const int groups = cfg.grpo.train_batch_tasks;
  const int g_size = cfg.grpo.group_size;
  for (int step = 1; step <= cfg.total_steps; ++step) {
    std::mt19937_64 task_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
    std::uniform_int_distribution<std::size_t> pick(0, suite.tasks.size() - 1);
    std::vector<const TaskSpec*> tasks;
    for (int g = 0; g < groups; ++g) tasks.push_back(&suite.tasks[pick(task_rng)]);

    // Every rollout of the step samples from the same parameter snapshot.
    const PolicyParams snapshot = params;
    const int n = groups * g_size;
    std::vector<RolloutResult> results(static_cast<std::size_t>(n));
    std::vector<ScoreRecord> scores(static_cast<std::size_t>(n));
    parallel_for(n, cfg.parallelism, [&](int i) {
      const TaskSpec& task = *tasks[static_cast<std::size_t>(i / g_size)];
      const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)),
                                          static_cast<std::uint64_t>(i));
      ToyPolicy policy(snapshot, cfg.policy.temperature);
      results[static_cast<std::size_t>(i)] = rollout(task, policy, cfg.max_turns, seed);
      scores[static_cast<std::size_t>(i)] = score(results[static_cast<std::size_t>(i)].traj, task, cfg, judge);
    });

    std::vector<ScoredGroup> batch;
    StepMetrics m;
    m.step = step;
    m.trajectories = n;
    std::vector<double> all_rewards;
    int successes = 0;
    for (int g = 0; g < groups; ++g) {
      ScoredGroup sg;
      sg.task_id = tasks[static_cast<std::size_t>(g)]->task_id;
      for (int k = 0; k < g_size; ++k) {
        const auto idx = static_cast<std::size_t>(g * g_size + k);
        sg.rewards.push_back(scores[idx].reward.total);
        sg.old_logprobs.push_back(results[idx].logprob);
        sg.decisions.push_back(std::move(results[idx].decisions));
        all_rewards.push_back(scores[idx].reward.total);
        if (scores[idx].verdict.outcome == Outcome::kSuccess) ++successes;
        m.mean_evidence += scores[idx].evidence_count;
        m.mean_turns += static_cast<double>(results[idx].traj.rounds.size());
        if (hooks.on_record) hooks.on_record(LogRecord{results[idx].traj, scores[idx]});
        sg.trajectories.push_back(std::move(results[idx].traj));
      }
      sg.advantages = compute_advantages(sg.rewards, cfg.grpo.std_epsilon);
      batch.push_back(std::move(sg));
    }
    for (double r : all_rewards) m.mean_reward += r;
    m.mean_reward /= n;
    for (double r : all_rewards) m.std_reward += (r - m.mean_reward) * (r - m.mean_reward);
    m.std_reward = std::sqrt(m.std_reward / n);
    m.sr = 100.0 * successes / n;
    m.mean_evidence /= n;
    m.mean_turns /= n;
    m.objective = batch_objective(params, batch, cfg.grpo);
    m.grad_norm = l2(batch_objective_gradient(params, batch, cfg.grpo));
    params = update_policy(params, batch, cfg.grpo);

    report.steps.push_back(m);
    if (hooks.on_step) hooks.on_step(m);
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 &&
        (step % cfg.checkpoint_every == 0 || step == cfg.total_steps)) {
      hooks.on_checkpoint(step, params);
    }
  }
  report.final_params = params;
  if (cfg.eval_after_train) {
    report.final_eval = cfg.total_steps == 0 ? report.initial_eval : evaluate_toy(params, cfg, suite, judge);
  }
  return report;
}

nlohmann::ordered_json checkpoint_to_json(const PolicyParams& p, const RunConfig& cfg, int step) {
  nlohmann::ordered_json j;
  j["format"] = "smartsnap-checkpoint";
  j["version"] = 1;
  j["feature_version"] = p.feature_version;
  j["config_hash"] = config_hash(cfg);
  j["step"] = step;
  j["features"] = nlohmann::ordered_json::array();
  for (int i = 0; i < kNumFeatures; ++i) j["features"].push_back(std::string(feature_name(i)));
  j["weights"] = p.weights;
  return j;
}

void save_checkpoint(const std::string& path, const PolicyParams& p, const RunConfig& cfg, int step) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path);
  out << checkpoint_to_json(p, cfg, step).dump(2) << '\n';
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint not found: " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "smartsnap-checkpoint") {
    throw ConfigError(path + " is not a checkpoint");
  }
  PolicyParams p;
  try {
    p.feature_version = j.at("feature_version").get<std::string>();
    p.weights = j.at("weights").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

}  // namespace smartsnap
