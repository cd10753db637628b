#include "smartsnap/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "smartsnap/error.hpp"

namespace smartsnap {

void GrpoConfig::validate() const {
  if (group_size < 2) throw ConfigError("grpo.group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("grpo.clip_epsilon must be in (0, 1)");
  if (!(std_epsilon > 0.0)) throw ConfigError("grpo.std_epsilon must be > 0");
  if (!(learning_rate >= 0.0)) throw ConfigError("grpo.learning_rate must be >= 0");
  if (train_batch_tasks < 1) throw ConfigError("grpo.train_batch_tasks must be >= 1");
  if (kl_beta != 0.0) throw ConfigError("grpo.kl_beta != 0 is not implemented");
}

std::vector<double> compute_advantages(const std::vector<double>& rewards, double std_epsilon) {
  if (rewards.size() < 2) throw InvalidArgument("advantages need at least two rewards");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> adv(rewards.size(), 0.0);
  const bool all_equal = std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
  if (all_equal) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / (sd + std_epsilon);
  return adv;
}

double clipped_term(double ratio, double advantage, double epsilon) {
  if (!(ratio > 0.0)) throw InvalidArgument("probability ratio must be positive");
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

// d clipped_term / d ratio.
double clipped_slope(double ratio, double advantage, double epsilon) {
  if (advantage > 0.0 && ratio > 1.0 + epsilon) return 0.0;
  if (advantage < 0.0 && ratio < 1.0 - epsilon) return 0.0;
  return advantage;
}

void check_group(const ScoredGroup& g, std::size_t n_new) {
  const std::size_t n = g.advantages.size();
  if (g.old_logprobs.size() != n || n_new != n) {
    throw InvalidArgument("group " + g.task_id + ": advantage, old and new log-probability counts differ");
  }
  if (n == 0) throw InvalidArgument("group " + g.task_id + " is empty");
}

}  // namespace

double group_objective(const ScoredGroup& group, const std::vector<double>& new_logprobs, const GrpoConfig& cfg) {
  if (cfg.kl_beta != 0.0) throw ConfigError("grpo.kl_beta != 0 is not implemented");
  check_group(group, new_logprobs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < new_logprobs.size(); ++i) {
    const double ratio = std::exp(new_logprobs[i] - group.old_logprobs[i]);
    acc += clipped_term(ratio, group.advantages[i], cfg.clip_epsilon);
  }
  return acc / static_cast<double>(new_logprobs.size());
}

double trajectory_logprob(const PolicyParams& params, const std::vector<Decision>& decisions) {
  double lp = 0.0;
  for (const auto& d : decisions) lp += decision_logprob(params, d);
  return lp;
}

double batch_objective(const PolicyParams& params, const std::vector<ScoredGroup>& batch, const GrpoConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("batch is empty");
  double acc = 0.0;
  for (const auto& g : batch) {
    if (g.decisions.size() != g.advantages.size()) throw InvalidArgument("group " + g.task_id + " lacks decisions");
    std::vector<double> lp;
    lp.reserve(g.decisions.size());
    for (const auto& ds : g.decisions) lp.push_back(trajectory_logprob(params, ds));
    acc += group_objective(g, lp, cfg);
  }
  return acc / static_cast<double>(batch.size());
}

std::vector<double> batch_objective_gradient(const PolicyParams& params, const std::vector<ScoredGroup>& batch,
                                             const GrpoConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("batch is empty");
  if (cfg.kl_beta != 0.0) throw ConfigError("grpo.kl_beta != 0 is not implemented");
  std::vector<double> grad(params.weights.size(), 0.0);
  for (const auto& g : batch) {
    if (g.decisions.size() != g.advantages.size()) throw InvalidArgument("group " + g.task_id + " lacks decisions");
    check_group(g, g.decisions.size());
    const double per = 1.0 / (static_cast<double>(g.decisions.size()) * static_cast<double>(batch.size()));
    for (std::size_t i = 0; i < g.decisions.size(); ++i) {
      if (g.advantages[i] == 0.0) continue;
      const double ratio = std::exp(trajectory_logprob(params, g.decisions[i]) - g.old_logprobs[i]);
      // d/dw f(r) = f'(r) * r * d/dw log pi(tau)
      const double scale = per * clipped_slope(ratio, g.advantages[i], cfg.clip_epsilon) * ratio;
      if (scale == 0.0) continue;
      for (const auto& d : g.decisions[i]) accumulate_logprob_gradient(params, d, scale, grad);
    }
  }
  return grad;
}

PolicyParams update_policy(const PolicyParams& params, const std::vector<ScoredGroup>& batch, const GrpoConfig& cfg) {
  auto grad = batch_objective_gradient(params, batch, cfg);
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("policy gradient is not finite");
  }
  PolicyParams next = params;
  for (std::size_t i = 0; i < grad.size(); ++i) next.weights[i] += cfg.learning_rate * grad[i];
  return next;
}

}  // namespace smartsnap
