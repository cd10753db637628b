#pragma once

#include <string>
#include <vector>

#include "smartsnap/policy.hpp"
#include "smartsnap/trajectory.hpp"

namespace smartsnap {

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_beta = 0.0;
  double learning_rate = 0.1;
  double std_epsilon = 1e-6;
  int train_batch_tasks = 8;

  // Throws ConfigError; a nonzero kl_beta is rejected as unimplemented.
  void validate() const;
};

// (R_i - mean) / (population std + std_epsilon); exactly zero when all
// rewards are equal. Throws InvalidArgument for fewer than two rewards.
std::vector<double> compute_advantages(const std::vector<double>& rewards, double std_epsilon);

// min(r * A, clamp(r, 1 - eps, 1 + eps) * A). Throws InvalidArgument for r <= 0.
double clipped_term(double ratio, double advantage, double epsilon);

struct ScoredGroup {
  std::string task_id;
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
  std::vector<double> advantages;
  // Trajectory log-probabilities under the sampling snapshot.
  std::vector<double> old_logprobs;
  // Per-trajectory decision records, needed to re-evaluate log-probabilities.
  std::vector<std::vector<Decision>> decisions;
};

// Mean clipped surrogate over the group with trajectory-level ratios.
double group_objective(const ScoredGroup& group, const std::vector<double>& new_logprobs, const GrpoConfig& cfg);

double trajectory_logprob(const PolicyParams& params, const std::vector<Decision>& decisions);

// Mean of group_objective over the batch, log-probabilities taken under params.
double batch_objective(const PolicyParams& params, const std::vector<ScoredGroup>& batch, const GrpoConfig& cfg);
std::vector<double> batch_objective_gradient(const PolicyParams& params, const std::vector<ScoredGroup>& batch,
                                             const GrpoConfig& cfg);

// One gradient-ascent step on batch_objective. Throws InvalidArgument on an
// empty batch and NumericError when the gradient is not finite.
PolicyParams update_policy(const PolicyParams& params, const std::vector<ScoredGroup>& batch, const GrpoConfig& cfg);

}  // namespace smartsnap
