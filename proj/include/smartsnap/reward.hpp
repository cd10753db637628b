#pragma once

#include "smartsnap/trajectory.hpp"
#include "smartsnap/verifier.hpp"

namespace smartsnap {

struct RewardConfig {
  double r_format_penalty = -1.0;
  double r_validity = 0.2;
  double r_complete = 0.8;
  double lambda_concise = 0.05;
  // Exhibits allowed before the conciseness penalty starts.
  int concise_threshold = 3;

  // Throws ConfigError on negative validity/complete/lambda or threshold.
  void validate() const;
};

struct RewardBreakdown {
  double format = 0.0;
  double validity = 0.0;
  double complete = 0.0;
  double concise = 0.0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

// A failed format check yields only the penalty. Otherwise validity and
// completion bonuses are added, and credited submissions pay
// lambda per exhibit beyond the threshold. The penalty never exceeds the
// credit it is charged against, so a submission never scores below zero.
RewardBreakdown compute_reward(const RewardConfig& cfg, const FormatReport& fmt, const Verdict& verdict,
                               int evidence_count);

}  // namespace smartsnap
