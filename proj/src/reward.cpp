#include "smartsnap/reward.hpp"

#include <algorithm>

namespace smartsnap {

void RewardConfig::validate() const {
  if (r_validity < 0 || r_complete < 0) throw ConfigError("reward.r_validity and reward.r_complete must be >= 0");
  if (lambda_concise < 0) throw ConfigError("reward.lambda_concise must be >= 0");
  if (concise_threshold < 0) throw ConfigError("reward.concise_threshold must be >= 0");
}

RewardBreakdown compute_reward(const RewardConfig& cfg, const FormatReport& fmt, const Verdict& verdict,
                               int evidence_count) {
  if (evidence_count < 0) throw InvalidArgument("evidence_count must be >= 0");
  RewardBreakdown b;
  if (!fmt.ok) {
    b.format = cfg.r_format_penalty;
    b.total = b.format;
    return b;
  }
  const bool success = verdict.outcome == Outcome::kSuccess;
  b.validity = verdict.valid_evidence ? cfg.r_validity : 0.0;
  b.complete = success ? cfg.r_complete : 0.0;
  if (success || verdict.valid_evidence) {
    const int excess = std::max(0, evidence_count - cfg.concise_threshold);
    const double penalty = cfg.lambda_concise * excess;
    b.concise = 0.0 - std::min(penalty, b.validity + b.complete);
  }
  b.total = b.format + b.validity + b.complete + b.concise;
  return b;
}

}  // namespace smartsnap
