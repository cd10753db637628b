#pragma once

// Line-delimited trajectory and metrics logs. Each file starts with a header
// line naming its format and version.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartsnap/reward.hpp"
#include "smartsnap/trajectory.hpp"
#include "smartsnap/verifier.hpp"

namespace smartsnap {

inline constexpr int kLogVersion = 1;
inline constexpr const char* kTrajectoryLogFormat = "smartsnap-trajectory-log";
inline constexpr const char* kMetricsLogFormat = "smartsnap-metrics-log";

struct VoteSummary {
  int total = 0;
  int success = 0;
  int valid = 0;
  int flagged = 0;
  bool operator==(const VoteSummary&) const = default;
};

// Outcome of scoring one trajectory.
struct ScoreRecord {
  FormatReport format;
  Verdict verdict;
  std::string provenance;  // "oracle" or "judge"
  std::optional<VoteSummary> votes;
  int evidence_count = 0;
  RewardBreakdown reward;
  bool operator==(const ScoreRecord&) const = default;
};

struct LogRecord {
  Trajectory traj;
  std::optional<ScoreRecord> score;
  bool operator==(const LogRecord&) const = default;
};

nlohmann::ordered_json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);
nlohmann::ordered_json score_to_json(const ScoreRecord& s);
ScoreRecord score_from_json(const nlohmann::json& j);
nlohmann::ordered_json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);

nlohmann::ordered_json log_header(const char* format);

// Appends records to a file opened with a header line.
class JsonlWriter {
 public:
  JsonlWriter(const std::string& path, const char* format);
  void write(const nlohmann::ordered_json& line);

 private:
  std::ofstream out_;
};

// Reads every record line after checking the header. Throws ConfigError for
// missing files, a wrong header or malformed lines.
std::vector<nlohmann::json> read_jsonl(const std::string& path, const char* format);

void write_trajectory_log(const std::string& path, const std::vector<LogRecord>& records);
std::vector<LogRecord> read_trajectory_log(const std::string& path);

}  // namespace smartsnap
