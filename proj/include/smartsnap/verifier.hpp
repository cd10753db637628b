#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smartsnap/chat_client.hpp"
#include "smartsnap/error.hpp"
#include "smartsnap/task.hpp"
#include "smartsnap/trajectory.hpp"

namespace smartsnap {

enum class Outcome { kSuccess, kFailure };

std::string_view to_string(Outcome o);

struct Verdict {
  bool valid_evidence = false;
  Outcome outcome = Outcome::kFailure;
  std::string reasoning;
  // Set when the raw judgement claimed SUCCESS with invalid evidence and was
  // forced to FAILURE.
  bool inconsistent = false;

  bool operator==(const Verdict&) const = default;
};

// <ValidEvidence> or <Verdict> absent, or carrying a value outside its enum.
class MissingTag : public Error {
 public:
  using Error::Error;
};

// Reads the last <ValidEvidence> and <Verdict> elements (tag names are
// case-insensitive, surrounding whitespace ignored) and the last <Reasoning>.
// Throws MissingTag; never anything else.
Verdict parse_verdict(std::string_view raw);
std::optional<Verdict> try_parse_verdict(std::string_view raw);

// Ground-truth verifier. Success iff every subgoal holds on the final world;
// evidence is valid iff some exhibit shows a screen of the task's app.
Verdict oracle_verify(const WorldState& final_world, const TaskSpec& task, const EvidenceSet& evidence,
                      const Trajectory& traj);

struct JudgeConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "deepseek-r1";
  std::string api_key_env = "SMARTSNAP_JUDGE_API_KEY";
  int votes = 3;
  int pass_threshold = 2;
  double temperature = 0.6;
  int max_tokens = 4096;
  int max_retries = 2;
  int max_in_flight = 3;
  double timeout_seconds = 120.0;
  // Guidance prompt with {task_instruction} and {submit_message} placeholders.
  std::string guidance_prompt;

  // Throws ConfigError when votes < 1 or pass_threshold is outside [1, votes].
  void validate() const;
  EndpointConfig endpoint_config() const;
};

JudgeConfig default_judge_config();

struct Vote {
  std::optional<Verdict> verdict;  // empty when the vote failed
  std::string raw;
  bool missing_tag = false;
  bool transport_failed = false;
  std::string error;

  bool success() const { return verdict && verdict->outcome == Outcome::kSuccess; }
  bool valid() const { return verdict && verdict->valid_evidence; }
  bool flagged() const { return missing_tag || transport_failed; }
};

struct VoteTally {
  std::vector<Vote> votes;
  int success_votes = 0;
  int valid_votes = 0;
  int flagged_votes = 0;
};

struct JudgeResult {
  Verdict verdict;
  VoteTally tally;
};

// Majority rule: SUCCESS iff at least pass_threshold votes succeed; evidence
// valid iff a strict majority of votes found it valid. Unparsed and failed
// votes count as FAILURE / invalid.
JudgeResult aggregate_votes(std::vector<Vote> votes, int pass_threshold);

// User message sent to the judge: guidance with placeholders filled, followed
// by the formatted evidence.
std::string build_judge_prompt(const std::string& guidance, const std::string& instruction,
                               const std::string& message, const std::string& evidence);

// Issues cfg.votes independent judge calls (at most cfg.max_in_flight at a
// time). Throws TransportError only when every vote failed in transport.
JudgeResult judge_verify(ChatClient& client, const JudgeConfig& cfg, const std::string& instruction,
                         const std::string& message, const std::string& evidence);

}  // namespace smartsnap
