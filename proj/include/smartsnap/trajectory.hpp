#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smartsnap/action.hpp"
#include "smartsnap/error.hpp"
#include "smartsnap/world.hpp"

namespace smartsnap {

inline constexpr int kDefaultMaxTurns = 30;
inline constexpr int kDefaultMaxEvidences = 3;

// One (action, tool response) exhibit.
struct Round {
  int round_id = 0;
  Action action;
  std::string tool_response;
  std::optional<std::string> thought;
  std::uint64_t timestamp = 0;
  bool mutated = false;  // whether the action changed the world state

  bool operator==(const Round&) const = default;
};

// Raised when recording past the turn limit or after the terminal submit.
class TrajectoryClosed : public Error {
 public:
  using Error::Error;
};

struct Trajectory {
  std::string task_id;
  std::uint64_t seed = 0;
  int max_turns = kDefaultMaxTurns;
  std::vector<Round> rounds;
  std::optional<act::Submit> terminal;
  bool truncated = false;
  // Agent outputs that could not be parsed into a tool call.
  std::vector<std::string> format_errors;
  // Privileged end state; only oracles may read it.
  WorldState final_world;

  bool closed() const { return terminal.has_value() || truncated; }
  // Appends a round with the next id. A submit action also becomes the
  // terminal record. Throws TrajectoryClosed after a submit, after truncation,
  // or once max_turns rounds exist.
  const Round& record(Action action, std::string tool_response, std::optional<std::string> thought = {},
                      bool mutated = false);

  // Rounds that act on the world, excluding the initial observation round and the submit.
  int exec_action_count() const;
  int mutating_action_count() const;

  bool operator==(const Trajectory&) const = default;
};

struct EvidenceSet {
  std::vector<int> indices;

  // Ascending, duplicates removed.
  EvidenceSet normalized() const;
};

struct FormatReport {
  bool ok = true;
  std::vector<std::string> violations;
  bool operator==(const FormatReport&) const = default;
};

struct SubmitRules {
  // Upper bound on |E|; 0 disables the check.
  int max_evidences = kDefaultMaxEvidences;
};

// Report-style validation of a submit call against the trajectory it closes.
FormatReport validate_submit(const Trajectory& traj, const act::Submit& submit, const SubmitRules& rules = {});

// Serialized exhibits: for each index in ascending order an assistant message
// carrying the tool call and a tool message carrying the verbatim response.
// Throws InvalidArgument when an index is out of range or names the submit.
std::string curate_format(const Trajectory& traj, const EvidenceSet& evidence);

// Label used for exhibits, "[TOOL CALL ID: 3]".
std::string tool_call_label(int round_id);

}  // namespace smartsnap
