#include "smartsnap/trajectory.hpp"

#include <algorithm>
#include <set>

namespace smartsnap {

const Round& Trajectory::record(Action action, std::string tool_response, std::optional<std::string> thought,
                                bool mutated) {
  if (terminal) throw TrajectoryClosed("cannot record after the terminal submit");
  if (truncated) throw TrajectoryClosed("cannot record on a truncated trajectory");
  if (static_cast<int>(rounds.size()) >= max_turns) {
    throw TrajectoryClosed("turn limit of " + std::to_string(max_turns) + " rounds reached");
  }
  if (tool_response.empty()) throw InvalidArgument("tool response must not be empty");
  Round r;
  r.round_id = static_cast<int>(rounds.size());
  r.timestamp = static_cast<std::uint64_t>(rounds.size()) + 1;
  r.tool_response = std::move(tool_response);
  r.thought = std::move(thought);
  r.mutated = mutated;
  if (const auto* s = std::get_if<act::Submit>(&action)) terminal = *s;
  r.action = std::move(action);
  rounds.push_back(std::move(r));
  return rounds.back();
}

int Trajectory::exec_action_count() const {
  int n = 0;
  for (const auto& r : rounds) {
    if (r.round_id == 0 || is_submit(r.action)) continue;
    ++n;
  }
  return n;
}

int Trajectory::mutating_action_count() const {
  int n = 0;
  for (const auto& r : rounds) {
    if (r.round_id == 0 || is_submit(r.action)) continue;
    if (r.mutated) ++n;
  }
  return n;
}

EvidenceSet EvidenceSet::normalized() const {
  EvidenceSet out{indices};
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()), out.indices.end());
  return out;
}

FormatReport validate_submit(const Trajectory& traj, const act::Submit& submit, const SubmitRules& rules) {
  FormatReport rep;
  auto fail = [&](std::string v) {
    rep.ok = false;
    rep.violations.push_back(std::move(v));
  };
  for (const auto& e : traj.format_errors) fail("malformed tool call: " + e);

  // The submit must close the trajectory: either it is not recorded yet, or
  // it is the last round and the only submit.
  int submits = 0;
  for (std::size_t i = 0; i < traj.rounds.size(); ++i) {
    if (!is_submit(traj.rounds[i].action)) continue;
    ++submits;
    if (i + 1 != traj.rounds.size()) fail("submit is not the final action");
  }
  if (submits > 1) fail("submit called more than once");

  const int n = static_cast<int>(traj.rounds.size());
  std::set<int> seen;
  bool duplicate = false;
  for (int e : submit.evidences) {
    if (e < 0 || e >= n) {
      fail("evidence index " + std::to_string(e) + " out of range");
    } else if (is_submit(traj.rounds[static_cast<std::size_t>(e)].action)) {
      fail("evidence index " + std::to_string(e) + " refers to the submit call");
    }
    if (!seen.insert(e).second) duplicate = true;
  }
  if (duplicate) fail("duplicate evidence indices");
  if (submit.evidences.empty()) fail("no evidences submitted");
  if (rules.max_evidences > 0 && static_cast<int>(submit.evidences.size()) > rules.max_evidences) {
    fail("more than " + std::to_string(rules.max_evidences) + " evidences");
  }
  return rep;
}

std::string tool_call_label(int round_id) { return "[TOOL CALL ID: " + std::to_string(round_id) + "]"; }

std::string curate_format(const Trajectory& traj, const EvidenceSet& evidence) {
  const EvidenceSet e = evidence.normalized();
  std::string out;
  bool first = true;
  for (int idx : e.indices) {
    if (idx < 0 || idx >= static_cast<int>(traj.rounds.size())) {
      throw InvalidArgument("evidence index " + std::to_string(idx) + " out of range");
    }
    const Round& r = traj.rounds[static_cast<std::size_t>(idx)];
    if (is_submit(r.action)) throw InvalidArgument("evidence index " + std::to_string(idx) + " is the submit call");
    const std::string label = tool_call_label(idx);
    if (!first) out += '\n';
    first = false;
    out += "role: assistant\ntool_call_id: " + label + "\ncontent: " + action_to_json(r.action).dump() + "\n";
    out += "role: tool\ntool_call_id: " + label + "\ncontent: " + r.tool_response;
  }
  return out;
}

}  // namespace smartsnap
