#include "smartsnap/log.hpp"

#include "smartsnap/task.hpp"

namespace smartsnap {

namespace {

Outcome outcome_from(const std::string& s) {
  if (s == "SUCCESS") return Outcome::kSuccess;
  if (s == "FAILURE") return Outcome::kFailure;
  throw ConfigError("unknown outcome " + s);
}

}  // namespace

nlohmann::ordered_json trajectory_to_json(const Trajectory& t) {
  nlohmann::ordered_json j;
  j["task_id"] = t.task_id;
  j["seed"] = t.seed;
  j["max_turns"] = t.max_turns;
  auto& rounds = j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rounds) {
    nlohmann::ordered_json jr;
    jr["round_id"] = r.round_id;
    jr["action"] = action_to_json(r.action);
    jr["tool_response"] = r.tool_response;
    jr["thought"] = r.thought ? nlohmann::ordered_json(*r.thought) : nlohmann::ordered_json();
    jr["timestamp"] = r.timestamp;
    jr["mutated"] = r.mutated;
    rounds.push_back(std::move(jr));
  }
  j["terminal"] = t.terminal ? action_to_json(*t.terminal) : nlohmann::ordered_json();
  j["truncated"] = t.truncated;
  j["format_errors"] = t.format_errors;
  j["final_world"] = nlohmann::ordered_json::parse(world_state_to_json(t.final_world).dump());
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.max_turns = j.at("max_turns").get<int>();
    for (const auto& jr : j.at("rounds")) {
      Round r;
      r.round_id = jr.at("round_id").get<int>();
      r.action = action_from_json(jr.at("action"));
      r.tool_response = jr.at("tool_response").get<std::string>();
      if (!jr.at("thought").is_null()) r.thought = jr.at("thought").get<std::string>();
      r.timestamp = jr.at("timestamp").get<std::uint64_t>();
      r.mutated = jr.at("mutated").get<bool>();
      t.rounds.push_back(std::move(r));
    }
    if (!j.at("terminal").is_null()) {
      Action a = action_from_json(j.at("terminal"));
      if (!is_submit(a)) throw ConfigError("terminal record is not a submit");
      t.terminal = std::get<act::Submit>(a);
    }
    t.truncated = j.at("truncated").get<bool>();
    t.format_errors = j.at("format_errors").get<std::vector<std::string>>();
    t.final_world = world_state_from_json(j.at("final_world"));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trajectory record: ") + e.what());
  }
}

nlohmann::ordered_json score_to_json(const ScoreRecord& s) {
  nlohmann::ordered_json j;
  j["format"] = {{"ok", s.format.ok}, {"violations", s.format.violations}};
  j["verdict"] = {{"valid_evidence", s.verdict.valid_evidence},
                  {"outcome", std::string(to_string(s.verdict.outcome))},
                  {"reasoning", s.verdict.reasoning},
                  {"inconsistent", s.verdict.inconsistent}};
  j["provenance"] = s.provenance;
  if (s.votes) {
    j["votes"] = {{"total", s.votes->total},
                  {"success", s.votes->success},
                  {"valid", s.votes->valid},
                  {"flagged", s.votes->flagged}};
  } else {
    j["votes"] = nullptr;
  }
  j["evidence_count"] = s.evidence_count;
  j["reward"] = {{"format", s.reward.format},
                 {"validity", s.reward.validity},
                 {"complete", s.reward.complete},
                 {"concise", s.reward.concise},
                 {"total", s.reward.total}};
  return j;
}

ScoreRecord score_from_json(const nlohmann::json& j) {
  try {
    ScoreRecord s;
    s.format.ok = j.at("format").at("ok").get<bool>();
    s.format.violations = j.at("format").at("violations").get<std::vector<std::string>>();
    const auto& v = j.at("verdict");
    s.verdict.valid_evidence = v.at("valid_evidence").get<bool>();
    s.verdict.outcome = outcome_from(v.at("outcome").get<std::string>());
    s.verdict.reasoning = v.at("reasoning").get<std::string>();
    s.verdict.inconsistent = v.at("inconsistent").get<bool>();
    s.provenance = j.at("provenance").get<std::string>();
    if (!j.at("votes").is_null()) {
      const auto& jv = j.at("votes");
      s.votes = VoteSummary{jv.at("total").get<int>(), jv.at("success").get<int>(), jv.at("valid").get<int>(),
                            jv.at("flagged").get<int>()};
    }
    s.evidence_count = j.at("evidence_count").get<int>();
    const auto& r = j.at("reward");
    s.reward = {r.at("format").get<double>(), r.at("validity").get<double>(), r.at("complete").get<double>(),
                r.at("concise").get<double>(), r.at("total").get<double>()};
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed score record: ") + e.what());
  }
}

nlohmann::ordered_json record_to_json(const LogRecord& r) {
  auto j = trajectory_to_json(r.traj);
  j["score"] = r.score ? score_to_json(*r.score) : nlohmann::ordered_json();
  return j;
}

LogRecord record_from_json(const nlohmann::json& j) {
  LogRecord r;
  r.traj = trajectory_from_json(j);
  if (j.contains("score") && !j["score"].is_null()) r.score = score_from_json(j["score"]);
  return r;
}

nlohmann::ordered_json log_header(const char* format) {
  nlohmann::ordered_json h;
  h["format"] = format;
  h["version"] = kLogVersion;
  return h;
}

JsonlWriter::JsonlWriter(const std::string& path, const char* format) : out_(path) {
  if (!out_) throw ConfigError("cannot open " + path + " for writing");
  out_ << log_header(format).dump() << '\n';
}

void JsonlWriter::write(const nlohmann::ordered_json& line) {
  out_ << line.dump() << '\n';
  out_.flush();
}

std::vector<nlohmann::json> read_jsonl(const std::string& path, const char* format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + " is empty");
  auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || header.value("format", "") != format) {
    throw ConfigError(path + " is not a " + std::string(format) + " file");
  }
  if (header.value("version", 0) != kLogVersion) {
    throw ConfigError(path + ": unsupported version " + header["version"].dump());
  }
  std::vector<nlohmann::json> out;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed line");
    out.push_back(std::move(j));
  }
  return out;
}

void write_trajectory_log(const std::string& path, const std::vector<LogRecord>& records) {
  JsonlWriter w(path, kTrajectoryLogFormat);
  for (const auto& r : records) w.write(record_to_json(r));
}

std::vector<LogRecord> read_trajectory_log(const std::string& path) {
  std::vector<LogRecord> out;
  for (const auto& j : read_jsonl(path, kTrajectoryLogFormat)) out.push_back(record_from_json(j));
  return out;
}

}  // namespace smartsnap
