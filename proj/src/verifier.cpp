#include "smartsnap/verifier.hpp"

#include <cctype>
#include <thread>

#include "smartsnap/assets.hpp"

namespace smartsnap {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Contents of every <tag>...</tag> element in document order.
std::vector<std::string_view> elements(std::string_view raw, std::string_view lowered, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t o = lowered.find(open, pos);
    if (o == std::string_view::npos) break;
    std::size_t start = o + open.size();
    std::size_t c = lowered.find(close, start);
    if (c == std::string_view::npos) break;
    // A later open tag before the close means this one was never closed.
    std::size_t reopen = lowered.find(open, start);
    if (reopen != std::string_view::npos && reopen < c) {
      pos = reopen;
      continue;
    }
    out.push_back(raw.substr(start, c - start));
    pos = c + close.size();
  }
  return out;
}

template <class Map>
std::optional<typename Map::mapped_type> last_enum_value(const std::vector<std::string_view>& values, const Map& map) {
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    auto key = ascii_lower(trim(*it));
    auto hit = map.find(key);
    if (hit != map.end()) return hit->second;
  }
  return std::nullopt;
}

bool mentions_app_screen(const std::string& response, App app) {
  return response.find("id=\"" + std::string(app_id_prefix(app))) != std::string::npos;
}

}  // namespace

std::string_view to_string(Outcome o) { return o == Outcome::kSuccess ? "SUCCESS" : "FAILURE"; }

std::optional<Verdict> try_parse_verdict(std::string_view raw) {
  static const std::map<std::string, bool> kValid = {{"true", true}, {"false", false}};
  static const std::map<std::string, Outcome> kOutcome = {{"success", Outcome::kSuccess},
                                                          {"failure", Outcome::kFailure}};
  const std::string lowered = ascii_lower(raw);
  auto valid = last_enum_value(elements(raw, lowered, "validevidence"), kValid);
  auto outcome = last_enum_value(elements(raw, lowered, "verdict"), kOutcome);
  if (!valid || !outcome) return std::nullopt;
  Verdict v;
  v.valid_evidence = *valid;
  v.outcome = *outcome;
  auto reasoning = elements(raw, lowered, "reasoning");
  if (!reasoning.empty()) v.reasoning = std::string(trim(reasoning.back()));
  if (!v.valid_evidence && v.outcome == Outcome::kSuccess) {
    v.outcome = Outcome::kFailure;
    v.inconsistent = true;
  }
  return v;
}

Verdict parse_verdict(std::string_view raw) {
  if (auto v = try_parse_verdict(raw)) return *v;
  throw MissingTag("judge output lacks a well-formed <ValidEvidence>/<Verdict> pair");
}

Verdict oracle_verify(const WorldState& final_world, const TaskSpec& task, const EvidenceSet& evidence,
                      const Trajectory& traj) {
  Verdict v;
  auto app = parse_app(task.app);
  for (int idx : evidence.normalized().indices) {
    if (idx < 0 || idx >= static_cast<int>(traj.rounds.size())) continue;
    if (app && mentions_app_screen(traj.rounds[static_cast<std::size_t>(idx)].tool_response, *app)) {
      v.valid_evidence = true;
    }
  }
  bool all = true;
  std::string reasons;
  for (const auto& [name, ok] : ground_truth_check(final_world, task)) {
    reasons += "subgoal " + name + ": " + (ok ? "satisfied" : "not satisfied") + "\n";
    all = all && ok;
  }
  reasons += std::string("evidence ") + (v.valid_evidence ? "shows" : "does not show") + " a " + task.app + " screen";
  v.outcome = all && v.valid_evidence ? Outcome::kSuccess : Outcome::kFailure;
  v.reasoning = std::move(reasons);
  return v;
}

void JudgeConfig::validate() const {
  if (votes < 1) throw ConfigError("judge.votes must be >= 1");
  if (pass_threshold < 1 || pass_threshold > votes) throw ConfigError("judge.pass_threshold must be in [1, votes]");
  if (max_in_flight < 1) throw ConfigError("judge.max_in_flight must be >= 1");
  if (max_retries < 0) throw ConfigError("judge.max_retries must be >= 0");
  if (!(temperature >= 0.0)) throw ConfigError("judge.temperature must be >= 0");
}

EndpointConfig JudgeConfig::endpoint_config() const {
  return {endpoint, api_key_env, timeout_seconds, max_retries, max_in_flight};
}

JudgeConfig default_judge_config() {
  JudgeConfig c;
  c.guidance_prompt = std::string(asset("verifier_prompt.md"));
  return c;
}

JudgeResult aggregate_votes(std::vector<Vote> votes, int pass_threshold) {
  JudgeResult r;
  for (const auto& v : votes) {
    if (v.success()) ++r.tally.success_votes;
    if (v.valid()) ++r.tally.valid_votes;
    if (v.flagged()) ++r.tally.flagged_votes;
  }
  const int n = static_cast<int>(votes.size());
  r.verdict.valid_evidence = 2 * r.tally.valid_votes > n;
  r.verdict.outcome =
      r.tally.success_votes >= pass_threshold && r.verdict.valid_evidence ? Outcome::kSuccess : Outcome::kFailure;
  r.verdict.reasoning = std::to_string(r.tally.success_votes) + "/" + std::to_string(n) + " votes SUCCESS, " +
                        std::to_string(r.tally.valid_votes) + "/" + std::to_string(n) + " votes valid evidence";
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i].verdict && !votes[i].verdict->reasoning.empty()) {
      r.verdict.reasoning += "\n[vote " + std::to_string(i + 1) + "] " + votes[i].verdict->reasoning;
    }
  }
  r.tally.votes = std::move(votes);
  return r;
}

std::string build_judge_prompt(const std::string& guidance, const std::string& instruction,
                               const std::string& message, const std::string& evidence) {
  auto replace = [](std::string s, const std::string& key, const std::string& value) {
    for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
      s.replace(pos, key.size(), value);
    }
    return s;
  };
  std::string prompt = replace(guidance, "{task_instruction}", instruction);
  prompt = replace(std::move(prompt), "{submit_message}", message);
  if (!prompt.empty() && prompt.back() != '\n') prompt += '\n';
  prompt += "## Agent's Evidence\n";
  prompt += evidence;
  return prompt;
}

JudgeResult judge_verify(ChatClient& client, const JudgeConfig& cfg, const std::string& instruction,
                         const std::string& message, const std::string& evidence) {
  cfg.validate();
  ChatRequest req;
  req.model = cfg.model;
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.messages.push_back({"user", build_judge_prompt(cfg.guidance_prompt, instruction, message, evidence)});

  std::vector<Vote> votes(static_cast<std::size_t>(cfg.votes));
  InFlightLimiter limiter(cfg.max_in_flight);
  auto cast = [&](std::size_t i) {
    Vote& v = votes[i];
    try {
      v.raw = client.complete(req).content;
      v.verdict = try_parse_verdict(v.raw);
      if (!v.verdict) {
        v.missing_tag = true;
        v.error = "missing or malformed verdict tags";
      }
    } catch (const TransportError& e) {
      v.transport_failed = true;
      v.error = e.what();
    }
  };
  if (cfg.max_in_flight <= 1 || cfg.votes == 1) {
    for (std::size_t i = 0; i < votes.size(); ++i) cast(i);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
      limiter.acquire();
      workers.emplace_back([&, i] {
        cast(i);
        limiter.release();
      });
    }
    for (auto& w : workers) w.join();
  }
  bool all_failed = true;
  for (const auto& v : votes) all_failed = all_failed && v.transport_failed;
  if (all_failed) throw TransportError("every judge vote failed: " + votes.front().error);
  return aggregate_votes(std::move(votes), cfg.pass_threshold);
}

}  // namespace smartsnap
