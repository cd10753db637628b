#include "smartsnap/task.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "smartsnap/assets.hpp"
#include "smartsnap/error.hpp"

namespace smartsnap {

namespace {

const Alarm* alarm_at(const WorldState& s, const std::string& time) {
  for (const auto& a : s.clock.alarms) {
    if (a.time == time) return &a;
  }
  return nullptr;
}

const Transaction* last_added(const WorldState& s) {
  if (!s.expenses.last_added_id) return nullptr;
  for (const auto& t : s.expenses.transactions) {
    if (t.id == *s.expenses.last_added_id) return &t;
  }
  return nullptr;
}

nlohmann::json plain(const nlohmann::ordered_json& j) { return nlohmann::json::parse(j.dump()); }

void apply_overrides(WorldState& s, const nlohmann::json& o) {
  if (o.contains("toggles")) {
    for (const auto& [k, v] : o.at("toggles").items()) {
      if (!s.toggles.contains(k)) throw ConfigError("unknown toggle '" + k + "' in task initial state");
      s.toggles[k] = v.get<bool>();
    }
  }
  if (o.contains("alarms_enabled")) {
    for (const auto& [time, v] : o.at("alarms_enabled").items()) {
      bool found = false;
      for (auto& a : s.clock.alarms) {
        if (a.time == time) {
          a.enabled = v.get<bool>();
          found = true;
        }
      }
      if (!found) throw ConfigError("unknown alarm '" + time + "' in task initial state");
    }
  }
}

}  // namespace

bool evaluate_subgoal(const Subgoal& g, const WorldState& s) {
  const auto& a = g.args;
  if (g.check == "toggle") {
    auto it = s.toggles.find(a.at("key").get<std::string>());
    return it != s.toggles.end() && it->second == a.at("value").get<bool>();
  }
  if (g.check == "last_txn_amount") {
    const Transaction* t = last_added(s);
    return t != nullptr && t->amount_cents == a.at("cents").get<std::int64_t>();
  }
  if (g.check == "last_txn_category") {
    const Transaction* t = last_added(s);
    return t != nullptr && t->category == a.at("category").get<std::string>();
  }
  if (g.check == "last_txn_date") {
    const Transaction* t = last_added(s);
    return t != nullptr && t->date == a.at("date").get<std::string>();
  }
  if (g.check == "txn_absent") {
    int id = a.at("id").get<int>();
    for (const auto& t : s.expenses.transactions) {
      if (t.id == id) return false;
    }
    return true;
  }
  if (g.check == "alarm_exists") return alarm_at(s, a.at("time").get<std::string>()) != nullptr;
  if (g.check == "alarm_absent") return alarm_at(s, a.at("time").get<std::string>()) == nullptr;
  if (g.check == "alarm_enabled") {
    const Alarm* al = alarm_at(s, a.at("time").get<std::string>());
    return al != nullptr && al->enabled == a.at("value").get<bool>();
  }
  if (g.check == "alarm_label") {
    const Alarm* al = alarm_at(s, a.at("time").get<std::string>());
    return al != nullptr && al->label == a.at("label").get<std::string>();
  }
  throw ConfigError("unknown subgoal check '" + g.check + "'");
}

int TaskSpec::solution_exec_steps() const {
  int n = 0;
  for (const auto& a : solution) {
    if (!is_submit(a)) ++n;
  }
  return n;
}

const TaskSpec* TaskSuite::try_find(const std::string& task_id) const {
  for (const auto& t : tasks) {
    if (t.task_id == task_id) return &t;
  }
  return nullptr;
}

const TaskSpec& TaskSuite::find(const std::string& task_id) const {
  if (const TaskSpec* t = try_find(task_id)) return *t;
  throw InvalidArgument("unknown task '" + task_id + "'");
}

std::string render_instruction(const std::string& tmpl,
                               const std::vector<std::pair<std::string, std::string>>& params) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i);
      if (close != std::string::npos) {
        std::string key = tmpl.substr(i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [k, v] : params) {
          if (k == key) {
            out += v;
            replaced = true;
            break;
          }
        }
        if (!replaced) throw ConfigError("instruction references unknown parameter '" + key + "'");
        i = close + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

TaskSpec task_from_json(const nlohmann::ordered_json& j) {
  TaskSpec t;
  try {
    t.task_id = j.at("id").get<std::string>();
    t.app = j.at("app").get<std::string>();
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) t.params.emplace_back(k, v.get<std::string>());
    }
    t.instruction = render_instruction(j.at("instruction").get<std::string>(), t.params);
    for (const auto& g : j.at("subgoals")) {
      t.subgoals.push_back({g.at("name").get<std::string>(), g.at("check").get<std::string>(),
                            g.contains("args") ? plain(g.at("args")) : nlohmann::json::object()});
    }
    t.initial_state = default_world_state();
    if (j.contains("initial")) apply_overrides(t.initial_state, plain(j.at("initial")));
    t.initial_state.rng_seed = j.value("seed", 0ULL);
    if (j.contains("solution")) {
      for (const auto& call : j.at("solution")) t.solution.push_back(action_from_json(plain(call)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed task definition: " + std::string(e.what()));
  } catch (const InvalidArgument& e) {
    throw ConfigError("malformed task definition: " + std::string(e.what()));
  }
  // Fail fast on unknown predicate families.
  for (const auto& g : t.subgoals) {
    try {
      (void)evaluate_subgoal(g, t.initial_state);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("task " + t.task_id + ": subgoal " + g.name + ": " + e.what());
    }
  }
  return t;
}

TaskSuite parse_task_suite(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("task suite is not valid JSON");
  TaskSuite suite;
  suite.version = j.value("version", 1);
  if (!j.contains("tasks") || !j.at("tasks").is_array()) throw ConfigError("task suite has no 'tasks' array");
  for (const auto& t : j.at("tasks")) {
    suite.tasks.push_back(task_from_json(t));
    if (std::count_if(suite.tasks.begin(), suite.tasks.end(),
                      [&](const TaskSpec& x) { return x.task_id == suite.tasks.back().task_id; }) > 1) {
      throw ConfigError("duplicate task id '" + suite.tasks.back().task_id + "'");
    }
  }
  return suite;
}

TaskSuite load_task_suite(const std::string& path) {
  if (path.empty() || path == "builtin") return builtin_task_suite();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open task suite '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_task_suite(ss.str());
}

const TaskSuite& builtin_task_suite() {
  static const TaskSuite suite = parse_task_suite(std::string(asset("tasks.json")));
  return suite;
}

WorldState reset_state(const TaskSpec& task) {
  if (!parse_app(task.app)) throw InvalidArgument("unknown app '" + task.app + "'");
  return task.initial_state;
}

std::vector<std::pair<std::string, bool>> ground_truth_check(const WorldState& state, const TaskSpec& task) {
  std::vector<std::pair<std::string, bool>> out;
  out.reserve(task.subgoals.size());
  for (const auto& g : task.subgoals) out.emplace_back(g.name, evaluate_subgoal(g, state));
  return out;
}

bool all_subgoals_hold(const WorldState& state, const TaskSpec& task) {
  for (const auto& g : task.subgoals) {
    if (!evaluate_subgoal(g, state)) return false;
  }
  return true;
}

Observation World::reset(const TaskSpec& task) {
  state_ = reset_state(task);
  return observe(state_);
}

StepResult World::step(const Action& action) {
  StepResult r = smartsnap::step(state_, action);
  state_ = r.state;
  return r;
}

// ---- WorldState serialization -------------------------------------------------

nlohmann::json world_state_to_json(const WorldState& s) {
  nlohmann::json j;
  j["current_app"] = std::string(app_name(s.current_app));
  j["screen_stack"] = s.screen_stack;
  j["toggles"] = s.toggles;
  auto& e = j["expenses"];
  e["transactions"] = nlohmann::json::array();
  for (const auto& t : s.expenses.transactions) {
    e["transactions"].push_back(
        {{"id", t.id}, {"amount_cents", t.amount_cents}, {"date", t.date}, {"category", t.category}});
  }
  e["next_id"] = s.expenses.next_id;
  e["last_added_id"] = s.expenses.last_added_id ? nlohmann::json(*s.expenses.last_added_id) : nlohmann::json();
  e["draft"] = {{"amount", s.expenses.draft.amount},
                {"date", s.expenses.draft.date},
                {"category", s.expenses.draft.category},
                {"income", s.expenses.draft.income}};
  auto& c = j["clock"];
  c["alarms"] = nlohmann::json::array();
  for (const auto& a : s.clock.alarms) {
    c["alarms"].push_back({{"id", a.id}, {"time", a.time}, {"label", a.label}, {"enabled", a.enabled}});
  }
  c["next_id"] = s.clock.next_id;
  c["draft"] = {{"time", s.clock.draft.time}, {"label", s.clock.draft.label}, {"enabled", s.clock.draft.enabled}};
  j["keyboard_visible"] = s.keyboard_visible;
  j["focused"] = s.focused;
  j["scroll"] = s.scroll;
  j["rng_seed"] = s.rng_seed;
  return j;
}

WorldState world_state_from_json(const nlohmann::json& j) {
  try {
    WorldState s;
    const std::string app = j.at("current_app").get<std::string>();
    s.current_app = app == "HOME" ? App::kHome : parse_app(app).value();
    s.screen_stack = j.at("screen_stack").get<std::vector<std::string>>();
    s.toggles = j.at("toggles").get<std::map<std::string, bool>>();
    const auto& e = j.at("expenses");
    for (const auto& t : e.at("transactions")) {
      s.expenses.transactions.push_back({t.at("id").get<int>(), t.at("amount_cents").get<std::int64_t>(),
                                         t.at("date").get<std::string>(), t.at("category").get<std::string>()});
    }
    s.expenses.next_id = e.at("next_id").get<int>();
    if (!e.at("last_added_id").is_null()) s.expenses.last_added_id = e.at("last_added_id").get<int>();
    const auto& d = e.at("draft");
    s.expenses.draft = {d.at("amount").get<std::string>(), d.at("date").get<std::string>(),
                        d.at("category").get<std::string>(), d.at("income").get<bool>()};
    const auto& c = j.at("clock");
    for (const auto& a : c.at("alarms")) {
      s.clock.alarms.push_back({a.at("id").get<int>(), a.at("time").get<std::string>(),
                                a.at("label").get<std::string>(), a.at("enabled").get<bool>()});
    }
    s.clock.next_id = c.at("next_id").get<int>();
    const auto& cd = c.at("draft");
    s.clock.draft = {cd.at("time").get<std::string>(), cd.at("label").get<std::string>(),
                     cd.at("enabled").get<bool>()};
    s.keyboard_visible = j.at("keyboard_visible").get<bool>();
    s.focused = j.at("focused").get<std::string>();
    s.scroll = j.at("scroll").get<std::map<std::string, int>>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return s;
  } catch (const std::exception& e) {
    throw InvalidArgument("malformed world state: " + std::string(e.what()));
  }
}

}  // namespace smartsnap
