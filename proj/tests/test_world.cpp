#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "smartsnap/assets.hpp"
#include "smartsnap/error.hpp"

using namespace smartsnap;

namespace {

WorldState in_settings_network() {
  WorldState s = default_world_state();
  s = step(s, act::Launch{"Settings"}).state;
  s = step(s, testutil::tap_on(s, "settings_row_network")).state;
  return s;
}

// Random action drawn around the clickable nodes of the current screen, plus
// raw coordinates and typing so that misses are exercised too.
Action random_action(const WorldState& s, std::mt19937_64& rng) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const UiNode root = build_screen(s);
  std::vector<const UiNode*> clickable;
  std::vector<const UiNode*> stack{&root};
  while (!stack.empty()) {
    const UiNode* n = stack.back();
    stack.pop_back();
    if (n->clickable) clickable.push_back(n);
    for (const auto& c : n->children) stack.push_back(&c);
  }
  static const char* kTexts[] = {"12.50", "2024-05-01", "07:30", "Gym", "abc", "", "99999999999"};
  static const char* kApps[] = {"Settings", "Expenses", "Clock", "FooApp"};
  switch (pick(11)) {
    case 0:
    case 1:
    case 2:
      if (!clickable.empty()) {
        const auto* n = clickable[static_cast<std::size_t>(pick(static_cast<int>(clickable.size())))];
        return act::Tap{n->bounds.x1, n->bounds.y1, n->bounds.x2, n->bounds.y2};
      }
      return act::Tap{pick(kScreenWidth), pick(kScreenHeight), pick(kScreenWidth), pick(kScreenHeight)};
    case 3:
      return act::Tap{pick(1200) - 60, pick(2000) - 40, pick(1200), pick(2000)};
    case 4:
      if (!clickable.empty()) {
        const auto* n = clickable[static_cast<std::size_t>(pick(static_cast<int>(clickable.size())))];
        return act::LongPress{n->bounds.x1, n->bounds.y1, n->bounds.x2, n->bounds.y2};
      }
      return act::LongPress{0, 0, 10, 10};
    case 5:
      return act::Type{kTexts[pick(7)]};
    case 6:
      return act::Swipe{540, 900, 540, 900, static_cast<act::Direction>(pick(4)), static_cast<act::Distance>(pick(3))};
    case 7:
      return act::Back{};
    case 8:
      return pick(2) ? Action(act::Home{}) : Action(act::Enter{});
    case 9:
      return act::Launch{kApps[pick(4)]};
    default:
      return pick(2) ? Action(act::Wait{1.0}) : Action(act::GetCurrentXml{});
  }
}

}  // namespace

TEST_SUITE("world") {
  TEST_CASE("reset renders the task app and is deterministic") {
    const auto& suite = builtin_task_suite();
    const TaskSpec& t = suite.find("expenses_add_food");
    World w1, w2;
    const auto a = w1.reset(t);
    const auto b = w2.reset(t);
    CHECK(a.xml == b.xml);
    auto s = step(w1.state(), act::Launch{"Expenses"});
    CHECK(s.observation.xml.find("text=\"Expenses\"") != std::string::npos);
  }

  TEST_CASE("reset with an unknown app fails") {
    TaskSpec t = builtin_task_suite().find("settings_wifi_on");
    t.app = "FooApp";
    World w;
    CHECK_THROWS_AS(w.reset(t), InvalidArgument);
  }

  TEST_CASE("tap on an unchecked switch checks it") {
    WorldState s = in_settings_network();
    auto root = build_screen(s);
    REQUIRE(find_node(root, "settings_wifi_toggle") != nullptr);
    CHECK_FALSE(find_node(root, "settings_wifi_toggle")->checked);
    auto r = step(s, testutil::tap_on(s, "settings_wifi_toggle"));
    CHECK(r.mutated);
    CHECK(find_node(build_screen(r.state), "settings_wifi_toggle")->checked);
    CHECK(r.state.toggles.at("wifi"));
  }

  TEST_CASE("back at home is a no-op") {
    WorldState s = default_world_state();
    auto r = step(s, act::Back{});
    CHECK(r.state == s);
    CHECK(r.observation.xml == observe(s).xml);
    CHECK(r.tool_response.rfind("no-op:", 0) == 0);
    CHECK_FALSE(r.mutated);
  }

  TEST_CASE("type without a focused field") {
    WorldState s = default_world_state();
    auto r = step(s, act::Type{"50.00"});
    CHECK(r.state == s);
    CHECK(r.tool_response == "no-op: no focused input");
  }

  TEST_CASE("submit never reaches the environment") {
    CHECK_THROWS_AS(step(default_world_state(), act::Submit{"done", {1}}), InvalidArgument);
  }

  TEST_CASE("single switch node renders canonically") {
    UiNode n;
    n.node_id = "wifi_toggle";
    n.class_name = "Switch";
    n.bounds = {80, 300, 1000, 420};
    n.text = "Wi-Fi";
    n.clickable = true;
    CHECK(render_xml(n) ==
          "<node id=\"wifi_toggle\" class=\"Switch\" bounds=\"[80,300][1000,420]\" text=\"Wi-Fi\" "
          "clickable=\"true\" scrollable=\"false\" checked=\"false\" focused=\"false\"/>\n");
  }

  TEST_CASE("golden screens") {
    WorldState s = default_world_state();
    CHECK(render_xml(s) == testutil::golden("home.xml"));
    CHECK(render_xml(in_settings_network()) == testutil::golden("settings_network.xml"));
    WorldState e = step(default_world_state(), act::Launch{"Expenses"}).state;
    CHECK(render_xml(e) == testutil::golden("expenses_main.xml"));
  }

  TEST_CASE("parse_xml inverts render_xml") {
    for (const auto* app : {"Settings", "Expenses", "Clock"}) {
      WorldState s = step(default_world_state(), act::Launch{app}).state;
      const UiNode root = build_screen(s);
      auto back = parse_xml(render_xml(root));
      REQUIRE(back.has_value());
      CHECK(*back == root);
    }
    CHECK_FALSE(parse_xml("no-op: already at the home screen").has_value());
    CHECK_FALSE(parse_xml("<node id=\"x\"").has_value());
  }

  TEST_CASE("ground truth") {
    const auto& suite = builtin_task_suite();
    const TaskSpec& dark = suite.find("settings_dark_theme_on");
    WorldState s = reset_state(dark);
    s.toggles["dark_theme"] = true;
    auto gt = ground_truth_check(s, dark);
    REQUIRE(gt.size() == 1);
    CHECK(gt[0].second);

    // Fresh state: nothing is done yet for any shipped task.
    for (const auto& t : suite.tasks) {
      for (const auto& [name, ok] : ground_truth_check(reset_state(t), t)) {
        INFO(t.task_id << " " << name);
        CHECK_FALSE(ok);
      }
    }
    TaskSpec empty = dark;
    empty.subgoals.clear();
    CHECK(ground_truth_check(reset_state(empty), empty).empty());
  }

  TEST_CASE("suite shape") {
    const auto& suite = builtin_task_suite();
    CHECK(suite.tasks.size() >= 24);
    std::map<std::string, int> per_app;
    for (const auto& t : suite.tasks) {
      ++per_app[t.app];
      CHECK(t.subgoals.size() >= 1);
      CHECK(t.subgoals.size() <= 4);
      CHECK(t.solution_exec_steps() <= 15);
      CHECK(is_submit(t.solution.back()));
    }
    for (const auto& [app, n] : per_app) CHECK(n >= 8);
  }

  TEST_CASE("taps that hit nothing leave app data alone") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
      WorldState s = default_world_state();
      const char* apps[] = {"Settings", "Expenses", "Clock"};
      s = step(s, act::Launch{apps[i % 3]}).state;
      const int x = static_cast<int>(rng() % kScreenWidth), y = static_cast<int>(rng() % kScreenHeight);
      if (deepest_clickable_at(build_screen(s), 2L * x, 2L * y) != nullptr) continue;
      auto r = step(s, act::Tap{x, y, x, y});
      CHECK(r.state.toggles == s.toggles);
      CHECK(r.state.expenses.transactions == s.expenses.transactions);
      CHECK(r.state.clock.alarms == s.clock.alarms);
    }
  }

  TEST_CASE("closure and determinism over random action sequences") {
    const auto& suite = builtin_task_suite();
    for (int seq = 0; seq < 500; ++seq) {
      const TaskSpec& task = suite.tasks[static_cast<std::size_t>(seq) % suite.tasks.size()];
      std::mt19937_64 rng(static_cast<std::uint64_t>(seq));
      std::vector<Action> actions;
      std::vector<std::string> first;
      WorldState s = reset_state(task);
      for (int k = 0; k < 30; ++k) {
        Action a = random_action(s, rng);
        auto r = step(s, a);
        auto problems = check_invariants(r.state);
        if (!problems.empty()) FAIL("invariant violated after " << describe(a) << ": " << problems.front());
        first.push_back(r.tool_response + "\x1f" + r.observation.xml);
        actions.push_back(std::move(a));
        s = std::move(r.state);
      }
      WorldState replay = reset_state(task);
      for (std::size_t k = 0; k < actions.size(); ++k) {
        auto r = step(replay, actions[k]);
        if (r.tool_response + "\x1f" + r.observation.xml != first[k]) FAIL("replay diverged at step " << k);
        replay = std::move(r.state);
      }
      CHECK(replay == s);
    }
  }

  TEST_CASE("amounts") {
    CHECK(parse_amount("12.5") == 1250);
    CHECK(parse_amount("12") == 1200);
    CHECK(parse_amount("12.50") == 1250);
    CHECK_FALSE(parse_amount("0").has_value());
    CHECK_FALSE(parse_amount("-3").has_value());
    CHECK_FALSE(parse_amount("1.234").has_value());
    CHECK(format_amount(-450) == "\xE2\x88\x92" "4.50");
    CHECK(format_amount(150000) == "+1500.00");
  }

  TEST_CASE("actions round-trip through json") {
    std::vector<Action> all = {act::GetCurrentXml{},
                               act::Tap{1, 2, 3, 4},
                               act::Type{"hello"},
                               act::LongPress{5, 6, 7, 8},
                               act::Swipe{1, 1, 2, 2, act::Direction::kDown, act::Distance::kLong},
                               act::Back{},
                               act::Home{},
                               act::Wait{2.5},
                               act::Enter{},
                               act::Launch{"Clock"},
                               act::Submit{"done", {2, 5}}};
    for (const auto& a : all) CHECK(action_from_json(action_to_json(a)) == a);
    CHECK_THROWS_AS(action_from_json(nlohmann::json{{"name", "fly"}, {"arguments", nlohmann::json::object()}}),
                    InvalidArgument);
    CHECK_THROWS_AS(action_from_json(nlohmann::json{{"name", "tap"}, {"arguments", {{"x1", 1}}}}), InvalidArgument);
  }

  TEST_CASE("tool schema asset matches the action vocabulary") {
    auto tools = nlohmann::json::parse(asset("tool_schemas.json"));
    std::set<std::string> names;
    for (const auto& t : tools) {
      const auto& fn = t.contains("function") ? t["function"] : t;
      names.insert(fn["name"].get<std::string>());
    }
    CHECK(names == std::set<std::string>{"get_current_xml", "tap", "type", "long_press", "swipe", "back", "home",
                                         "wait", "enter", "launch", "submit"});
  }
}
