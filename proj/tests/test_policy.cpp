#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "smartsnap/assets.hpp"
#include "smartsnap/error.hpp"
#include "smartsnap/policy.hpp"

using namespace smartsnap;

namespace {

int count_taps(const std::vector<CandidateAction>& c) {
  int n = 0;
  for (const auto& a : c) n += std::holds_alternative<act::Tap>(a.action) ? 1 : 0;
  return n;
}

PolicyParams random_params(std::mt19937_64& rng, double scale) {
  PolicyParams p = PolicyParams::zeros();
  std::normal_distribution<double> n(0.0, scale);
  for (auto& w : p.weights) w = n(rng);
  return p;
}

// Observation/trajectory pairs visited by a random toy policy.
template <class Fn>
void for_visited_states(int episodes, Fn&& fn) {
  const auto& suite = builtin_task_suite();
  std::mt19937_64 rng(3);
  for (int e = 0; e < episodes; ++e) {
    const TaskSpec& task = suite.tasks[static_cast<std::size_t>(e) % suite.tasks.size()];
    World w;
    Observation obs = w.reset(task);
    Trajectory t;
    t.task_id = task.task_id;
    t.record(act::GetCurrentXml{}, obs.xml);
    ToyPolicy pol(random_params(rng, 0.5), 1.0);
    for (int k = 0; k < 15; ++k) {
      fn(obs, t, task);
      auto s = pol.act(obs, t, task, rng());
      if (is_submit(*s.action)) break;
      auto r = w.step(*s.action);
      t.record(*s.action, r.tool_response, {}, r.mutated);
      obs = r.observation;
    }
  }
}

class CannedClient : public ChatClient {
 public:
  explicit CannedClient(ChatResponse r) : r_(std::move(r)) {}
  ChatResponse complete(const ChatRequest& req) override {
    last = req;
    return r_;
  }
  ChatRequest last;

 private:
  ChatResponse r_;
};

}  // namespace

TEST_SUITE("policy") {
  TEST_CASE("tap candidates follow the clickable nodes") {
    const TaskSpec& task = builtin_task_suite().find("settings_wifi_on");
    World w;
    Observation obs = w.reset(task);
    Trajectory t;
    t.record(act::GetCurrentXml{}, obs.xml);
    auto c = enumerate_candidates(obs, t, task);
    CHECK(count_taps(c) == 3);  // three app icons on the home screen
    CHECK(c.size() <= kMaxCandidates);
  }

  TEST_CASE("deterministic enumeration") {
    for_visited_states(6, [](const Observation& obs, const Trajectory& t, const TaskSpec& task) {
      auto a = enumerate_candidates(obs, t, task);
      auto b = enumerate_candidates(obs, t, task);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].action == b[i].action);
        CHECK(a[i].features == b[i].features);
      }
    });
  }

  TEST_CASE("candidate set structure") {
    for_visited_states(48, [](const Observation& obs, const Trajectory& t, const TaskSpec& task) {
      auto c = enumerate_candidates(obs, t, task);
      REQUIRE_FALSE(c.empty());
      CHECK(c.size() <= kMaxCandidates);
      int exec = 0, submits = 0;
      bool back = false, xml = false;
      for (const auto& a : c) {
        if (auto* s = std::get_if<act::Submit>(&a.action)) {
          ++submits;
          CHECK(s->evidences.size() <= 3);
          for (int e : s->evidences) {
            CHECK(e >= 0);
            CHECK(e < static_cast<int>(t.rounds.size()));
          }
        } else {
          ++exec;
        }
        back = back || std::holds_alternative<act::Back>(a.action);
        xml = xml || std::holds_alternative<act::GetCurrentXml>(a.action);
        for (const auto& [i, v] : a.features) {
          CHECK(i >= 0);
          CHECK(i < kNumFeatures);
          CHECK(std::isfinite(v));
        }
      }
      CHECK(exec >= 1);
      CHECK(back);
      CHECK(xml);
      CHECK(submits <= static_cast<int>(kMaxSubmitCandidates));
      if (!t.rounds.empty()) CHECK(submits >= 1);
    });
  }

  TEST_CASE("no history means no evidence") {
    const TaskSpec& task = builtin_task_suite().find("clock_enable_gym");
    World w;
    Observation obs = w.reset(task);
    Trajectory empty;
    for (const auto& a : enumerate_candidates(obs, empty, task)) {
      if (auto* s = std::get_if<act::Submit>(&a.action)) CHECK(s->evidences.empty());
    }
  }

  TEST_CASE("sampling") {
    const PolicyParams p = PolicyParams::zeros();
    std::vector<CandidateAction> one{{act::Back{}, {{kBiasBack, 1.0}}}};
    auto s = sample_action(p, one, 1.0, 5);
    CHECK(s.index == 0);
    CHECK(s.logprob == 0.0);

    std::vector<CandidateAction> two{{act::Back{}, {{kBiasBack, 1.0}}}, {act::Home{}, {{kBiasHome, 1.0}}}};
    CHECK(sample_action(p, two, 1.0, 1).logprob == doctest::Approx(std::log(0.5)));
    CHECK(sample_action(p, two, 1.0, 9).logprob == doctest::Approx(std::log(0.5)));
    CHECK_THROWS_AS(sample_action(p, {}, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_action(p, two, 0.0, 1), InvalidArgument);

    // Both outcomes occur over seeds; the same seed repeats.
    int first = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) first += sample_action(p, two, 1.0, seed).index == 0;
    CHECK(first > 60);
    CHECK(first < 140);
    CHECK(sample_action(p, two, 1.0, 77).index == sample_action(p, two, 1.0, 77).index);
  }

  TEST_CASE("log-probabilities match an independent normalization") {
    std::mt19937_64 rng(11);
    for_visited_states(12, [&](const Observation& obs, const Trajectory& t, const TaskSpec& task) {
      auto c = enumerate_candidates(obs, t, task);
      const PolicyParams p = random_params(rng, 1.0);
      const double temp = 0.3 + 0.1 * static_cast<double>(rng() % 10);
      std::vector<FeatureVec> feats;
      for (const auto& a : c) feats.push_back(a.features);
      auto lp = candidate_logprobs(p, feats, temp);
      // Plain exponentials relative to the maximum score.
      std::vector<double> sc;
      for (const auto& f : feats) {
        double s = 0.0;
        for (const auto& [i, v] : f) s += p.weights[static_cast<std::size_t>(i)] * v;
        sc.push_back(s / temp);
      }
      const double mx = *std::max_element(sc.begin(), sc.end());
      double z = 0.0;
      for (double s : sc) z += std::exp(s - mx);
      double total = 0.0;
      for (std::size_t i = 0; i < sc.size(); ++i) {
        CHECK(lp[i] == doctest::Approx(sc[i] - mx - std::log(z)).epsilon(1e-9));
        total += std::exp(lp[i]);
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
      auto pick = sample_action(p, c, temp, rng());
      CHECK(pick.logprob == doctest::Approx(lp[static_cast<std::size_t>(pick.index)]).epsilon(1e-12));
    });
  }

  TEST_CASE("greedy choice invariances") {
    std::mt19937_64 rng(5);
    for_visited_states(6, [&](const Observation& obs, const Trajectory& t, const TaskSpec& task) {
      auto c = enumerate_candidates(obs, t, task);
      std::vector<FeatureVec> feats;
      for (const auto& a : c) feats.push_back(a.features);
      const PolicyParams p = random_params(rng, 1.0);
      auto argmax = [](const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
      const auto base = argmax(candidate_logprobs(p, feats, 1.0));
      PolicyParams scaled = p;
      for (auto& w : scaled.weights) w *= 3.0;
      CHECK(argmax(candidate_logprobs(scaled, feats, 3.0)) == base);
      // Every candidate carries exactly one action-type bias, so raising all
      // of them by the same amount shifts every score by a constant.
      PolicyParams shift = p;
      for (int f = kBiasTap; f <= kBiasSubmit; ++f) shift.weights[static_cast<std::size_t>(f)] += 4.0;
      CHECK(argmax(candidate_logprobs(shift, feats, 1.0)) == base);
    });
  }

  TEST_CASE("tokenize and intent") {
    CHECK(tokenize("Turn on Wi-Fi, then 07:30!") == std::vector<std::string>{"turn", "on", "wi-fi", "then", "07:30"});
    CHECK(tokenize("-.a.-") == std::vector<std::string>{"a"});
    const auto& suite = builtin_task_suite();
    auto on = analyze_task(suite.find("settings_wifi_on"));
    REQUIRE(on.items.size() == 1);
    CHECK(on.items[0].kind == GoalKind::kSwitch);
    CHECK(on.items[0].polarity);
    auto off = analyze_task(suite.find("settings_auto_rotate_off"));
    REQUIRE(off.items.size() == 1);
    CHECK_FALSE(off.items[0].polarity);
    auto swap = analyze_task(suite.find("clock_swap_morning"));
    REQUIRE(swap.items.size() == 2);
    CHECK(swap.items[0].polarity != swap.items[1].polarity);
    CHECK(analyze_task(suite.find("clock_delete_sleep")).delete_intent);
    CHECK(analyze_task(suite.find("expenses_add_food")).items[0].kind == GoalKind::kRecord);
  }

  TEST_CASE("progress tracking sees a finished scripted run") {
    for (const auto& task : builtin_task_suite().tasks) {
      INFO(task.task_id);
      Trajectory t = testutil::scripted_trajectory(task);
      auto intent = analyze_task(task);
      CHECK(track_progress(intent, t).all_done());
    }
  }

  TEST_CASE("scripted policy") {
    const TaskSpec& task = builtin_task_suite().find("clock_enable_gym");
    Trajectory t = testutil::scripted_trajectory(task);
    REQUIRE(t.terminal.has_value());
    CHECK(t.rounds.size() == task.solution.size() + 1);
  }

  TEST_CASE("params") {
    PolicyParams p = PolicyParams::zeros();
    CHECK(p.weights.size() == static_cast<std::size_t>(kNumFeatures));
    CHECK_NOTHROW(p.validate());
    p.feature_version = "other";
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = PolicyParams::zeros();
    p.weights.pop_back();
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    for (int f = 0; f < kNumFeatures; ++f) CHECK_FALSE(feature_name(f).empty());
  }

  TEST_CASE("tool call parsing") {
    auto tap = parse_tool_call({"I will tap. {\"name\": \"tap\", \"arguments\": {\"x1\": 1, \"y1\": 2, \"x2\": 3, \"y2\": 4}}",
                                nlohmann::json::array()});
    CHECK(tap == Action(act::Tap{1, 2, 3, 4}));
    CHECK_THROWS_AS(parse_tool_call({"I am done thinking.", nlohmann::json::array()}), InvalidArgument);
    nlohmann::json native = nlohmann::json::array(
        {{{"id", "c1"},
          {"type", "function"},
          {"function", {{"name", "submit"}, {"arguments", R"({"message":"done","evidences":[2,5]})"}}}}});
    auto sub = parse_tool_call({"", native});
    REQUIRE(is_submit(sub));
    CHECK(std::get<act::Submit>(sub).evidences == std::vector<int>{2, 5});
  }

  TEST_CASE("transcript") {
    const TaskSpec& task = builtin_task_suite().find("settings_wifi_on");
    Trajectory t = testutil::scripted_trajectory(task);
    auto msgs = build_policy_transcript("SYS", task.instruction, t, 1 << 20);
    REQUIRE(msgs.size() == 2 + 2 * t.rounds.size());
    CHECK(msgs[0].role == "system");
    CHECK(msgs[1].content.find(task.instruction) != std::string::npos);
    CHECK(msgs[3].content.rfind("[TOOL CALL ID: 0]\n", 0) == 0);
    auto tight = build_policy_transcript("SYS", task.instruction, t, 700);
    std::size_t chars = 0;
    for (const auto& m : tight) chars += m.content.size();
    CHECK(chars / 4 <= 700);
    CHECK(tight[3].content == "[TOOL CALL ID: 0]\n[elided]");
    CHECK_THROWS_AS(build_policy_transcript("SYS", task.instruction, t, 5), InvalidArgument);
  }

  TEST_CASE("llm policy") {
    const TaskSpec& task = builtin_task_suite().find("settings_wifi_on");
    Trajectory t = testutil::scripted_trajectory(task);
    auto client = std::make_shared<CannedClient>(ChatResponse{
        "Evidence is clear. {\"name\":\"submit\",\"arguments\":{\"message\":\"done\",\"evidences\":[2,5]}}",
        nlohmann::json::array()});
    LlmPolicy pol(client, LlmPolicyConfig{});
    auto s = pol.act({}, t, task, 0);
    REQUIRE(s.action.has_value());
    CHECK(is_submit(*s.action));
    CHECK(s.thought.has_value());
    CHECK(client->last.tools.is_array());
    CHECK(client->last.messages[0].content == asset("system_prompt.md"));

    auto mute = std::make_shared<CannedClient>(ChatResponse{"hmm", nlohmann::json::array()});
    LlmPolicy quiet(mute, LlmPolicyConfig{});
    auto q = quiet.act({}, t, task, 0);
    CHECK_FALSE(q.action.has_value());
    CHECK_FALSE(q.format_error.empty());
  }
}
