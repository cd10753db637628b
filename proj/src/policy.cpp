#include "smartsnap/policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "smartsnap/assets.hpp"
#include "smartsnap/error.hpp"

namespace smartsnap {

namespace {

constexpr const char* kFeatureNames[] = {
    "bias_tap", "bias_type", "bias_long_press", "bias_swipe", "bias_back", "bias_home", "bias_wait",
    "bias_enter", "bias_launch", "bias_get_xml", "bias_submit",
    "tap_switch", "tap_edittext", "tap_button", "tap_listitem", "tap_icon", "tap_overlap_pending",
    "tap_full_match_pending", "tap_overlap_instruction", "tap_best_match", "tap_switch_toward",
    "tap_switch_away", "tap_commit_ready", "tap_commit_unready", "tap_cancel", "tap_edit_wanted",
    "tap_edit_unwanted", "tap_edit_filled", "tap_checked_button",
    "type_key_match", "type_key_mismatch", "type_field_filled",
    "long_press_target", "long_press_partial", "long_press_no_delete",
    "swipe_up", "swipe_down", "swipe_search",
    "back_keyboard", "back_screen_done", "back_in_form", "home_in_app", "launch_match", "launch_current",
    "enter_filled", "enter_no_focus",
    "repeat_log", "repeat_last",
    "submit_ev0", "submit_ev1", "submit_ev2", "submit_ev3", "submit_includes_last",
    "submit_includes_last_mutating", "submit_evidence_in_app", "submit_done", "submit_done_fraction",
    "submit_late",
};
static_assert(std::size(kFeatureNames) == kNumFeatures);

const std::set<std::string, std::less<>> kStopwords = {
    "a", "an", "the", "and", "or", "of", "in", "on", "off", "at", "to", "for", "from",
    "with", "by", "is", "it", "this", "that", "be", "as", "my", "your",
};

std::optional<bool> polarity_word(std::string_view t) {
  if (t == "on" || t == "enable" || t == "enabled") return true;
  if (t == "off" || t == "disable" || t == "disabled") return false;
  return std::nullopt;
}

std::optional<GoalKind> verb_kind(std::string_view t) {
  if (t == "turn") return GoalKind::kSwitch;
  if (t == "add" || t == "create") return GoalKind::kRecord;
  if (t == "delete" || t == "remove") return GoalKind::kAbsence;
  return std::nullopt;
}

std::vector<std::string> content_tokens(std::string_view text) {
  auto all = tokenize(text);
  std::erase_if(all, [](const std::string& t) { return is_stopword(t); });
  return all;
}

bool has(const std::vector<std::string>& v, const std::string& t) { return std::find(v.begin(), v.end(), t) != v.end(); }

bool contains_all(const std::vector<std::string>& hay, const std::vector<std::string>& needles) {
  if (needles.empty()) return false;
  for (const auto& n : needles) {
    if (!has(hay, n)) return false;
  }
  return true;
}

double overlap_fraction(const std::vector<std::string>& node, const std::vector<std::string>& item) {
  if (item.empty()) return 0.0;
  int hit = 0;
  for (const auto& t : item) hit += has(node, t) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(item.size());
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <class F>
void walk(const UiNode& n, const UiNode* parent, F&& f) {
  f(n, parent);
  for (const auto& c : n.children) walk(c, &n, f);
}

// Tokens of every record clause, keyed by clause id.
std::map<int, std::vector<std::string>> clause_tokens(const TaskIntent& intent, GoalKind kind) {
  std::map<int, std::vector<std::string>> out;
  for (const auto& it : intent.items) {
    if (it.kind != kind) continue;
    auto& v = out[it.clause];
    v.insert(v.end(), it.tokens.begin(), it.tokens.end());
  }
  return out;
}

bool screen_contains(const UiNode& root, const std::vector<std::string>& tokens) {
  bool found = false;
  walk(root, nullptr, [&](const UiNode& n, const UiNode*) {
    if (!found && contains_all(content_tokens(n.text), tokens)) found = true;
  });
  return found;
}

const UiNode* switch_child(const UiNode& n) {
  for (const auto& c : n.children) {
    if (c.class_name == "Switch") return &c;
  }
  return nullptr;
}

void update_from_screen(const TaskIntent& intent, const UiNode& root, std::vector<GoalStatus>& status) {
  walk(root, nullptr, [&](const UiNode& n, const UiNode*) {
    auto toks = content_tokens(n.text);
    if (n.class_name == "Switch") {
      for (std::size_t i = 0; i < intent.items.size(); ++i) {
        const auto& it = intent.items[i];
        if (it.kind != GoalKind::kSwitch || !contains_all(toks, it.tokens)) continue;
        status[i] = n.checked == it.polarity ? GoalStatus::kSatisfied : GoalStatus::kUnsatisfied;
      }
    }
    if (n.class_name == "ListItem") {
      for (const auto& [clause, tokens] : clause_tokens(intent, GoalKind::kRecord)) {
        if (!contains_all(toks, tokens)) continue;
        for (std::size_t i = 0; i < intent.items.size(); ++i) {
          const auto& it = intent.items[i];
          if (it.kind != GoalKind::kRecord || it.clause != clause) continue;
          const UiNode* sw = switch_child(n);
          bool ok = !it.clause_polar || sw == nullptr || sw->checked == it.polarity;
          status[i] = ok ? GoalStatus::kSatisfied : GoalStatus::kUnsatisfied;
        }
      }
    }
  });
}

std::optional<App> screen_app(const UiNode& root) {
  for (App a : {App::kSettings, App::kExpenses, App::kClock}) {
    if (root.node_id.rfind(std::string(app_id_prefix(a)), 0) == 0) return a;
  }
  return std::nullopt;
}

bool is_commit_text(const std::string& t) {
  auto l = lower(t);
  return l == "save" || l == "delete" || l == "ok" || l == "confirm";
}

double log_sum_exp(const std::vector<double>& s) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : s) m = std::max(m, v);
  double acc = 0.0;
  for (double v : s) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace

std::string_view feature_name(int f) {
  if (f < 0 || f >= kNumFeatures) throw InvalidArgument("feature index out of range");
  return kFeatureNames[f];
}

PolicyParams PolicyParams::zeros() {
  PolicyParams p;
  p.weights.assign(kNumFeatures, 0.0);
  return p;
}

void PolicyParams::validate() const {
  if (feature_version != kFeatureVersion) {
    throw InvalidArgument("policy feature version " + feature_version + " does not match " +
                          std::string(kFeatureVersion));
  }
  if (weights.size() != static_cast<std::size_t>(kNumFeatures)) {
    throw InvalidArgument("policy has " + std::to_string(weights.size()) + " weights, expected " +
                          std::to_string(kNumFeatures));
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw InvalidArgument("policy weights must be finite");
  }
}

double score(const PolicyParams& params, const FeatureVec& f) {
  double s = 0.0;
  for (const auto& [i, v] : f) s += params.weights.at(static_cast<std::size_t>(i)) * v;
  return s;
}

std::vector<double> candidate_logprobs(const PolicyParams& params, const std::vector<FeatureVec>& candidates,
                                       double temperature) {
  if (candidates.empty()) throw InvalidArgument("candidate set is empty");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  std::vector<double> s;
  s.reserve(candidates.size());
  for (const auto& f : candidates) s.push_back(score(params, f) / temperature);
  const double lse = log_sum_exp(s);
  for (auto& v : s) v -= lse;
  return s;
}

double decision_logprob(const PolicyParams& params, const Decision& d) {
  return candidate_logprobs(params, d.candidates, d.temperature).at(static_cast<std::size_t>(d.chosen));
}

void accumulate_logprob_gradient(const PolicyParams& params, const Decision& d, double scale,
                                 std::vector<double>& grad) {
  auto lp = candidate_logprobs(params, d.candidates, d.temperature);
  const double k = scale / d.temperature;
  for (const auto& [i, v] : d.candidates.at(static_cast<std::size_t>(d.chosen))) {
    grad[static_cast<std::size_t>(i)] += k * v;
  }
  for (std::size_t c = 0; c < d.candidates.size(); ++c) {
    const double p = std::exp(lp[c]);
    for (const auto& [i, v] : d.candidates[c]) grad[static_cast<std::size_t>(i)] -= k * p * v;
  }
}

SampledAction sample_action(const PolicyParams& params, const std::vector<CandidateAction>& candidates,
                            double temperature, std::uint64_t seed) {
  std::vector<FeatureVec> feats;
  feats.reserve(candidates.size());
  for (const auto& c : candidates) feats.push_back(c.features);
  auto lp = candidate_logprobs(params, feats, temperature);
  std::mt19937_64 rng(seed);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t pick = lp.size() - 1;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return {static_cast<int>(pick), lp[pick]};
}

// ---- instruction grounding --------------------------------------------------

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto edge = [](char c) { return c == '-' || c == '.' || c == ':'; };
    std::size_t b = 0, e = cur.size();
    while (b < e && edge(cur[b])) ++b;
    while (e > b && edge(cur[e - 1])) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c < 0x80 && (std::isalnum(c) || c == ':' || c == '.' || c == '-')) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool is_stopword(std::string_view token) { return kStopwords.find(token) != kStopwords.end(); }

TaskIntent analyze_task(const TaskSpec& task) {
  TaskIntent intent;
  intent.app = parse_app(task.app);
  intent.content_tokens = content_tokens(task.instruction);
  const auto words = tokenize(task.instruction);
  std::vector<int> verbs;
  for (int i = 0; i < static_cast<int>(words.size()); ++i) {
    if (verb_kind(words[static_cast<std::size_t>(i)])) verbs.push_back(i);
  }
  for (const auto& [key, value] : task.params) {
    GoalItem it;
    it.key = key;
    it.value = value;
    it.tokens = content_tokens(value);
    const auto seq = tokenize(value);
    int pos = 0;
    for (int i = 0; !seq.empty() && i + static_cast<int>(seq.size()) <= static_cast<int>(words.size()); ++i) {
      if (std::equal(seq.begin(), seq.end(), words.begin() + i)) {
        pos = i;
        break;
      }
    }
    int verb = -1, next = static_cast<int>(words.size());
    for (int v : verbs) {
      if (v <= pos) verb = v;
      if (v > pos) {
        next = v;
        break;
      }
    }
    it.clause = verb;
    it.kind = verb >= 0 ? *verb_kind(words[static_cast<std::size_t>(verb)]) : GoalKind::kRecord;
    for (int i = std::max(verb, 0); i < next; ++i) {
      if (auto p = polarity_word(words[static_cast<std::size_t>(i)])) {
        it.polarity = *p;
        it.clause_polar = true;
        break;
      }
    }
    if (it.kind == GoalKind::kAbsence) intent.delete_intent = true;
    intent.items.push_back(std::move(it));
  }
  return intent;
}

int Progress::satisfied() const {
  return static_cast<int>(std::count(status.begin(), status.end(), GoalStatus::kSatisfied));
}

bool Progress::all_done() const { return !status.empty() && satisfied() == static_cast<int>(status.size()); }

Progress track_progress(const TaskIntent& intent, const Trajectory& traj) {
  Progress p;
  p.status.assign(intent.items.size(), GoalStatus::kUnknown);
  const auto absence = clause_tokens(intent, GoalKind::kAbsence);
  std::optional<UiNode> screen;
  for (const auto& r : traj.rounds) {
    if (is_submit(r.action)) continue;
    if (const auto* tap = std::get_if<act::Tap>(&r.action); tap && screen && r.mutated) {
      const UiNode* hit = deepest_clickable_at(*screen, static_cast<long>(tap->x1) + tap->x2,
                                               static_cast<long>(tap->y1) + tap->y2);
      if (hit != nullptr && lower(hit->text) == "delete") {
        for (const auto& [clause, tokens] : absence) {
          if (!screen_contains(*screen, tokens)) continue;
          for (std::size_t i = 0; i < intent.items.size(); ++i) {
            if (intent.items[i].kind == GoalKind::kAbsence && intent.items[i].clause == clause) {
              p.status[i] = GoalStatus::kSatisfied;
            }
          }
        }
      }
    }
    if (auto parsed = parse_xml(r.tool_response)) {
      update_from_screen(intent, *parsed, p.status);
      screen = std::move(parsed);
    }
  }
  p.last_screen = std::move(screen);
  return p;
}

// ---- candidates ---------------------------------------------------------------

namespace {

struct ScreenView {
  const UiNode& root;
  bool keyboard;
  std::vector<const UiNode*> reachable;  // clickable nodes a tap on their center would hit
  std::vector<const UiNode*> scrollables;
  const UiNode* focused = nullptr;
  bool has_edit = false;
  std::optional<App> app;
};

ScreenView view_of(const Observation& obs) {
  ScreenView v{obs.root, obs.keyboard_visible, {}, {}, nullptr, false, screen_app(obs.root)};
  walk(obs.root, nullptr, [&](const UiNode& n, const UiNode*) {
    if (n.class_name == "EditText") {
      v.has_edit = true;
      if (n.focused) v.focused = &n;
    }
    if (n.scrollable) v.scrollables.push_back(&n);
    if (!n.clickable) return;
    const long cx = static_cast<long>(n.bounds.x1) + n.bounds.x2;
    const long cy = static_cast<long>(n.bounds.y1) + n.bounds.y2;
    if (obs.keyboard_visible && cy >= 2L * kKeyboardTop) return;
    if (deepest_clickable_at(obs.root, cx, cy) == &n) v.reachable.push_back(&n);
  });
  return v;
}

class Featurizer {
 public:
  Featurizer(const Observation& obs, const Trajectory& traj, const TaskSpec& task, const TaskIntent& intent)
      : obs_(obs), traj_(traj), task_(task), intent_(intent), view_(view_of(obs)),
        progress_(track_progress(intent, traj)) {
    for (std::size_t i = 0; i < intent_.items.size(); ++i) {
      if (progress_.status[i] != GoalStatus::kSatisfied) pending_.push_back(&intent_.items[i]);
    }
    for (const auto& r : traj_.rounds) {
      if (r.round_id == 0 || is_submit(r.action)) continue;
      last_exec_ = &r.action;
    }
  }

  std::vector<CandidateAction> build() {
    std::vector<CandidateAction> exec;
    add_taps(exec);
    add_types(exec);
    add_long_presses(exec);
    add_swipes(exec);
    add_navigation(exec);
    for (auto& c : exec) add_repeat(c);
    auto submits = build_submits();
    if (exec.size() + submits.size() > kMaxCandidates) exec.resize(kMaxCandidates - submits.size());
    exec.insert(exec.end(), std::make_move_iterator(submits.begin()), std::make_move_iterator(submits.end()));
    return exec;
  }

 private:
  // Max fraction of a pending non-deletion item covered by the node text.
  double pending_overlap(const std::vector<std::string>& toks, bool* full) const {
    double best = 0.0;
    for (const auto* it : pending_) {
      if (it->kind == GoalKind::kAbsence) continue;
      double f = overlap_fraction(toks, it->tokens);
      if (f >= 1.0 && full) *full = true;
      best = std::max(best, f);
    }
    return best;
  }

  // +1 toward the goal, -1 away from it, 0 unrelated.
  int switch_direction(const UiNode& n) const {
    auto toks = content_tokens(n.text);
    for (const auto& it : intent_.items) {
      if (it.kind == GoalKind::kSwitch && contains_all(toks, it.tokens)) return n.checked == it.polarity ? -1 : 1;
    }
    for (const auto& [clause, tokens] : clause_tokens(intent_, GoalKind::kRecord)) {
      if (!contains_all(toks, tokens)) continue;
      for (const auto& it : intent_.items) {
        if (it.clause == clause && it.clause_polar) return n.checked == it.polarity ? -1 : 1;
      }
    }
    // Fall back to the instruction word nearest the switch label.
    const auto words = tokenize(task_.instruction);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (is_stopword(words[i]) && !polarity_word(words[i])) continue;
      if (!has(toks, words[i])) continue;
      bool want = !intent_.delete_intent;
      for (std::size_t j = i + 1; j-- > 0;) {
        if (auto p = polarity_word(words[j])) {
          want = *p;
          break;
        }
      }
      return n.checked == want ? -1 : 1;
    }
    return 0;
  }

  bool save_ready() const {
    bool any = false;
    for (const auto* it : pending_) {
      if (it->kind != GoalKind::kRecord) continue;
      any = true;
      bool present = false;
      walk(view_.root, nullptr, [&](const UiNode& n, const UiNode*) {
        if (n.class_name == "EditText" && n.text == it->value) present = true;
        if (n.class_name == "Button" && n.checked && contains_all(content_tokens(n.text), it->tokens)) present = true;
      });
      if (!present) return false;
    }
    if (!any) return false;
    for (const UiNode* n : view_.reachable) {
      if (n->class_name == "Switch" && switch_direction(*n) > 0) return false;
    }
    return true;
  }

  bool delete_ready() const {
    for (const auto& [clause, tokens] : clause_tokens(intent_, GoalKind::kAbsence)) {
      bool pending = false;
      for (const auto* it : pending_) pending = pending || (it->kind == GoalKind::kAbsence && it->clause == clause);
      if (pending && screen_contains(view_.root, tokens)) return true;
    }
    return false;
  }

  bool has_pending_key_field(const UiNode& n) const {
    for (const auto* it : pending_) {
      if (it->kind == GoalKind::kRecord && n.node_id.find(it->key) != std::string::npos) return true;
    }
    return false;
  }

  void add_taps(std::vector<CandidateAction>& out) {
    struct Row {
      const UiNode* n;
      double overlap;
    };
    std::vector<Row> rows;
    double best = 0.0;
    for (const UiNode* n : view_.reachable) {
      double o = pending_overlap(content_tokens(n->text), nullptr);
      rows.push_back({n, o});
      best = std::max(best, o);
    }
    any_relevant_ = best > 0.0;
    const bool save_ok = save_ready();
    const bool delete_ok = delete_ready();
    for (const auto& [n, overlap] : rows) {
      const auto toks = content_tokens(n->text);
      FeatureVec f{{kBiasTap, 1.0}};
      const std::string& cls = n->class_name;
      if (cls == "Switch") f.emplace_back(kTapSwitch, 1.0);
      if (cls == "EditText") f.emplace_back(kTapEditText, 1.0);
      if (cls == "Button") f.emplace_back(kTapButton, 1.0);
      if (cls == "ListItem") f.emplace_back(kTapListItem, 1.0);
      if (cls == "Icon") f.emplace_back(kTapIcon, 1.0);
      bool full = false;
      pending_overlap(toks, &full);
      if (overlap > 0) f.emplace_back(kTapOverlapPending, overlap);
      if (full) f.emplace_back(kTapFullMatchPending, 1.0);
      for (const auto& t : toks) {
        if (has(intent_.content_tokens, t)) {
          f.emplace_back(kTapOverlapInstruction, 1.0);
          break;
        }
      }
      if (overlap > 0 && overlap == best) f.emplace_back(kTapBestMatch, 1.0);
      if (cls == "Switch") {
        int dir = switch_direction(*n);
        if (dir > 0) f.emplace_back(kTapSwitchToward, 1.0);
        if (dir < 0) f.emplace_back(kTapSwitchAway, 1.0);
      }
      if (is_commit_text(n->text)) {
        const bool ready = lower(n->text) == "delete" ? delete_ok : save_ok;
        f.emplace_back(ready ? kTapCommitReady : kTapCommitUnready, 1.0);
      }
      if (lower(n->text) == "cancel") f.emplace_back(kTapCancel, 1.0);
      if (cls == "EditText") {
        if (!n->text.empty()) {
          f.emplace_back(kTapEditFilled, 1.0);
        } else {
          f.emplace_back(has_pending_key_field(*n) ? kTapEditWanted : kTapEditUnwanted, 1.0);
        }
      }
      if (cls == "Button" && n->checked) f.emplace_back(kTapCheckedButton, 1.0);
      out.push_back({act::Tap{n->bounds.x1, n->bounds.y1, n->bounds.x2, n->bounds.y2}, std::move(f)});
    }
  }

  void add_types(std::vector<CandidateAction>& out) {
    if (!view_.keyboard || view_.focused == nullptr) return;
    std::set<std::string> seen;
    for (const auto& it : intent_.items) {
      if (!seen.insert(it.value).second) continue;
      FeatureVec f{{kBiasType, 1.0}};
      f.emplace_back(view_.focused->node_id.find(it.key) != std::string::npos ? kTypeKeyMatch : kTypeKeyMismatch,
                     1.0);
      if (!view_.focused->text.empty()) f.emplace_back(kTypeFieldFilled, 1.0);
      out.push_back({act::Type{it.value}, std::move(f)});
    }
  }

  void add_long_presses(std::vector<CandidateAction>& out) {
    const auto absence = clause_tokens(intent_, GoalKind::kAbsence);
    for (const UiNode* n : view_.reachable) {
      if (n->class_name != "ListItem") continue;
      const auto toks = content_tokens(n->text);
      FeatureVec f{{kBiasLongPress, 1.0}};
      bool target = false, partial = false;
      for (const auto& [clause, tokens] : absence) {
        if (contains_all(toks, tokens)) target = true;
        else if (overlap_fraction(toks, tokens) > 0) partial = true;
      }
      if (target) {
        f.emplace_back(kLongPressTarget, 1.0);
        any_relevant_ = true;
      } else if (partial) {
        f.emplace_back(kLongPressPartial, 1.0);
      }
      if (!intent_.delete_intent) f.emplace_back(kLongPressNoDelete, 1.0);
      out.push_back({act::LongPress{n->bounds.x1, n->bounds.y1, n->bounds.x2, n->bounds.y2}, std::move(f)});
    }
  }

  void add_swipes(std::vector<CandidateAction>& out) {
    for (const UiNode* n : view_.scrollables) {
      const Rect& b = n->bounds;
      for (auto dir : {act::Direction::kUp, act::Direction::kDown}) {
        FeatureVec f{{kBiasSwipe, 1.0}};
        f.emplace_back(dir == act::Direction::kUp ? kSwipeUp : kSwipeDown, 1.0);
        if (dir == act::Direction::kUp && !any_relevant_) f.emplace_back(kSwipeSearch, 1.0);
        out.push_back({act::Swipe{b.x1, b.y1, b.x2, b.y2, dir, act::Distance::kMedium}, std::move(f)});
      }
    }
  }

  bool screen_done() const {
    if (pending_.empty() || any_relevant_) return false;
    for (const UiNode* n : view_.reachable) {
      if (n->class_name == "Switch" && switch_direction(*n) > 0) return false;
    }
    return view_.app.has_value() && view_.app == intent_.app;
  }

  void add_navigation(std::vector<CandidateAction>& out) {
    const bool in_app = view_.app.has_value() && view_.app == intent_.app;
    {
      FeatureVec f{{kBiasBack, 1.0}};
      if (view_.keyboard) f.emplace_back(kBackKeyboard, 1.0);
      if (screen_done()) f.emplace_back(kBackScreenDone, 1.0);
      if (view_.has_edit) f.emplace_back(kBackInForm, 1.0);
      out.push_back({act::Back{}, std::move(f)});
    }
    {
      FeatureVec f{{kBiasHome, 1.0}};
      if (in_app) f.emplace_back(kHomeInApp, 1.0);
      out.push_back({act::Home{}, std::move(f)});
    }
    for (App a : {App::kSettings, App::kExpenses, App::kClock}) {
      FeatureVec f{{kBiasLaunch, 1.0}};
      if (has(intent_.content_tokens, lower(app_name(a)))) f.emplace_back(kLaunchMatch, 1.0);
      if (view_.app == a) f.emplace_back(kLaunchCurrent, 1.0);
      out.push_back({act::Launch{std::string(app_name(a))}, std::move(f)});
    }
    {
      FeatureVec f{{kBiasEnter, 1.0}};
      if (view_.focused == nullptr) f.emplace_back(kEnterNoFocus, 1.0);
      else if (!view_.focused->text.empty()) f.emplace_back(kEnterFilled, 1.0);
      out.push_back({act::Enter{}, std::move(f)});
    }
    out.push_back({act::Wait{1.0}, {{kBiasWait, 1.0}}});
    out.push_back({act::GetCurrentXml{}, {{kBiasGetXml, 1.0}}});
  }

  void add_repeat(CandidateAction& c) const {
    int count = 0;
    for (const auto& r : traj_.rounds) {
      if (r.round_id != 0 && r.action == c.action) ++count;
    }
    if (count > 0) c.features.emplace_back(kRepeatLog, std::log1p(static_cast<double>(count)));
    if (last_exec_ != nullptr && *last_exec_ == c.action) c.features.emplace_back(kRepeatLast, 1.0);
  }

  std::vector<CandidateAction> build_submits() const {
    std::vector<CandidateAction> out;
    if (traj_.rounds.empty()) return out;
    const std::string prefix = intent_.app ? "id=\"" + std::string(app_id_prefix(*intent_.app)) : std::string();
    auto in_app = [&](int idx) {
      return !prefix.empty() &&
             traj_.rounds[static_cast<std::size_t>(idx)].tool_response.find(prefix) != std::string::npos;
    };
    std::vector<int> relevant;
    int last = -1, last_mut = -1;
    for (const auto& r : traj_.rounds) {
      if (is_submit(r.action)) continue;
      last = r.round_id;
      if (r.round_id > 0 && r.mutated) last_mut = r.round_id;
      if (in_app(r.round_id)) relevant.push_back(r.round_id);
    }
    if (relevant.size() > 3) relevant.erase(relevant.begin(), relevant.end() - 3);
    std::vector<std::vector<int>> sets;
    const int k = static_cast<int>(relevant.size());
    auto rel = [&](int i) { return relevant[static_cast<std::size_t>(i)]; };
    if (k >= 1) sets.push_back({rel(k - 1)});
    if (k >= 2) sets.push_back({rel(k - 2), rel(k - 1)});
    if (k >= 3) sets.push_back({rel(0), rel(1), rel(2)});
    if (k >= 2) sets.push_back({rel(k - 2)});
    if (k >= 3) sets.push_back({rel(0)});
    if (k >= 3) sets.push_back({rel(0), rel(2)});
    sets.push_back({last});
    sets.push_back({});
    std::vector<std::vector<int>> uniq;
    for (auto& s : sets) {
      if (std::find(uniq.begin(), uniq.end(), s) == uniq.end()) uniq.push_back(s);
    }
    if (uniq.size() > kMaxSubmitCandidates) uniq.resize(kMaxSubmitCandidates);

    const int total = static_cast<int>(intent_.items.size());
    const double frac = total > 0 ? static_cast<double>(progress_.satisfied()) / total : 0.0;
    for (const auto& s : uniq) {
      FeatureVec f{{kBiasSubmit, 1.0}};
      static constexpr Feature kSize[] = {kSubmitEv0, kSubmitEv1, kSubmitEv2, kSubmitEv3};
      f.emplace_back(kSize[std::min<std::size_t>(s.size(), 3)], 1.0);
      if (std::find(s.begin(), s.end(), last) != s.end()) f.emplace_back(kSubmitIncludesLast, 1.0);
      if (last_mut >= 0 && std::find(s.begin(), s.end(), last_mut) != s.end()) {
        f.emplace_back(kSubmitIncludesLastMutating, 1.0);
      }
      if (!s.empty() && std::all_of(s.begin(), s.end(), in_app)) f.emplace_back(kSubmitEvidenceInApp, 1.0);
      if (progress_.all_done()) f.emplace_back(kSubmitDone, 1.0);
      if (frac > 0) f.emplace_back(kSubmitDoneFraction, frac);
      f.emplace_back(kSubmitLate, static_cast<double>(traj_.rounds.size()) / std::max(1, traj_.max_turns));
      out.push_back({act::Submit{"I have completed the task.", s}, std::move(f)});
    }
    return out;
  }

  const Observation& obs_;
  const Trajectory& traj_;
  const TaskSpec& task_;
  const TaskIntent& intent_;
  ScreenView view_;
  Progress progress_;
  std::vector<const GoalItem*> pending_;
  const Action* last_exec_ = nullptr;
  bool any_relevant_ = false;
};

}  // namespace

std::vector<CandidateAction> enumerate_candidates(const Observation& obs, const Trajectory& traj,
                                                  const TaskSpec& task, const TaskIntent& intent) {
  return Featurizer(obs, traj, task, intent).build();
}

std::vector<CandidateAction> enumerate_candidates(const Observation& obs, const Trajectory& traj,
                                                  const TaskSpec& task) {
  return enumerate_candidates(obs, traj, task, analyze_task(task));
}

// ---- policies -----------------------------------------------------------------

ToyPolicy::ToyPolicy(PolicyParams params, double temperature) : params_(std::move(params)), temperature_(temperature) {
  params_.validate();
  if (!(temperature_ > 0.0)) throw InvalidArgument("temperature must be positive");
}

PolicyStep ToyPolicy::act(const Observation& obs, const Trajectory& traj, const TaskSpec& task, std::uint64_t seed) {
  if (intent_task_ != task.task_id || intent_task_.empty()) {
    intent_ = analyze_task(task);
    intent_task_ = task.task_id;
  }
  auto cands = enumerate_candidates(obs, traj, task, intent_);
  auto pick = sample_action(params_, cands, temperature_, seed);
  Decision d;
  d.candidates.reserve(cands.size());
  for (const auto& c : cands) d.candidates.push_back(c.features);
  d.chosen = pick.index;
  d.temperature = temperature_;
  d.logprob = pick.logprob;
  PolicyStep step;
  step.action = cands[static_cast<std::size_t>(pick.index)].action;
  step.decision = std::move(d);
  return step;
}

PolicyStep ScriptedPolicy::act(const Observation&, const Trajectory& traj, const TaskSpec& task, std::uint64_t) {
  PolicyStep step;
  const std::size_t done = traj.rounds.empty() ? 0 : traj.rounds.size() - 1;
  if (done < task.solution.size()) {
    step.action = task.solution[done];
  } else {
    step.action = act::Submit{"I have completed the task.", {static_cast<int>(traj.rounds.size()) - 1}};
  }
  return step;
}

std::vector<ChatMessage> build_policy_transcript(const std::string& system_prompt, const std::string& instruction,
                                                 const Trajectory& traj, int context_budget_tokens) {
  std::string user = std::string(asset("user_prompt.md"));
  if (auto pos = user.find("{task_content}"); pos != std::string::npos) {
    user.replace(pos, std::string_view("{task_content}").size(), instruction);
  }
  std::vector<ChatMessage> msgs{{"system", system_prompt}, {"user", user}};
  const std::size_t head = msgs.size();
  for (const auto& r : traj.rounds) {
    std::string call = r.thought ? *r.thought + "\n" : std::string();
    call += action_to_json(r.action).dump();
    msgs.push_back({"assistant", call});
    msgs.push_back({"user", tool_call_label(r.round_id) + "\n" + r.tool_response});
  }
  auto estimate = [&] {
    std::size_t chars = 0;
    for (const auto& m : msgs) chars += m.content.size();
    return chars / 4;
  };
  const auto budget = static_cast<std::size_t>(std::max(context_budget_tokens, 0));
  for (std::size_t i = head + 1; estimate() > budget && i < msgs.size(); i += 2) {
    const std::string label = msgs[i].content.substr(0, msgs[i].content.find('\n'));
    msgs[i].content = label + "\n[elided]";
  }
  if (estimate() > budget) throw InvalidArgument("transcript exceeds the context budget");
  return msgs;
}

namespace {

std::optional<Action> call_from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  const nlohmann::json* body = &j;
  if (j.contains("function") && j["function"].is_object()) body = &j["function"];
  if (!body->contains("name")) return std::nullopt;
  try {
    return action_from_json(*body);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

}  // namespace

Action parse_tool_call(const ChatResponse& response) {
  if (response.tool_calls.is_array()) {
    for (const auto& c : response.tool_calls) {
      if (auto a = call_from_json(c)) return *a;
    }
  }
  const std::string& s = response.content;
  for (std::size_t start = s.find('{'); start != std::string::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false, esc = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      char c = s[i];
      if (in_str) {
        if (esc) esc = false;
        else if (c == '\\') esc = true;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = nlohmann::json::parse(s.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded()) {
          if (auto a = call_from_json(j)) return *a;
        }
        break;
      }
    }
  }
  throw InvalidArgument("no parsable tool call in model output");
}

LlmPolicy::LlmPolicy(std::shared_ptr<ChatClient> client, LlmPolicyConfig cfg)
    : client_(std::move(client)), cfg_(std::move(cfg)),
      tools_(nlohmann::json::parse(asset("tool_schemas.json"))) {}

PolicyStep LlmPolicy::act(const Observation&, const Trajectory& traj, const TaskSpec& task, std::uint64_t) {
  ChatRequest req;
  req.model = cfg_.model;
  req.temperature = cfg_.temperature;
  req.max_tokens = cfg_.max_tokens;
  req.tools = tools_;
  req.messages = build_policy_transcript(std::string(asset("system_prompt.md")), task.instruction, traj,
                                         cfg_.context_budget_tokens);
  auto resp = client_->complete(req);
  PolicyStep step;
  step.raw = resp.content;
  if (!resp.content.empty()) step.thought = resp.content;
  try {
    step.action = parse_tool_call(resp);
  } catch (const InvalidArgument& e) {
    step.format_error = e.what();
  }
  return step;
}

}  // namespace smartsnap
