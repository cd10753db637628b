#pragma once

// Deterministic simulated phone with three toy apps (Settings, Expenses,
// Clock). Everything here is a pure function of (WorldState, Action); the
// World class is a thin mutable wrapper used by rollouts.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smartsnap/action.hpp"

namespace smartsnap {

inline constexpr int kScreenWidth = 1080;
inline constexpr int kScreenHeight = 1920;
// Keyboard overlay occupies the lower part of the screen while visible.
inline constexpr int kKeyboardTop = 1300;

enum class App { kHome, kSettings, kExpenses, kClock };

std::string_view app_name(App app);
// Case-insensitive lookup of a launchable app ("settings", "Clock", ...).
std::optional<App> parse_app(std::string_view name);
// Lower-case prefix shared by every node id belonging to the app.
std::string_view app_id_prefix(App app);

struct Rect {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool valid() const { return x1 < x2 && y1 < y2; }
  bool contains(const Rect& o) const {
    return x1 <= o.x1 && y1 <= o.y1 && o.x2 <= x2 && o.y2 <= y2;
  }
  // Point given in doubled coordinates so that .5 centers stay exact.
  bool contains_doubled(long px2, long py2) const {
    return 2L * x1 <= px2 && px2 < 2L * x2 && 2L * y1 <= py2 && py2 < 2L * y2;
  }
  bool operator==(const Rect&) const = default;
};

struct UiNode {
  std::string node_id;
  std::string class_name;
  Rect bounds;
  std::string text;
  bool clickable = false;
  bool scrollable = false;
  bool checked = false;
  bool focused = false;
  std::vector<UiNode> children;

  bool operator==(const UiNode&) const = default;
};

struct Transaction {
  int id = 0;
  std::int64_t amount_cents = 0;  // expenses negative, income positive
  std::string date;               // YYYY-MM-DD
  std::string category;
  bool operator==(const Transaction&) const = default;
};

struct ExpenseDraft {
  std::string amount;
  std::string date;
  std::string category;
  bool income = false;
  bool operator==(const ExpenseDraft&) const = default;
};

struct ExpensesData {
  std::vector<Transaction> transactions;
  int next_id = 1;
  std::optional<int> last_added_id;
  ExpenseDraft draft;
  bool operator==(const ExpensesData&) const = default;
};

struct Alarm {
  int id = 0;
  std::string time;  // HH:MM
  std::string label;
  bool enabled = false;
  bool operator==(const Alarm&) const = default;
};

struct AlarmDraft {
  std::string time;
  std::string label;
  bool enabled = false;
  bool operator==(const AlarmDraft&) const = default;
};

struct ClockData {
  std::vector<Alarm> alarms;
  int next_id = 1;
  AlarmDraft draft;
  bool operator==(const ClockData&) const = default;
};

struct WorldState {
  App current_app = App::kHome;
  // Screen identifiers, bottom to top. "home" is always the bottom entry.
  std::vector<std::string> screen_stack{"home"};
  std::map<std::string, bool> toggles;  // Settings app
  ExpensesData expenses;
  ClockData clock;
  bool keyboard_visible = false;
  std::string focused;               // node id of the focused input, empty if none
  std::map<std::string, int> scroll;  // scroll container id -> first visible row
  std::uint64_t rng_seed = 0;

  const std::string& top_screen() const { return screen_stack.back(); }
  bool operator==(const WorldState&) const = default;
};

// Factory-fresh device: fixed settings, eight seeded transactions, three alarms.
WorldState default_world_state();

// Rendered view of the current screen handed to agents.
struct Observation {
  std::string screen_id;
  UiNode root;
  std::string xml;
  bool keyboard_visible = false;
};

struct StepResult {
  WorldState state;
  Observation observation;
  // Rendered XML for effective actions, "no-op: <reason>" for misses.
  std::string tool_response;
  bool mutated = false;
};

// Element tree for the screen on top of the stack.
UiNode build_screen(const WorldState& state);

// Canonical XML: attributes in fixed order, two-space indent, trailing newline.
std::string render_xml(const UiNode& root);
std::string render_xml(const WorldState& state);

Observation observe(const WorldState& state);

// Inverse of render_xml. Returns nullopt for anything that is not a canonical
// rendering (no-op messages, truncated text).
std::optional<UiNode> parse_xml(std::string_view xml);

// Pure transition. Submit is rejected with InvalidArgument; it terminates the
// episode and never reaches the environment.
StepResult step(const WorldState& state, const Action& action);

// Checks UiNode/WorldState invariants, returning a description of every
// violation (empty when the state is well formed).
std::vector<std::string> check_invariants(const WorldState& state);
std::vector<std::string> check_invariants(const UiNode& root);

// Deepest clickable node whose bounds contain the doubled-coordinate point.
const UiNode* deepest_clickable_at(const UiNode& root, long px2, long py2);
const UiNode* find_node(const UiNode& root, std::string_view node_id);

// Display form of an amount, e.g. "−4.50" (U+2212) or "+1500.00".
std::string format_amount(std::int64_t cents);
// Parses "12.5" / "12.50" / "12" into cents; nullopt when malformed or <= 0.
std::optional<std::int64_t> parse_amount(std::string_view text);

}  // namespace smartsnap
