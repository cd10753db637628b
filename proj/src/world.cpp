#include "smartsnap/world.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "smartsnap/error.hpp"

namespace smartsnap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---- layout constants ------------------------------------------------------

constexpr Rect kFullScreen{0, 0, kScreenWidth, kScreenHeight};
constexpr Rect kTitle{40, 60, 1040, 180};
constexpr Rect kKeyboard{0, kKeyboardTop, kScreenWidth, kScreenHeight};

struct ListGeometry {
  const char* container_id;
  const char* screen_id;
  Rect bounds;
  int row_height;
  int visible_rows;
};

constexpr ListGeometry kSettingsList{"settings_list", "settings.main", {0, 240, 1080, 1200}, 240, 4};
constexpr ListGeometry kExpensesList{"expenses_list", "expenses.list", {0, 360, 1080, 1560}, 240, 5};
constexpr ListGeometry kClockList{"clock_list", "clock.alarms", {0, 360, 1080, 1560}, 200, 6};

constexpr std::size_t kMaxAlarms = 6;
constexpr std::size_t kMaxInputLength = 32;
constexpr const char* kToday = "2024-05-10";

struct SettingsRow {
  const char* key;
  const char* text;
};

constexpr SettingsRow kSettingsRows[] = {
    {"network", "Network & internet: Wi-Fi, Bluetooth, Airplane mode"},
    {"display", "Display: Dark theme, Auto-rotate screen"},
    {"sound", "Sound: Do not disturb, Vibrate for calls"},
    {"location", "Location: Use location"},
    {"battery", "Battery: Battery Saver"},
};

struct ToggleSpec {
  const char* key;
  const char* label;
};

struct TogglePage {
  const char* page;  // settings.<page>
  const char* title;
  std::vector<ToggleSpec> toggles;
};

const std::vector<TogglePage>& toggle_pages() {
  static const std::vector<TogglePage> pages = {
      {"network", "Network & internet",
       {{"wifi", "Wi-Fi"}, {"bluetooth", "Bluetooth"}, {"airplane", "Airplane mode"}}},
      {"display", "Display", {{"dark_theme", "Dark theme"}, {"auto_rotate", "Auto-rotate screen"}}},
      {"sound", "Sound", {{"dnd", "Do not disturb"}, {"vibrate", "Vibrate for calls"}}},
      {"location", "Location", {{"location", "Use location"}}},
      {"battery", "Battery", {{"battery_saver", "Battery Saver"}}},
  };
  return pages;
}

constexpr const char* kCategories[] = {"Food", "Transport", "Shopping", "Bills", "Salary", "Gift"};

// ---- small helpers ----------------------------------------------------------

UiNode make_node(std::string id, std::string cls, Rect r, std::string text = {},
                 bool clickable = false) {
  UiNode n;
  n.node_id = std::move(id);
  n.class_name = std::move(cls);
  n.bounds = r;
  n.text = std::move(text);
  n.clickable = clickable;
  return n;
}

bool starts_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Parses the numeric suffix after `prefix` (e.g. "expenses_txn_12" -> 12).
std::optional<int> id_suffix(std::string_view id, std::string_view prefix,
                             std::string_view suffix = {}) {
  if (!starts_with(id, prefix)) return std::nullopt;
  auto rest = id.substr(prefix.size());
  if (!suffix.empty()) {
    if (rest.size() <= suffix.size() || rest.substr(rest.size() - suffix.size()) != suffix) {
      return std::nullopt;
    }
    rest = rest.substr(0, rest.size() - suffix.size());
  }
  if (rest.empty() || rest.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : rest) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

bool valid_date(std::string_view d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
  }
  int month = (d[5] - '0') * 10 + (d[6] - '0');
  int day = (d[8] - '0') * 10 + (d[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool valid_time(std::string_view t) {
  if (t.size() != 5 || t[2] != ':') return false;
  for (int i : {0, 1, 3, 4}) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  int h = (t[0] - '0') * 10 + (t[1] - '0');
  int m = (t[3] - '0') * 10 + (t[4] - '0');
  return h < 24 && m < 60;
}

std::vector<Transaction> sorted_transactions(const ExpensesData& e) {
  auto txns = e.transactions;
  std::stable_sort(txns.begin(), txns.end(), [](const Transaction& a, const Transaction& b) {
    if (a.date != b.date) return a.date > b.date;
    return a.id > b.id;
  });
  return txns;
}

std::vector<Alarm> sorted_alarms(const ClockData& c) {
  auto alarms = c.alarms;
  std::stable_sort(alarms.begin(), alarms.end(),
                   [](const Alarm& a, const Alarm& b) { return a.time < b.time; });
  return alarms;
}

std::string transaction_text(const Transaction& t) {
  return format_amount(t.amount_cents) + " " + t.category + " " + t.date;
}

std::string alarm_text(const Alarm& a) {
  return a.label.empty() ? a.time : a.time + " " + a.label;
}

int list_size(const WorldState& s, const ListGeometry& g) {
  if (g.container_id == kSettingsList.container_id) return static_cast<int>(std::size(kSettingsRows));
  if (g.container_id == kExpensesList.container_id) {
    return static_cast<int>(s.expenses.transactions.size());
  }
  return static_cast<int>(s.clock.alarms.size());
}

int max_offset(const WorldState& s, const ListGeometry& g) {
  return std::max(0, list_size(s, g) - g.visible_rows);
}

int scroll_offset(const WorldState& s, const ListGeometry& g) {
  auto it = s.scroll.find(g.container_id);
  int off = it == s.scroll.end() ? 0 : it->second;
  return std::clamp(off, 0, max_offset(s, g));
}

const ListGeometry* list_by_id(std::string_view id) {
  for (const ListGeometry* g : {&kSettingsList, &kExpensesList, &kClockList}) {
    if (id == g->container_id) return g;
  }
  return nullptr;
}

UiNode list_container(const WorldState& s, const ListGeometry& g) {
  UiNode list = make_node(g.container_id, "RecyclerView", g.bounds);
  list.scrollable = max_offset(s, g) > 0;
  return list;
}

Rect list_row(const ListGeometry& g, int visible_index) {
  int top = g.bounds.y1 + visible_index * g.row_height;
  return {g.bounds.x1, top, g.bounds.x2, top + g.row_height};
}

UiNode root_for(std::string_view prefix, const std::string& title) {
  UiNode root = make_node(std::string(prefix) + "_root", "FrameLayout", kFullScreen);
  root.children.push_back(make_node(std::string(prefix) + "_title", "TextView", kTitle, title));
  return root;
}

UiNode dialog(std::string_view prefix, const std::string& message) {
  std::string p(prefix);
  UiNode d = make_node(p + "_dialog", "Dialog", {80, 700, 1000, 1200});
  d.children.push_back(make_node(p + "_dialog_message", "TextView", {120, 740, 960, 900}, message));
  d.children.push_back(make_node(p + "_dialog_cancel", "Button", {120, 1000, 500, 1140}, "Cancel", true));
  d.children.push_back(make_node(p + "_dialog_delete", "Button", {580, 1000, 960, 1140}, "Delete", true));
  return d;
}

UiNode edit_text(const WorldState& s, std::string id, Rect r, const std::string& value) {
  UiNode n = make_node(id, "EditText", r, value, true);
  n.focused = s.focused == id;
  return n;
}

// ---- screens ---------------------------------------------------------------

UiNode home_screen() {
  UiNode root = root_for("home", "Home");
  root.children.push_back(make_node("home_app_settings", "Icon", {60, 400, 340, 680}, "Settings", true));
  root.children.push_back(make_node("home_app_expenses", "Icon", {400, 400, 680, 680}, "Expenses", true));
  root.children.push_back(make_node("home_app_clock", "Icon", {740, 400, 1020, 680}, "Clock", true));
  return root;
}

UiNode settings_main(const WorldState& s) {
  UiNode root = root_for("settings", "Settings");
  UiNode list = list_container(s, kSettingsList);
  int off = scroll_offset(s, kSettingsList);
  int n = static_cast<int>(std::size(kSettingsRows));
  for (int i = 0; i < kSettingsList.visible_rows && off + i < n; ++i) {
    const auto& row = kSettingsRows[off + i];
    list.children.push_back(make_node(std::string("settings_row_") + row.key, "ListItem",
                                      list_row(kSettingsList, i), row.text, true));
  }
  root.children.push_back(std::move(list));
  return root;
}

UiNode settings_page(const WorldState& s, const TogglePage& page) {
  UiNode root = root_for("settings", page.title);
  int y = 260;
  for (const auto& t : page.toggles) {
    UiNode sw = make_node(std::string("settings_") + t.key + "_toggle", "Switch", {40, y, 1040, y + 160},
                          t.label, true);
    auto it = s.toggles.find(t.key);
    sw.checked = it != s.toggles.end() && it->second;
    root.children.push_back(std::move(sw));
    y += 200;
  }
  return root;
}

UiNode expenses_list(const WorldState& s) {
  UiNode root = root_for("expenses", "Expenses");
  root.children.push_back(make_node("expenses_add_button", "Button", {40, 220, 1040, 340}, "Add transaction", true));
  UiNode list = list_container(s, kExpensesList);
  auto txns = sorted_transactions(s.expenses);
  int off = scroll_offset(s, kExpensesList);
  for (int i = 0; i < kExpensesList.visible_rows && off + i < static_cast<int>(txns.size()); ++i) {
    const auto& t = txns[off + i];
    list.children.push_back(make_node("expenses_txn_" + std::to_string(t.id), "ListItem",
                                      list_row(kExpensesList, i), transaction_text(t), true));
  }
  root.children.push_back(std::move(list));
  return root;
}

UiNode expenses_add(const WorldState& s) {
  const auto& d = s.expenses.draft;
  UiNode root = root_for("expenses", "Add transaction");
  root.children.push_back(make_node("expenses_amount_label", "TextView", {40, 220, 1040, 280}, "Amount"));
  root.children.push_back(edit_text(s, "expenses_amount_input", {40, 290, 1040, 410}, d.amount));
  root.children.push_back(make_node("expenses_date_label", "TextView", {40, 430, 1040, 490}, "Date (YYYY-MM-DD)"));
  root.children.push_back(edit_text(s, "expenses_date_input", {40, 500, 1040, 620}, d.date));
  root.children.push_back(make_node("expenses_category_label", "TextView", {40, 640, 1040, 700}, "Category"));
  for (int i = 0; i < static_cast<int>(std::size(kCategories)); ++i) {
    int col = i % 3, row = i / 3;
    Rect r{40 + col * 340, 720 + row * 140, 340 + col * 340, 840 + row * 140};
    UiNode b = make_node("expenses_cat_" + lower(kCategories[i]), "Button", r, kCategories[i], true);
    b.checked = d.category == kCategories[i];
    root.children.push_back(std::move(b));
  }
  UiNode income = make_node("expenses_income_switch", "Switch", {40, 1000, 1040, 1120}, "Income", true);
  income.checked = d.income;
  root.children.push_back(std::move(income));
  root.children.push_back(make_node("expenses_save_button", "Button", {40, 1150, 1040, 1270}, "Save", true));
  return root;
}

UiNode clock_alarms(const WorldState& s) {
  UiNode root = root_for("clock", "Alarms");
  root.children.push_back(make_node("clock_add_button", "Button", {40, 220, 1040, 340}, "Add alarm", true));
  UiNode list = list_container(s, kClockList);
  auto alarms = sorted_alarms(s.clock);
  for (int i = 0; i < static_cast<int>(alarms.size()) && i < kClockList.visible_rows; ++i) {
    const auto& a = alarms[i];
    Rect r = list_row(kClockList, i);
    std::string id = "clock_alarm_" + std::to_string(a.id);
    UiNode row = make_node(id, "ListItem", r, alarm_text(a), true);
    UiNode sw = make_node(id + "_switch", "Switch", {780, r.y1 + 40, 1040, r.y1 + 160}, alarm_text(a), true);
    sw.checked = a.enabled;
    row.children.push_back(std::move(sw));
    list.children.push_back(std::move(row));
  }
  root.children.push_back(std::move(list));
  return root;
}

UiNode clock_add(const WorldState& s) {
  const auto& d = s.clock.draft;
  UiNode root = root_for("clock", "Add alarm");
  root.children.push_back(make_node("clock_time_label", "TextView", {40, 220, 1040, 280}, "Time (HH:MM)"));
  root.children.push_back(edit_text(s, "clock_time_input", {40, 290, 1040, 410}, d.time));
  root.children.push_back(make_node("clock_label_label", "TextView", {40, 430, 1040, 490}, "Label"));
  root.children.push_back(edit_text(s, "clock_label_input", {40, 500, 1040, 620}, d.label));
  UiNode en = make_node("clock_enabled_switch", "Switch", {40, 660, 1040, 780}, "Enabled", true);
  en.checked = d.enabled;
  root.children.push_back(std::move(en));
  root.children.push_back(make_node("clock_save_button", "Button", {40, 820, 1040, 940}, "Save", true));
  return root;
}

const Transaction* find_txn(const ExpensesData& e, int id) {
  for (const auto& t : e.transactions) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Alarm* find_alarm(const ClockData& c, int id) {
  for (const auto& a : c.alarms) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

// Parses "<app>.delete/<id>" screen identifiers.
std::optional<int> dialog_target(std::string_view screen, std::string_view prefix) {
  return id_suffix(screen, prefix);
}

bool screen_known(const WorldState& s, std::string_view screen) {
  if (screen == "home" || screen == "settings.main" || screen == "expenses.list" ||
      screen == "expenses.add" || screen == "clock.alarms" || screen == "clock.add") {
    return true;
  }
  for (const auto& p : toggle_pages()) {
    if (screen == std::string("settings.") + p.page) return true;
  }
  if (auto id = dialog_target(screen, "expenses.delete/")) return find_txn(s.expenses, *id) != nullptr;
  if (auto id = dialog_target(screen, "clock.delete/")) return find_alarm(s.clock, *id) != nullptr;
  return false;
}

App app_of_screen(std::string_view screen) {
  if (starts_with(screen, "settings.")) return App::kSettings;
  if (starts_with(screen, "expenses.")) return App::kExpenses;
  if (starts_with(screen, "clock.")) return App::kClock;
  return App::kHome;
}

bool in_stack(const WorldState& s, std::string_view screen) {
  return std::find(s.screen_stack.begin(), s.screen_stack.end(), screen) != s.screen_stack.end();
}

// Re-establishes derived fields after a transition: drafts only live while
// their form is on the stack, focus only while its form is on top.
void normalize(WorldState& s) {
  if (!in_stack(s, "expenses.add")) s.expenses.draft = {};
  if (!in_stack(s, "clock.add")) s.clock.draft = {};
  const std::string& top = s.top_screen();
  bool focus_on_top = (top == "expenses.add" && starts_with(s.focused, "expenses_")) ||
                      (top == "clock.add" && starts_with(s.focused, "clock_"));
  if (!focus_on_top) s.focused.clear();
  s.keyboard_visible = !s.focused.empty();
  for (auto it = s.scroll.begin(); it != s.scroll.end();) {
    const ListGeometry* g = list_by_id(it->first);
    if (g == nullptr || !in_stack(s, g->screen_id)) {
      it = s.scroll.erase(it);
    } else {
      it->second = std::clamp(it->second, 0, max_offset(s, *g));
      if (it->second == 0) {
        it = s.scroll.erase(it);
      } else {
        ++it;
      }
    }
  }
  s.current_app = app_of_screen(top);
}

std::string no_op(std::string reason) { return "no-op: " + reason; }

// ---- transition handlers -----------------------------------------------------
// Each returns an empty string on success or the no-op reason.

std::string open_app(WorldState& s, App app) {
  s.screen_stack = {"home"};
  switch (app) {
    case App::kSettings: s.screen_stack.push_back("settings.main"); break;
    case App::kExpenses: s.screen_stack.push_back("expenses.list"); break;
    case App::kClock: s.screen_stack.push_back("clock.alarms"); break;
    case App::kHome: break;
  }
  return {};
}

std::string save_expense(WorldState& s) {
  auto& e = s.expenses;
  if (e.draft.amount.empty()) return "amount is required";
  auto cents = parse_amount(e.draft.amount);
  if (!cents) return "invalid amount '" + e.draft.amount + "'";
  if (e.draft.category.empty()) return "category is required";
  std::string date = e.draft.date.empty() ? kToday : e.draft.date;
  if (!valid_date(date)) return "invalid date '" + date + "'";
  Transaction t;
  t.id = e.next_id++;
  t.amount_cents = e.draft.income ? *cents : -*cents;
  t.date = date;
  t.category = e.draft.category;
  e.transactions.push_back(t);
  e.last_added_id = t.id;
  s.screen_stack.pop_back();
  // Bring the new row into view.
  auto rows = sorted_transactions(e);
  int pos = 0;
  while (rows[pos].id != t.id) ++pos;
  const int off = scroll_offset(s, kExpensesList);
  if (pos < off || pos >= off + kExpensesList.visible_rows) {
    s.scroll[kExpensesList.container_id] = std::min(pos, max_offset(s, kExpensesList));
  }
  return {};
}

std::string save_alarm(WorldState& s) {
  auto& c = s.clock;
  if (!valid_time(c.draft.time)) return "invalid time '" + c.draft.time + "'";
  for (const auto& a : c.alarms) {
    if (a.time == c.draft.time) return "an alarm at " + a.time + " already exists";
  }
  if (c.alarms.size() >= kMaxAlarms) return "alarm list is full";
  Alarm a;
  a.id = c.next_id++;
  a.time = c.draft.time;
  a.label = c.draft.label;
  a.enabled = c.draft.enabled;
  c.alarms.push_back(a);
  s.screen_stack.pop_back();
  return {};
}

std::string tap_node(WorldState& s, const UiNode& node) {
  const std::string& id = node.node_id;
  const std::string top = s.top_screen();
  if (node.class_name == "EditText") {
    s.focused = id;
    s.keyboard_visible = true;
    return {};
  }
  if (id == "home_app_settings") return open_app(s, App::kSettings);
  if (id == "home_app_expenses") return open_app(s, App::kExpenses);
  if (id == "home_app_clock") return open_app(s, App::kClock);
  if (starts_with(id, "settings_row_")) {
    s.screen_stack.push_back("settings." + id.substr(std::string_view("settings_row_").size()));
    return {};
  }
  if (starts_with(id, "settings_") && id.size() > 7 && id.substr(id.size() - 7) == "_toggle") {
    std::string key = id.substr(9, id.size() - 9 - 7);
    s.toggles[key] = !s.toggles[key];
    return {};
  }
  if (id == "expenses_add_button") {
    s.screen_stack.push_back("expenses.add");
    return {};
  }
  if (starts_with(id, "expenses_cat_")) {
    s.expenses.draft.category = node.text;
    return {};
  }
  if (id == "expenses_income_switch") {
    s.expenses.draft.income = !s.expenses.draft.income;
    return {};
  }
  if (id == "expenses_save_button") return save_expense(s);
  if (id == "clock_add_button") {
    s.screen_stack.push_back("clock.add");
    return {};
  }
  if (auto alarm = id_suffix(id, "clock_alarm_", "_switch")) {
    for (auto& a : s.clock.alarms) {
      if (a.id == *alarm) a.enabled = !a.enabled;
    }
    return {};
  }
  if (id == "clock_enabled_switch") {
    s.clock.draft.enabled = !s.clock.draft.enabled;
    return {};
  }
  if (id == "clock_save_button") return save_alarm(s);
  if (id == "expenses_dialog_cancel" || id == "clock_dialog_cancel") {
    s.screen_stack.pop_back();
    return {};
  }
  if (id == "expenses_dialog_delete") {
    if (auto target = dialog_target(top, "expenses.delete/")) {
      std::erase_if(s.expenses.transactions, [&](const Transaction& t) { return t.id == *target; });
    }
    s.screen_stack.pop_back();
    return {};
  }
  if (id == "clock_dialog_delete") {
    if (auto target = dialog_target(top, "clock.delete/")) {
      std::erase_if(s.clock.alarms, [&](const Alarm& a) { return a.id == *target; });
    }
    s.screen_stack.pop_back();
    return {};
  }
  // Rows without a tap handler (transactions, alarms) simply re-render.
  return {};
}

std::string long_press_node(WorldState& s, const UiNode& node) {
  if (auto txn = id_suffix(node.node_id, "expenses_txn_")) {
    s.screen_stack.push_back("expenses.delete/" + std::to_string(*txn));
    return {};
  }
  if (auto alarm = id_suffix(node.node_id, "clock_alarm_")) {
    s.screen_stack.push_back("clock.delete/" + std::to_string(*alarm));
    return {};
  }
  return "nothing to long press on " + node.node_id;
}

const UiNode* innermost_scrollable_at(const UiNode& node, long px2, long py2) {
  if (!node.bounds.contains_doubled(px2, py2)) return nullptr;
  for (const auto& c : node.children) {
    if (const UiNode* hit = innermost_scrollable_at(c, px2, py2)) return hit;
  }
  return node.scrollable ? &node : nullptr;
}

std::string point_text(long px2, long py2) {
  auto half = [](long v) {
    return std::to_string(v / 2) + (v % 2 != 0 ? ".5" : "");
  };
  return "(" + half(px2) + "," + half(py2) + ")";
}

void render_node(const UiNode& n, int depth, std::string& out) {
  auto escape = [](const std::string& s) {
    std::string e;
    e.reserve(s.size());
    for (char c : s) {
      switch (c) {
        case '&': e += "&amp;"; break;
        case '<': e += "&lt;"; break;
        case '>': e += "&gt;"; break;
        case '"': e += "&quot;"; break;
        case '\n': e += "&#10;"; break;
        default: e += c;
      }
    }
    return e;
  };
  auto b = [](bool v) { return v ? "true" : "false"; };
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "<node id=\"" + escape(n.node_id) + "\" class=\"" + escape(n.class_name) + "\" bounds=\"[" +
         std::to_string(n.bounds.x1) + "," + std::to_string(n.bounds.y1) + "][" +
         std::to_string(n.bounds.x2) + "," + std::to_string(n.bounds.y2) + "]\" text=\"" +
         escape(n.text) + "\" clickable=\"" + b(n.clickable) + "\" scrollable=\"" + b(n.scrollable) +
         "\" checked=\"" + b(n.checked) + "\" focused=\"" + b(n.focused) + "\"";
  if (n.children.empty()) {
    out += "/>\n";
    return;
  }
  out += ">\n";
  for (const auto& c : n.children) render_node(c, depth + 1, out);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</node>\n";
}

void check_node(const UiNode& n, std::set<std::string>& ids, int& focused,
                std::vector<std::string>& out) {
  if (!n.bounds.valid()) out.push_back("node " + n.node_id + " has degenerate bounds");
  if (!ids.insert(n.node_id).second) out.push_back("duplicate node id " + n.node_id);
  if (n.focused) ++focused;
  for (const auto& c : n.children) {
    if (!n.bounds.contains(c.bounds)) {
      out.push_back("child " + c.node_id + " escapes parent " + n.node_id);
    }
    check_node(c, ids, focused, out);
  }
}

}  // namespace

// ---- public API -------------------------------------------------------------

std::string_view app_name(App app) {
  switch (app) {
    case App::kHome: return "HOME";
    case App::kSettings: return "Settings";
    case App::kExpenses: return "Expenses";
    case App::kClock: return "Clock";
  }
  return "HOME";
}

std::string_view app_id_prefix(App app) {
  switch (app) {
    case App::kHome: return "home_";
    case App::kSettings: return "settings_";
    case App::kExpenses: return "expenses_";
    case App::kClock: return "clock_";
  }
  return "home_";
}

std::optional<App> parse_app(std::string_view name) {
  std::string l = lower(name);
  if (l == "settings") return App::kSettings;
  if (l == "expenses") return App::kExpenses;
  if (l == "clock") return App::kClock;
  return std::nullopt;
}

WorldState default_world_state() {
  WorldState s;
  s.toggles = {{"wifi", false},     {"bluetooth", false}, {"airplane", false},
               {"dark_theme", false}, {"auto_rotate", true}, {"dnd", false},
               {"vibrate", true},   {"location", true},   {"battery_saver", false}};
  s.expenses.transactions = {
      {1, -450, "2024-05-09", "Food"},       {2, -2300, "2024-05-08", "Transport"},
      {3, -6499, "2024-05-07", "Shopping"},  {4, 250000, "2024-05-01", "Salary"},
      {5, -1275, "2024-05-06", "Food"},      {6, -8900, "2024-05-04", "Bills"},
      {7, -1560, "2024-05-03", "Food"},      {8, -4200, "2024-05-02", "Transport"},
  };
  s.expenses.next_id = 9;
  s.clock.alarms = {{1, "06:30", "Gym", false}, {2, "07:00", "Work", true}, {3, "22:00", "Sleep", false}};
  s.clock.next_id = 4;
  return s;
}

UiNode build_screen(const WorldState& s) {
  const std::string& top = s.top_screen();
  UiNode root;
  if (top == "home") {
    root = home_screen();
  } else if (top == "settings.main") {
    root = settings_main(s);
  } else if (top == "expenses.list") {
    root = expenses_list(s);
  } else if (top == "expenses.add") {
    root = expenses_add(s);
  } else if (top == "clock.alarms") {
    root = clock_alarms(s);
  } else if (top == "clock.add") {
    root = clock_add(s);
  } else if (auto id = dialog_target(top, "expenses.delete/")) {
    root = expenses_list(s);
    const Transaction* t = find_txn(s.expenses, *id);
    root.children.push_back(
        dialog("expenses", "Delete transaction " + (t ? transaction_text(*t) : std::string("?")) + "?"));
  } else if (auto alarm = dialog_target(top, "clock.delete/")) {
    root = clock_alarms(s);
    const Alarm* a = find_alarm(s.clock, *alarm);
    root.children.push_back(dialog("clock", "Delete alarm " + (a ? alarm_text(*a) : std::string("?")) + "?"));
  } else {
    bool found = false;
    for (const auto& p : toggle_pages()) {
      if (top == std::string("settings.") + p.page) {
        root = settings_page(s, p);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("unknown screen '" + top + "'");
  }
  if (s.keyboard_visible) root.children.push_back(make_node("keyboard", "Keyboard", kKeyboard));
  return root;
}

std::string render_xml(const UiNode& root) {
  std::string out;
  render_node(root, 0, out);
  return out;
}

std::string render_xml(const WorldState& state) { return render_xml(build_screen(state)); }

Observation observe(const WorldState& state) {
  Observation o;
  o.screen_id = state.top_screen();
  o.root = build_screen(state);
  o.xml = render_xml(o.root);
  o.keyboard_visible = state.keyboard_visible;
  return o;
}

const UiNode* find_node(const UiNode& root, std::string_view node_id) {
  if (root.node_id == node_id) return &root;
  for (const auto& c : root.children) {
    if (const UiNode* hit = find_node(c, node_id)) return hit;
  }
  return nullptr;
}

const UiNode* deepest_clickable_at(const UiNode& node, long px2, long py2) {
  if (!node.bounds.contains_doubled(px2, py2)) return nullptr;
  // Later siblings are drawn on top (dialogs, keyboard), so search them first.
  for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
    if (const UiNode* hit = deepest_clickable_at(*it, px2, py2)) return hit;
  }
  return node.clickable ? &node : nullptr;
}

StepResult step(const WorldState& state, const Action& action) {
  if (is_submit(action)) {
    throw InvalidArgument("submit terminates the episode and is handled by the orchestrator");
  }
  WorldState next = state;
  UiNode screen = build_screen(state);
  bool dialog_open = starts_with(state.top_screen(), "expenses.delete/") ||
                     starts_with(state.top_screen(), "clock.delete/");

  auto targeted = [&](int x1, int y1, int x2, int y2, auto&& handler) -> std::string {
    long px2 = static_cast<long>(x1) + x2;
    long py2 = static_cast<long>(y1) + y2;
    if (px2 < 0 || py2 < 0 || px2 >= 2L * kScreenWidth || py2 >= 2L * kScreenHeight) {
      return "target " + point_text(px2, py2) + " is outside the screen";
    }
    if (state.keyboard_visible && py2 >= 2L * kKeyboardTop) {
      return "target " + point_text(px2, py2) + " is covered by the keyboard";
    }
    const UiNode* node = nullptr;
    if (dialog_open) {
      // Modal: only the dialog subtree receives input.
      const UiNode& d = screen.children.back();
      node = deepest_clickable_at(d, px2, py2);
    } else {
      node = deepest_clickable_at(screen, px2, py2);
    }
    if (node == nullptr) return "no clickable element at " + point_text(px2, py2);
    return handler(*node);
  };

  std::string miss = std::visit(
      overloaded{
          [&](const act::GetCurrentXml&) { return std::string(); },
          [&](const act::Tap& t) {
            return targeted(t.x1, t.y1, t.x2, t.y2, [&](const UiNode& n) { return tap_node(next, n); });
          },
          [&](const act::LongPress& t) {
            return targeted(t.x1, t.y1, t.x2, t.y2,
                            [&](const UiNode& n) { return long_press_node(next, n); });
          },
          [&](const act::Type& t) -> std::string {
            if (!state.keyboard_visible || state.focused.empty()) return "no focused input";
            std::string* field = nullptr;
            if (state.focused == "expenses_amount_input") field = &next.expenses.draft.amount;
            if (state.focused == "expenses_date_input") field = &next.expenses.draft.date;
            if (state.focused == "clock_time_input") field = &next.clock.draft.time;
            if (state.focused == "clock_label_input") field = &next.clock.draft.label;
            if (field == nullptr) return "no focused input";
            if (field->size() + t.text_input.size() > kMaxInputLength) return "input is full";
            *field += t.text_input;
            return {};
          },
          [&](const act::Swipe& sw) -> std::string {
            long px2 = static_cast<long>(sw.x1) + sw.x2;
            long py2 = static_cast<long>(sw.y1) + sw.y2;
            const UiNode* target = dialog_open ? nullptr : innermost_scrollable_at(screen, px2, py2);
            if (target == nullptr) return "nothing to scroll at " + point_text(px2, py2);
            if (sw.direction == act::Direction::kLeft || sw.direction == act::Direction::kRight) {
              return target->node_id + " does not scroll horizontally";
            }
            const ListGeometry* g = list_by_id(target->node_id);
            int rows = sw.dist == act::Distance::kShort ? 1 : sw.dist == act::Distance::kMedium ? 3 : 6;
            int cur = scroll_offset(state, *g);
            // Swiping up moves the content up, revealing later rows.
            int want = sw.direction == act::Direction::kUp ? cur + rows : cur - rows;
            int off = std::clamp(want, 0, max_offset(state, *g));
            if (off == cur) return target->node_id + " cannot scroll further";
            next.scroll[g->container_id] = off;
            return {};
          },
          [&](const act::Back&) -> std::string {
            if (state.keyboard_visible) {
              next.focused.clear();
              next.keyboard_visible = false;
              return {};
            }
            if (next.screen_stack.size() <= 1) return "already at the home screen";
            next.screen_stack.pop_back();
            return {};
          },
          [&](const act::Home&) {
            next.screen_stack = {"home"};
            return std::string();
          },
          [&](const act::Wait&) { return std::string(); },
          [&](const act::Enter&) -> std::string {
            if (state.focused.empty()) return "no focused input";
            next.focused.clear();
            next.keyboard_visible = false;
            return {};
          },
          [&](const act::Launch& l) -> std::string {
            auto app = parse_app(l.app);
            if (!app) return "unknown app '" + l.app + "'";
            return open_app(next, *app);
          },
          [&](const act::Submit&) { return std::string(); },
      },
      action);

  StepResult r;
  if (!miss.empty()) {
    r.state = state;
    r.observation = observe(state);
    r.tool_response = no_op(std::move(miss));
    r.mutated = false;
    return r;
  }
  normalize(next);
  r.mutated = !(next == state);
  r.state = std::move(next);
  r.observation = observe(r.state);
  r.tool_response = r.observation.xml;
  return r;
}

std::vector<std::string> check_invariants(const UiNode& root) {
  std::vector<std::string> out;
  std::set<std::string> ids;
  int focused = 0;
  check_node(root, ids, focused, out);
  if (focused > 1) out.push_back("more than one focused node");
  return out;
}

std::vector<std::string> check_invariants(const WorldState& s) {
  std::vector<std::string> out;
  if (s.screen_stack.empty()) {
    out.push_back("empty screen stack");
    return out;
  }
  if (s.screen_stack.front() != "home") out.push_back("screen stack does not start at home");
  for (const auto& scr : s.screen_stack) {
    if (!screen_known(s, scr)) out.push_back("unknown screen '" + scr + "'");
  }
  if (s.keyboard_visible != !s.focused.empty()) out.push_back("keyboard visibility disagrees with focus");
  if (s.current_app != app_of_screen(s.top_screen())) out.push_back("current_app disagrees with top screen");
  if (s.clock.alarms.size() > kMaxAlarms) out.push_back("too many alarms");
  if (!out.empty()) return out;
  auto node_issues = check_invariants(build_screen(s));
  out.insert(out.end(), node_issues.begin(), node_issues.end());
  return out;
}

std::string format_amount(std::int64_t cents) {
  std::int64_t mag = cents < 0 ? -cents : cents;
  std::string digits = std::to_string(mag / 100) + "." + (mag % 100 < 10 ? "0" : "") + std::to_string(mag % 100);
  if (cents < 0) return "\xE2\x88\x92" + digits;  // U+2212 MINUS SIGN
  if (cents > 0) return "+" + digits;
  return digits;
}

std::optional<std::int64_t> parse_amount(std::string_view text) {
  std::size_t dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view() : text.substr(dot + 1);
  if (whole.empty() || whole.size() > 9 || frac.size() > 2) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  std::int64_t v = 0;
  for (char c : whole) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  std::int64_t f = 0;
  for (char c : frac) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    f = f * 10 + (c - '0');
  }
  if (frac.size() == 1) f *= 10;
  std::int64_t cents = v * 100 + f;
  if (cents <= 0) return std::nullopt;
  return cents;
}

}  // namespace smartsnap

namespace smartsnap {

namespace {

class XmlReader {
 public:
  explicit XmlReader(std::string_view s) : s_(s) {}

  std::optional<UiNode> document() {
    auto root = node();
    if (!root) return std::nullopt;
    skip_ws();
    if (pos_ != s_.size()) return std::nullopt;
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n')) ++pos_;
  }
  bool literal(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) return false;
    pos_ += lit.size();
    return true;
  }
  std::optional<std::string> attr(std::string_view name) {
    skip_ws();
    if (!literal(name) || !literal("=\"")) return std::nullopt;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c != '&') {
        out += c;
        continue;
      }
      static const std::pair<std::string_view, char> kEntities[] = {
          {"amp;", '&'}, {"lt;", '<'}, {"gt;", '>'}, {"quot;", '"'}, {"#10;", '\n'}};
      bool matched = false;
      for (const auto& [ent, ch] : kEntities) {
        if (literal(ent)) {
          out += ch;
          matched = true;
          break;
        }
      }
      if (!matched) return std::nullopt;
    }
    if (!literal("\"")) return std::nullopt;
    return out;
  }
  std::optional<bool> flag(std::string_view name) {
    auto v = attr(name);
    if (!v || (*v != "true" && *v != "false")) return std::nullopt;
    return *v == "true";
  }
  std::optional<UiNode> node() {
    if (++depth_ > 64) return std::nullopt;
    skip_ws();
    if (!literal("<node")) return std::nullopt;
    UiNode n;
    auto id = attr("id");
    auto cls = attr("class");
    auto bounds = attr("bounds");
    auto text = attr("text");
    auto clickable = flag("clickable");
    auto scrollable = flag("scrollable");
    auto checked = flag("checked");
    auto focused = flag("focused");
    if (!id || !cls || !bounds || !text || !clickable || !scrollable || !checked || !focused) return std::nullopt;
    Rect r;
    char tail = 0;
    if (std::sscanf(bounds->c_str(), "[%d,%d][%d,%d]%c", &r.x1, &r.y1, &r.x2, &r.y2, &tail) != 4) {
      return std::nullopt;
    }
    n.node_id = std::move(*id);
    n.class_name = std::move(*cls);
    n.bounds = r;
    n.text = std::move(*text);
    n.clickable = *clickable;
    n.scrollable = *scrollable;
    n.checked = *checked;
    n.focused = *focused;
    if (literal("/>")) {
      --depth_;
      return n;
    }
    if (!literal(">")) return std::nullopt;
    while (true) {
      skip_ws();
      if (literal("</node>")) break;
      auto child = node();
      if (!child) return std::nullopt;
      n.children.push_back(std::move(*child));
    }
    --depth_;
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

std::optional<UiNode> parse_xml(std::string_view xml) { return XmlReader(xml).document(); }

}  // namespace smartsnap
