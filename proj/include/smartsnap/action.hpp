#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace smartsnap {

// The tool-call vocabulary. Member names mirror the shipped tool schema
// (assets/tool_schemas.json) one to one.
namespace act {

struct GetCurrentXml {
  bool operator==(const GetCurrentXml&) const = default;
};
struct Tap {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const Tap&) const = default;
};
struct Type {
  std::string text_input;
  bool operator==(const Type&) const = default;
};
struct LongPress {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const LongPress&) const = default;
};
enum class Direction { kUp, kDown, kLeft, kRight };
enum class Distance { kShort, kMedium, kLong };
struct Swipe {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  Direction direction = Direction::kUp;
  Distance dist = Distance::kMedium;
  bool operator==(const Swipe&) const = default;
};
struct Back {
  bool operator==(const Back&) const = default;
};
struct Home {
  bool operator==(const Home&) const = default;
};
struct Wait {
  double seconds = 1.0;
  bool operator==(const Wait&) const = default;
};
struct Enter {
  bool operator==(const Enter&) const = default;
};
struct Launch {
  std::string app;
  bool operator==(const Launch&) const = default;
};
struct Submit {
  std::string message;
  std::vector<int> evidences;
  bool operator==(const Submit&) const = default;
};

}  // namespace act

using Action = std::variant<act::GetCurrentXml, act::Tap, act::Type, act::LongPress,
                            act::Swipe, act::Back, act::Home, act::Wait, act::Enter,
                            act::Launch, act::Submit>;

// Submit is the only curation action; everything else acts on the world.
inline bool is_submit(const Action& a) { return std::holds_alternative<act::Submit>(a); }

// Tool name as it appears in the schema ("get_current_xml", "tap", ...).
std::string_view tool_name(const Action& a);

// {"name": ..., "arguments": {...}} with arguments in schema order.
nlohmann::ordered_json action_to_json(const Action& a);

// Inverse of action_to_json. Throws InvalidArgument with a readable reason on
// unknown tools, missing or mistyped arguments.
Action action_from_json(const nlohmann::json& j);

// Builds an action from a tool name and its argument object.
Action action_from_call(std::string_view name, const nlohmann::json& arguments);

// Compact single-line form, e.g. tap({"x1":1,"y1":2,"x2":3,"y2":4}).
std::string describe(const Action& a);

std::string_view to_string(act::Direction d);
std::string_view to_string(act::Distance d);

}  // namespace smartsnap
