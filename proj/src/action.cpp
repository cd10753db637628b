#include "smartsnap/action.hpp"

#include <cmath>

#include "smartsnap/error.hpp"

namespace smartsnap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::ordered_json rect_args(int x1, int y1, int x2, int y2) {
  nlohmann::ordered_json a;
  a["x1"] = x1;
  a["y1"] = y1;
  a["x2"] = x2;
  a["y2"] = y2;
  return a;
}

const nlohmann::json& require(const nlohmann::json& args, std::string_view tool, const char* key) {
  if (!args.is_object() || !args.contains(key)) {
    throw InvalidArgument(std::string(tool) + ": missing argument '" + key + "'");
  }
  return args.at(key);
}

int require_int(const nlohmann::json& args, std::string_view tool, const char* key) {
  const auto& v = require(args, tool, key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<int>(d);
  }
  throw InvalidArgument(std::string(tool) + ": argument '" + key + "' must be an integer");
}

std::string require_string(const nlohmann::json& args, std::string_view tool, const char* key) {
  const auto& v = require(args, tool, key);
  if (!v.is_string()) {
    throw InvalidArgument(std::string(tool) + ": argument '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

act::Direction parse_direction(const std::string& s) {
  if (s == "up") return act::Direction::kUp;
  if (s == "down") return act::Direction::kDown;
  if (s == "left") return act::Direction::kLeft;
  if (s == "right") return act::Direction::kRight;
  throw InvalidArgument("swipe: direction must be one of up/down/left/right, got '" + s + "'");
}

act::Distance parse_distance(const std::string& s) {
  if (s == "short") return act::Distance::kShort;
  if (s == "medium") return act::Distance::kMedium;
  if (s == "long") return act::Distance::kLong;
  throw InvalidArgument("swipe: dist must be one of long/medium/short, got '" + s + "'");
}

}  // namespace

std::string_view to_string(act::Direction d) {
  switch (d) {
    case act::Direction::kUp: return "up";
    case act::Direction::kDown: return "down";
    case act::Direction::kLeft: return "left";
    case act::Direction::kRight: return "right";
  }
  return "up";
}

std::string_view to_string(act::Distance d) {
  switch (d) {
    case act::Distance::kShort: return "short";
    case act::Distance::kMedium: return "medium";
    case act::Distance::kLong: return "long";
  }
  return "medium";
}

std::string_view tool_name(const Action& a) {
  return std::visit(overloaded{
                        [](const act::GetCurrentXml&) { return std::string_view("get_current_xml"); },
                        [](const act::Tap&) { return std::string_view("tap"); },
                        [](const act::Type&) { return std::string_view("type"); },
                        [](const act::LongPress&) { return std::string_view("long_press"); },
                        [](const act::Swipe&) { return std::string_view("swipe"); },
                        [](const act::Back&) { return std::string_view("back"); },
                        [](const act::Home&) { return std::string_view("home"); },
                        [](const act::Wait&) { return std::string_view("wait"); },
                        [](const act::Enter&) { return std::string_view("enter"); },
                        [](const act::Launch&) { return std::string_view("launch"); },
                        [](const act::Submit&) { return std::string_view("submit"); },
                    },
                    a);
}

nlohmann::ordered_json action_to_json(const Action& a) {
  nlohmann::ordered_json args = nlohmann::ordered_json::object();
  std::visit(overloaded{
                 [](const act::GetCurrentXml&) {},
                 [&](const act::Tap& t) { args = rect_args(t.x1, t.y1, t.x2, t.y2); },
                 [&](const act::Type& t) { args["text_input"] = t.text_input; },
                 [&](const act::LongPress& t) { args = rect_args(t.x1, t.y1, t.x2, t.y2); },
                 [&](const act::Swipe& s) {
                   args = rect_args(s.x1, s.y1, s.x2, s.y2);
                   args["direction"] = to_string(s.direction);
                   args["dist"] = to_string(s.dist);
                 },
                 [](const act::Back&) {},
                 [](const act::Home&) {},
                 [&](const act::Wait& w) { args["seconds"] = w.seconds; },
                 [](const act::Enter&) {},
                 [&](const act::Launch& l) { args["app"] = l.app; },
                 [&](const act::Submit& s) {
                   args["message"] = s.message;
                   args["evidences"] = s.evidences;
                 },
             },
             a);
  nlohmann::ordered_json j;
  j["name"] = tool_name(a);
  j["arguments"] = std::move(args);
  return j;
}

Action action_from_call(std::string_view name, const nlohmann::json& args) {
  if (name == "get_current_xml") return act::GetCurrentXml{};
  if (name == "tap") {
    return act::Tap{require_int(args, name, "x1"), require_int(args, name, "y1"),
                    require_int(args, name, "x2"), require_int(args, name, "y2")};
  }
  if (name == "type") return act::Type{require_string(args, name, "text_input")};
  if (name == "long_press") {
    return act::LongPress{require_int(args, name, "x1"), require_int(args, name, "y1"),
                          require_int(args, name, "x2"), require_int(args, name, "y2")};
  }
  if (name == "swipe") {
    act::Swipe s{require_int(args, name, "x1"), require_int(args, name, "y1"),
                 require_int(args, name, "x2"), require_int(args, name, "y2")};
    s.direction = parse_direction(require_string(args, name, "direction"));
    // The schema documents "medium" as the default even though it lists dist as required.
    s.dist = args.contains("dist") ? parse_distance(require_string(args, name, "dist"))
                                   : act::Distance::kMedium;
    return s;
  }
  if (name == "back") return act::Back{};
  if (name == "home") return act::Home{};
  if (name == "wait") {
    const auto& v = require(args, name, "seconds");
    if (!v.is_number()) throw InvalidArgument("wait: argument 'seconds' must be a number");
    double s = v.get<double>();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("wait: argument 'seconds' must be positive");
    }
    return act::Wait{s};
  }
  if (name == "enter") return act::Enter{};
  if (name == "launch") return act::Launch{require_string(args, name, "app")};
  if (name == "submit") {
    act::Submit s;
    s.message = require_string(args, name, "message");
    const auto& ev = require(args, name, "evidences");
    if (!ev.is_array()) throw InvalidArgument("submit: argument 'evidences' must be a list");
    for (const auto& e : ev) {
      if (e.is_number_integer()) {
        s.evidences.push_back(e.get<int>());
      } else if (e.is_number_float() && e.get<double>() == std::floor(e.get<double>()) &&
                 std::isfinite(e.get<double>())) {
        s.evidences.push_back(static_cast<int>(e.get<double>()));
      } else {
        throw InvalidArgument("submit: evidences must be integers");
      }
    }
    return s;
  }
  throw InvalidArgument("unknown tool '" + std::string(name) + "'");
}

Action action_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
    throw InvalidArgument("tool call must be an object with a string 'name'");
  }
  nlohmann::json args = j.contains("arguments") ? j.at("arguments") : nlohmann::json::object();
  if (args.is_string()) {
    // OpenAI-style responses carry arguments as an encoded JSON string.
    args = nlohmann::json::parse(args.get<std::string>(), nullptr, false);
    if (args.is_discarded()) throw InvalidArgument("tool call arguments are not valid JSON");
  }
  if (args.is_null()) args = nlohmann::json::object();
  return action_from_call(j.at("name").get<std::string>(), args);
}

std::string describe(const Action& a) {
  auto j = action_to_json(a);
  return j["name"].get<std::string>() + "(" + j["arguments"].dump() + ")";
}

}  // namespace smartsnap
