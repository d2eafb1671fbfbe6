/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_ACTION_HPP_
#define VENUS_ACTION_HPP_

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "venus/error.hpp"
#include "venus/text.hpp"

namespace venus {

enum class ActionKind : std::uint8_t {
  kClick,
  kDrag,
  kScroll,
  kType,
  kLaunch,
  kWait,
  kFinished,
  kCallUser,
  kLongPress,
  kPressBack,
  kPressHome,
  kPressEnter,
  kPressRecent,
};

inline constexpr std::size_t kNumActionKinds = 13;

inline constexpr std::array<ActionKind, kNumActionKinds> kAllActionKinds = {
    ActionKind::kClick,     ActionKind::kDrag,      ActionKind::kScroll,
    ActionKind::kType,      ActionKind::kLaunch,    ActionKind::kWait,
    ActionKind::kFinished,  ActionKind::kCallUser,  ActionKind::kLongPress,
    ActionKind::kPressBack, ActionKind::kPressHome, ActionKind::kPressEnter,
    ActionKind::kPressRecent,
};

constexpr std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::kClick: return "Click";
    case ActionKind::kDrag: return "Drag";
    case ActionKind::kScroll: return "Scroll";
    case ActionKind::kType: return "Type";
    case ActionKind::kLaunch: return "Launch";
    case ActionKind::kWait: return "Wait";
    case ActionKind::kFinished: return "Finished";
    case ActionKind::kCallUser: return "CallUser";
    case ActionKind::kLongPress: return "LongPress";
    case ActionKind::kPressBack: return "PressBack";
    case ActionKind::kPressHome: return "PressHome";
    case ActionKind::kPressEnter: return "PressEnter";
    case ActionKind::kPressRecent: return "PressRecent";
  }
  return "";
}

// Verb lookup is case-insensitive; serialization always uses the canonical
// spelling from to_string().
inline std::optional<ActionKind> action_kind_from_string(std::string_view name) {
  const std::string folded = text::fold_case(name);
  for (ActionKind kind : kAllActionKinds) {
    if (text::fold_case(to_string(kind)) == folded) return kind;
  }
  return std::nullopt;
}

constexpr bool has_point(ActionKind k) {
  return k == ActionKind::kClick || k == ActionKind::kLongPress;
}
constexpr bool has_endpoints(ActionKind k) {
  return k == ActionKind::kDrag || k == ActionKind::kScroll;
}
constexpr bool has_text(ActionKind k) {
  return k == ActionKind::kType || k == ActionKind::kLaunch ||
         k == ActionKind::kFinished || k == ActionKind::kCallUser;
}
constexpr std::string_view text_param_name(ActionKind k) {
  return k == ActionKind::kLaunch ? "app" : "content";
}

enum class Direction : std::uint8_t { kUp, kDown, kLeft, kRight };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kUp, Direction::kDown, Direction::kLeft, Direction::kRight};

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
    case Direction::kRight: return "right";
  }
  return "";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  const std::string folded = text::fold_case(text::trim(s));
  for (Direction d : kAllDirections) {
    if (to_string(d) == folded) return d;
  }
  return std::nullopt;
}

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::kUp: return Direction::kDown;
    case Direction::kDown: return Direction::kUp;
    case Direction::kLeft: return Direction::kRight;
    case Direction::kRight: return Direction::kLeft;
  }
  return d;
}

// Absolute pixel position in the source screenshot.
struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) {
  return std::hypot(static_cast<double>(a.x) - b.x,
                    static_cast<double>(a.y) - b.y);
}

struct ScreenSize {
  int width = 0;
  int height = 0;
  bool valid() const { return width > 0 && height > 0; }
  bool contains(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  bool operator==(const ScreenSize&) const = default;
};

// One action of the unified action space. Only the fields relevant to `kind`
// carry meaning; equality ignores the rest.
struct Action {
  ActionKind kind = ActionKind::kWait;
  Point point;       // Click, LongPress
  Point start;       // Drag, Scroll
  Point end;         // Drag, Scroll
  Direction direction = Direction::kUp;  // Scroll
  bool endpoints_absent = false;         // direction-only Scroll
  std::string text;  // Type, Launch, Finished, CallUser

  static Action click(int x, int y) { return point_action(ActionKind::kClick, x, y); }
  static Action long_press(int x, int y) {
    return point_action(ActionKind::kLongPress, x, y);
  }
  static Action drag(Point from, Point to) {
    Action a;
    a.kind = ActionKind::kDrag;
    a.start = from;
    a.end = to;
    return a;
  }
  static Action scroll(Point from, Point to, Direction dir) {
    Action a;
    a.kind = ActionKind::kScroll;
    a.start = from;
    a.end = to;
    a.direction = dir;
    return a;
  }
  static Action scroll(Direction dir) {
    Action a;
    a.kind = ActionKind::kScroll;
    a.direction = dir;
    a.endpoints_absent = true;
    return a;
  }
  static Action with_text(ActionKind kind, std::string content) {
    Action a;
    a.kind = kind;
    a.text = std::move(content);
    return a;
  }
  static Action type(std::string content) { return with_text(ActionKind::kType, std::move(content)); }
  static Action launch(std::string app) { return with_text(ActionKind::kLaunch, std::move(app)); }
  static Action finished(std::string content = {}) {
    return with_text(ActionKind::kFinished, std::move(content));
  }
  static Action call_user(std::string content) {
    return with_text(ActionKind::kCallUser, std::move(content));
  }
  static Action simple(ActionKind kind) {
    Action a;
    a.kind = kind;
    return a;
  }

  friend bool operator==(const Action& a, const Action& b) {
    if (a.kind != b.kind) return false;
    if (has_point(a.kind)) return a.point == b.point;
    if (has_text(a.kind)) return a.text == b.text;
    if (a.kind == ActionKind::kDrag) return a.start == b.start && a.end == b.end;
    if (a.kind == ActionKind::kScroll) {
      if (a.direction != b.direction || a.endpoints_absent != b.endpoints_absent) {
        return false;
      }
      return a.endpoints_absent || (a.start == b.start && a.end == b.end);
    }
    return true;
  }

 private:
  static Action point_action(ActionKind kind, int x, int y) {
    Action a;
    a.kind = kind;
    a.point = {x, y};
    return a;
  }
};

// Direction a finger swipe from `start` to `end` moves in, by dominant axis.
// Returns nullopt for a zero displacement.
inline std::optional<Direction> swipe_direction(Point start, Point end) {
  const int dx = end.x - start.x;
  const int dy = end.y - start.y;
  if (dx == 0 && dy == 0) return std::nullopt;
  if (std::abs(dy) >= std::abs(dx)) return dy < 0 ? Direction::kUp : Direction::kDown;
  return dx < 0 ? Direction::kLeft : Direction::kRight;
}

enum class ParseErrorKind : std::uint8_t {
  kEmptyInput,
  kUnknownAction,
  kMalformedParams,
  kMissingTag,
};

constexpr std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::kEmptyInput: return "EmptyInput";
    case ParseErrorKind::kUnknownAction: return "UnknownAction";
    case ParseErrorKind::kMalformedParams: return "MalformedParams";
    case ParseErrorKind::kMissingTag: return "MissingTag";
  }
  return "";
}

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::kEmptyInput;
  std::string message;
  bool operator==(const ParseError&) const = default;
};

using ActionResult = Expected<Action, ParseError>;

namespace detail {

using ParamValue = std::variant<Point, std::string>;

class ActionLexer {
 public:
  explicit ActionLexer(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' ||
                                s_[pos_] == '\n' || s_[pos_] == '\r')) {
      ++pos_;
    }
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  bool consume(char c) {
    skip_ws();
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  std::string_view identifier() {
    skip_ws();
    const std::size_t begin = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                         s_[pos_] == '_')) {
      ++pos_;
    }
    return s_.substr(begin, pos_ - begin);
  }
  std::optional<int> integer() {
    skip_ws();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) return std::nullopt;
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }
  std::optional<Point> point() {
    if (!consume('(')) return std::nullopt;
    auto x = integer();
    if (!x || !consume(',')) return std::nullopt;
    auto y = integer();
    if (!y || !consume(')')) return std::nullopt;
    return Point{*x, *y};
  }
  // A quote closes the string only when followed (after blanks) by ',' or
  // ')' or end of input, so unescaped apostrophes inside content survive.
  std::optional<std::string> quoted() {
    skip_ws();
    const char q = peek();
    if (q != '\'' && q != '"') return std::nullopt;
    ++pos_;
    std::string out;
    while (!at_end()) {
      const char c = s_[pos_++];
      if (c == '\\' && !at_end()) {
        const char e = s_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case '\\': case '\'': case '"': out.push_back(e); break;
          default: out.push_back('\\'); out.push_back(e); break;
        }
        continue;
      }
      if (c == q) {
        std::size_t look = pos_;
        while (look < s_.size() && (s_[look] == ' ' || s_[look] == '\t')) ++look;
        if (look >= s_.size() || s_[look] == ',' || s_[look] == ')') return out;
      }
      out.push_back(c);
    }
    return std::nullopt;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline ParseError malformed(std::string message) {
  return {ParseErrorKind::kMalformedParams, std::move(message)};
}

inline void append_quoted(std::string& out, std::string_view s) {
  out.push_back('\'');
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('\'');
}

inline void append_point(std::string& out, Point p) {
  out += '(' + std::to_string(p.x) + ", " + std::to_string(p.y) + ')';
}

}  // namespace detail

// Parses one action in the `Verb(key=value, ...)` surface syntax.
inline ActionResult parse_action(std::string_view input) {
  using detail::ParamValue;
  const std::string_view body = text::trim(input);
  if (body.empty()) return ParseError{ParseErrorKind::kEmptyInput, "empty action"};

  detail::ActionLexer lex(body);
  const std::string_view verb = lex.identifier();
  if (verb.empty()) {
    return ParseError{ParseErrorKind::kUnknownAction,
                      "expected an action name at '" + std::string(body) + "'"};
  }
  const auto kind = action_kind_from_string(verb);
  if (!kind) {
    return ParseError{ParseErrorKind::kUnknownAction,
                      "unknown action '" + std::string(verb) + "'"};
  }
  if (!lex.consume('(')) return detail::malformed("expected '(' after action name");

  std::map<std::string, ParamValue, std::less<>> params;
  lex.skip_ws();
  if (!lex.consume(')')) {
    while (true) {
      const std::string_view key = lex.identifier();
      if (key.empty()) return detail::malformed("expected parameter name");
      if (!lex.consume('=')) {
        return detail::malformed("expected '=' after '" + std::string(key) + "'");
      }
      lex.skip_ws();
      ParamValue value;
      if (lex.peek() == '(') {
        auto p = lex.point();
        if (!p) return detail::malformed("bad coordinate for '" + std::string(key) + "'");
        value = *p;
      } else if (lex.peek() == '\'' || lex.peek() == '"') {
        auto s = lex.quoted();
        if (!s) return detail::malformed("unterminated string for '" + std::string(key) + "'");
        value = std::move(*s);
      } else {
        const std::string_view bare = lex.identifier();
        if (bare.empty()) return detail::malformed("bad value for '" + std::string(key) + "'");
        value = std::string(bare);
      }
      if (!params.emplace(std::string(key), std::move(value)).second) {
        return detail::malformed("duplicate parameter '" + std::string(key) + "'");
      }
      if (lex.consume(',')) {
        lex.skip_ws();
        if (lex.consume(')')) break;  // trailing comma
        continue;
      }
      if (lex.consume(')')) break;
      return detail::malformed("expected ',' or ')'");
    }
  }
  lex.skip_ws();
  if (!lex.at_end()) return detail::malformed("trailing characters after ')'");

  auto take_point = [&](std::string_view key) -> std::optional<Point> {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<Point>(it->second)) return std::nullopt;
    Point p = std::get<Point>(it->second);
    params.erase(it);
    return p;
  };
  auto take_string = [&](std::string_view key) -> std::optional<std::string> {
    auto it = params.find(key);
    if (it == params.end() || !std::holds_alternative<std::string>(it->second)) {
      return std::nullopt;
    }
    std::string s = std::get<std::string>(std::move(it->second));
    params.erase(it);
    return s;
  };
  auto finish = [&](Action a) -> ActionResult {
    if (!params.empty()) {
      return detail::malformed("unexpected parameter '" + params.begin()->first +
                               "' for " + std::string(to_string(a.kind)));
    }
    const bool negative = (has_point(a.kind) && (a.point.x < 0 || a.point.y < 0)) ||
                          (has_endpoints(a.kind) && !a.endpoints_absent &&
                           (a.start.x < 0 || a.start.y < 0 || a.end.x < 0 || a.end.y < 0));
    if (negative) return detail::malformed("negative coordinate");
    return a;
  };

  switch (*kind) {
    case ActionKind::kClick:
    case ActionKind::kLongPress: {
      auto p = take_point("box");
      if (!p) return detail::malformed(std::string(to_string(*kind)) + " requires box=(x, y)");
      return finish(*kind == ActionKind::kClick ? Action::click(p->x, p->y)
                                                : Action::long_press(p->x, p->y));
    }
    case ActionKind::kDrag: {
      auto s = take_point("start");
      auto e = take_point("end");
      if (!s || !e) return detail::malformed("Drag requires start=(x1, y1) and end=(x2, y2)");
      return finish(Action::drag(*s, *e));
    }
    case ActionKind::kScroll: {
      auto dir_text = take_string("direction");
      if (!dir_text) return detail::malformed("Scroll requires direction");
      auto dir = parse_direction(*dir_text);
      if (!dir) return detail::malformed("bad scroll direction '" + *dir_text + "'");
      const bool has_start = params.count("start") > 0;
      const bool has_end = params.count("end") > 0;
      if (!has_start && !has_end) return finish(Action::scroll(*dir));
      auto s = take_point("start");
      auto e = take_point("end");
      if (!s || !e) return detail::malformed("Scroll needs both start and end, or neither");
      return finish(Action::scroll(*s, *e, *dir));
    }
    case ActionKind::kType:
    case ActionKind::kLaunch:
    case ActionKind::kCallUser:
    case ActionKind::kFinished: {
      const std::string_view key = text_param_name(*kind);
      if (params.count(key) == 0 && *kind == ActionKind::kFinished) {
        return finish(Action::finished());
      }
      auto s = take_string(key);
      if (!s) {
        return detail::malformed(std::string(to_string(*kind)) + " requires " +
                                 std::string(key) + "='...'");
      }
      return finish(Action::with_text(*kind, std::move(*s)));
    }
    case ActionKind::kWait:
    case ActionKind::kPressBack:
    case ActionKind::kPressHome:
    case ActionKind::kPressEnter:
    case ActionKind::kPressRecent:
      return finish(Action::simple(*kind));
  }
  return detail::malformed("unhandled action");
}

// Canonical form: exact verb spelling, ", " separators, single-quoted strings.
inline std::string serialize_action(const Action& a) {
  std::string out(to_string(a.kind));
  out.push_back('(');
  if (has_point(a.kind)) {
    out += "box=";
    detail::append_point(out, a.point);
  } else if (has_endpoints(a.kind)) {
    if (!(a.kind == ActionKind::kScroll && a.endpoints_absent)) {
      out += "start=";
      detail::append_point(out, a.start);
      out += ", end=";
      detail::append_point(out, a.end);
    }
    if (a.kind == ActionKind::kScroll) {
      if (!a.endpoints_absent) out += ", ";
      out += "direction=";
      detail::append_quoted(out, to_string(a.direction));
    }
  } else if (has_text(a.kind)) {
    out += text_param_name(a.kind);
    out.push_back('=');
    detail::append_quoted(out, a.text);
  }
  out.push_back(')');
  return out;
}

// Non-negative coordinates inside the screen when one is given.
inline std::optional<std::string> validate_action(const Action& a,
                                                  std::optional<ScreenSize> screen = {}) {
  auto check = [&](Point p, std::string_view what) -> std::optional<std::string> {
    if (p.x < 0 || p.y < 0) return std::string(what) + " has a negative coordinate";
    if (screen && !screen->contains(p)) return std::string(what) + " lies outside the screen";
    return std::nullopt;
  };
  if (has_point(a.kind)) return check(a.point, "box");
  if (has_endpoints(a.kind) && !(a.kind == ActionKind::kScroll && a.endpoints_absent)) {
    if (auto e = check(a.start, "start")) return e;
    return check(a.end, "end");
  }
  return std::nullopt;
}

// Parsed `<think>…</think><action>…</action><conclusion>…</conclusion>` reply.
struct ModelOutput {
  std::string think;
  std::string action_raw;
  ActionResult action = ParseError{ParseErrorKind::kMissingTag, "no <action> tag"};
  std::optional<std::string> conclusion;
  bool format_ok = false;
};

namespace detail {

struct TagSpan {
  std::size_t open = std::string_view::npos;   // position of "<tag>"
  std::size_t close = std::string_view::npos;  // position of "</tag>"
  int open_count = 0;
  int close_count = 0;
};

inline int count_occurrences(std::string_view s, std::string_view needle) {
  int n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

inline TagSpan find_tag(std::string_view s, std::string_view name) {
  const std::string open = "<" + std::string(name) + ">";
  const std::string close = "</" + std::string(name) + ">";
  TagSpan span;
  span.open_count = count_occurrences(s, open);
  span.close_count = count_occurrences(s, close);
  span.open = s.find(open);
  if (span.open != std::string_view::npos) {
    span.close = s.find(close, span.open + open.size());
  }
  return span;
}

inline std::optional<std::string> tag_body(std::string_view s, const TagSpan& span,
                                           std::string_view name) {
  if (span.open == std::string_view::npos || span.close == std::string_view::npos) {
    return std::nullopt;
  }
  const std::size_t begin = span.open + name.size() + 2;
  return std::string(s.substr(begin, span.close - begin));
}

}  // namespace detail

// Total: every failure is recorded in the result rather than thrown.
inline ModelOutput parse_model_output(std::string_view response) {
  ModelOutput out;
  const auto think = detail::find_tag(response, "think");
  const auto action = detail::find_tag(response, "action");
  const auto conclusion = detail::find_tag(response, "conclusion");

  if (auto body = detail::tag_body(response, think, "think")) out.think = std::string(text::trim(*body));
  if (auto body = detail::tag_body(response, conclusion, "conclusion")) {
    out.conclusion = std::string(text::trim(*body));
  }
  if (auto body = detail::tag_body(response, action, "action")) {
    out.action_raw = std::string(text::trim(*body));
    out.action = parse_action(out.action_raw);
  }

  const bool once = think.open_count == 1 && think.close_count == 1 &&
                    action.open_count == 1 && action.close_count == 1;
  out.format_ok = once && think.close != std::string_view::npos &&
                  action.close != std::string_view::npos &&
                  think.close + std::string_view("</think>").size() <= action.open;
  return out;
}

// Kinds equal, every point within `tol` pixels, scroll directions equal,
// texts equal after case folding and whitespace collapsing. Scroll endpoints
// are compared only when both sides carry them.
inline bool actions_match(const Action& a, const Action& b, double tol) {
  if (a.kind != b.kind) return false;
  if (has_point(a.kind)) return distance(a.point, b.point) <= tol;
  if (has_text(a.kind)) return text::equivalent(a.text, b.text);
  if (has_endpoints(a.kind)) {
    if (a.kind == ActionKind::kScroll && a.direction != b.direction) return false;
    if (a.endpoints_absent || b.endpoints_absent) return true;
    return distance(a.start, b.start) <= tol && distance(a.end, b.end) <= tol;
  }
  return true;
}

}  // namespace venus

#endif  // VENUS_ACTION_HPP_
