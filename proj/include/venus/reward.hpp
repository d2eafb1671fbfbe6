/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_REWARD_HPP_
#define VENUS_REWARD_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/text.hpp"

namespace venus {

// Every constant the grounding and navigation rewards depend on.
//
// Distances are in pixels at a screen `reference_width` pixels wide. The
// navigation reward rescales them linearly to the target screen's width;
// reference_width = 0 disables rescaling.
struct RewardConfig {
  double w1 = 0.1;            // format weight
  double w2 = 1.0;            // task weight
  double alpha = 1.0;         // point reward scale
  double beta_scroll = 1.0;   // scroll reward scale
  double gamma = 1.0;         // content reward scale
  double delta1 = 70.0;       // outer coordinate band
  double delta2 = 14.0;       // inner coordinate band
  double delta3 = 140.0;      // scroll endpoint threshold
  double f1_threshold = 0.5;
  double reference_width = 1080.0;

  // Throws kConfigError when an invariant is violated.
  void validate() const {
    auto fail = [](const std::string& what) {
      throw Error(ErrorCode::kConfigError, "invalid reward config: " + what);
    };
    if (w1 < 0 || w2 < 0) fail("weights must be >= 0");
    if (alpha < 0 || beta_scroll < 0 || gamma < 0) fail("scales must be >= 0");
    if (!(delta2 > 0 && delta2 < delta1)) fail("need 0 < delta2 < delta1");
    if (!(delta3 > 0)) fail("need delta3 > 0");
    if (f1_threshold < 0 || f1_threshold > 1) fail("f1_threshold must be in [0, 1]");
    if (reference_width < 0) fail("reference_width must be >= 0");
  }

  // Distance thresholds rescaled to a screen of the given width.
  RewardConfig scaled_for(const ScreenSize& screen) const {
    if (reference_width <= 0 || screen.width <= 0) return *this;
    RewardConfig out = *this;
    const double s = screen.width / reference_width;
    out.delta1 *= s;
    out.delta2 *= s;
    out.delta3 *= s;
    return out;
  }

  bool operator==(const RewardConfig&) const = default;
};

inline nlohmann::ordered_json reward_config_to_json(const RewardConfig& c) {
  return {{"w1", c.w1},
          {"w2", c.w2},
          {"alpha", c.alpha},
          {"beta_scroll", c.beta_scroll},
          {"gamma", c.gamma},
          {"delta1", c.delta1},
          {"delta2", c.delta2},
          {"delta3", c.delta3},
          {"f1_threshold", c.f1_threshold},
          {"reference_width", c.reference_width}};
}

// Keys present in `j` override `base`; unknown keys are a config error.
inline RewardConfig reward_config_from_json(const nlohmann::json& j, const RewardConfig& base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "reward config must be an object");
  RewardConfig c = base;
  const std::array<std::pair<const char*, double*>, 10> fields = {{
      {"w1", &c.w1},
      {"w2", &c.w2},
      {"alpha", &c.alpha},
      {"beta_scroll", &c.beta_scroll},
      {"gamma", &c.gamma},
      {"delta1", &c.delta1},
      {"delta2", &c.delta2},
      {"delta3", &c.delta3},
      {"f1_threshold", &c.f1_threshold},
      {"reference_width", &c.reference_width},
  }};
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const auto& f) { return key == f.first; });
    if (it == fields.end()) {
      throw Error(ErrorCode::kConfigError, "unknown reward config key '" + key + "'");
    }
    if (!value.is_number()) {
      throw Error(ErrorCode::kConfigError, "reward config key '" + key + "' must be a number");
    }
    *it->second = value.get<double>();
  }
  c.validate();
  return c;
}

inline RewardConfig load_reward_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open reward config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, "reward config '" + path + "': " + e.what());
  }
  return reward_config_from_json(j);
}

// Axis-aligned box [x1, y1, x2, y2] in pixels.
struct Box {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  double center_x() const { return (x1 + x2) / 2.0; }
  double center_y() const { return (y1 + y2) / 2.0; }
  bool well_formed() const { return x1 <= x2 && y1 <= y2; }
  bool operator==(const Box&) const = default;
};

// Inclusive on every edge. Shared by the grounding reward and the grounding
// evaluation so both always agree.
inline bool point_in_box(double x, double y, const Box& box) {
  return box.x1 <= x && x <= box.x2 && box.y1 <= y && y <= box.y2;
}

inline bool center_in_box(const Box& predicted, const Box& gt) {
  return point_in_box(predicted.center_x(), predicted.center_y(), gt);
}

// Accepts exactly "[x1,y1,x2,y2]" with optional blanks around tokens.
inline std::optional<Box> parse_box(std::string_view response) {
  std::string_view s = text::trim(response);
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= s.size() || s[pos] != c) return false;
    ++pos;
    return true;
  };
  auto number = [&]() -> std::optional<double> {
    skip();
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (ec != std::errc{} || !std::isfinite(v)) return std::nullopt;
    pos = static_cast<std::size_t>(ptr - s.data());
    return v;
  };
  if (!expect('[')) return std::nullopt;
  std::array<double, 4> v{};
  for (int i = 0; i < 4; ++i) {
    auto n = number();
    if (!n) return std::nullopt;
    v[i] = *n;
    if (i < 3 && !expect(',')) return std::nullopt;
  }
  if (!expect(']')) return std::nullopt;
  skip();
  if (pos != s.size()) return std::nullopt;
  return Box{v[0], v[1], v[2], v[3]};
}

// Per-component rewards. For grounding, `coord` holds the point-in-box term.
struct RewardBreakdown {
  double format = 0;
  double type = 0;
  double coord = 0;
  double content = 0;
  double total = 0;
  bool operator==(const RewardBreakdown&) const = default;
};

inline nlohmann::ordered_json to_ordered_json(const RewardBreakdown& b) {
  return {{"format", b.format},
          {"type", b.type},
          {"coord", b.coord},
          {"content", b.content},
          {"total", b.total}};
}

inline RewardBreakdown grounding_reward(std::string_view response, const Box& gt_box,
                                        const RewardConfig& cfg) {
  RewardBreakdown r;
  if (auto box = parse_box(response)) {
    r.format = 1.0;
    r.coord = center_in_box(*box, gt_box) ? 1.0 : 0.0;
  }
  r.total = r.format * cfg.w1 + r.coord * cfg.w2;
  return r;
}

// Stepwise reward on the pixel distance d: alpha below delta2, alpha/2 in
// [delta2, delta1), zero beyond.
inline double coordinate_reward_at(double d, const RewardConfig& cfg) {
  if (d < cfg.delta2) return cfg.alpha;
  if (d < cfg.delta1) return 0.5 * cfg.alpha;
  return 0.0;
}

inline double coordinate_reward(Point pred, Point gt, const RewardConfig& cfg) {
  return coordinate_reward_at(distance(pred, gt), cfg);
}

// First satisfied clause wins. A direction-only scroll has no start distance,
// so only its direction can earn credit.
inline double scroll_reward(const Action& pred, const Action& gt, const RewardConfig& cfg) {
  const bool endpoints = !pred.endpoints_absent && !gt.endpoints_absent;
  const bool start_close = endpoints && distance(pred.start, gt.start) < cfg.delta3;
  const bool end_close = endpoints && distance(pred.end, gt.end) < cfg.delta3;
  const bool direction_match = pred.direction == gt.direction;
  if (start_close && end_close && direction_match) return 1.5 * cfg.beta_scroll;
  if (start_close && direction_match) return cfg.beta_scroll;
  if (start_close || direction_match) return 0.5 * cfg.beta_scroll;
  return 0.0;
}

// The scroll formula without its direction term.
inline double drag_reward(const Action& pred, const Action& gt, const RewardConfig& cfg) {
  const bool start_close = distance(pred.start, gt.start) < cfg.delta3;
  const bool end_close = distance(pred.end, gt.end) < cfg.delta3;
  if (start_close && end_close) return 1.5 * cfg.beta_scroll;
  if (start_close) return cfg.beta_scroll;
  return 0.0;
}

inline double content_reward(std::string_view pred_text, std::string_view gt_text,
                             const RewardConfig& cfg) {
  return text::token_f1(pred_text, gt_text) >= cfg.f1_threshold ? cfg.gamma : 0.0;
}

// App names are identifiers: they match on case-folded equality, not overlap.
inline double launch_reward(std::string_view pred_app, std::string_view gt_app,
                            const RewardConfig& cfg) {
  return text::equivalent(pred_app, gt_app) ? cfg.gamma : 0.0;
}

// Type, coordinate and content components for an already-parsed prediction.
// `cfg` must already be scaled to the screen.
inline RewardBreakdown score_action(const Action& pred, const Action& gt,
                                    const RewardConfig& cfg) {
  RewardBreakdown r;
  if (pred.kind != gt.kind) return r;
  r.type = 1.0;
  switch (gt.kind) {
    case ActionKind::kClick:
    case ActionKind::kLongPress:
      r.coord = coordinate_reward(pred.point, gt.point, cfg);
      break;
    case ActionKind::kScroll:
      r.coord = scroll_reward(pred, gt, cfg);
      break;
    case ActionKind::kDrag:
      r.coord = drag_reward(pred, gt, cfg);
      break;
    case ActionKind::kLaunch:
      r.content = launch_reward(pred.text, gt.text, cfg);
      break;
    case ActionKind::kType:
    case ActionKind::kFinished:
    case ActionKind::kCallUser:
      r.content = content_reward(pred.text, gt.text, cfg);
      break;
    default:
      break;
  }
  return r;
}

struct NavigationTarget {
  Action gt_action;
  ScreenSize screen;
};

inline RewardBreakdown navigation_reward(const ModelOutput& output,
                                         const NavigationTarget& target,
                                         const RewardConfig& cfg) {
  RewardBreakdown r;
  if (output.action.has_value()) {
    r = score_action(*output.action, target.gt_action, cfg.scaled_for(target.screen));
  }
  r.format = output.format_ok ? 1.0 : 0.0;
  r.total = r.format * cfg.w1 + (r.type + r.coord + r.content) * cfg.w2;
  return r;
}

inline RewardBreakdown navigation_reward(std::string_view response,
                                         const NavigationTarget& target,
                                         const RewardConfig& cfg) {
  return navigation_reward(parse_model_output(response), target, cfg);
}

// Largest total navigation_reward can return under `cfg`.
inline double max_navigation_reward(const RewardConfig& cfg) {
  return cfg.w1 + (1.0 + std::max({cfg.alpha, 1.5 * cfg.beta_scroll, cfg.gamma})) * cfg.w2;
}

}  // namespace venus

#endif  // VENUS_REWARD_HPP_
